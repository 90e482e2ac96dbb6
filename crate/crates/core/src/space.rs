//! Polyhedral normed spaces over the rationals and the standard constructions
//! on them: duals, subspaces, quotients, l1/l-infinity sums, isometric
//! embeddings and isometry groups.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num::{One, Zero};

use crate::arith::{complete_with_standard, independent_subset, kernel_basis, rank, solve, unit, zeros, QMat, QVec, Rat};
use crate::error::{Error, Result};
use crate::lp::{lp_max, LinearProgram, LpStatus};
use crate::polytope::{hrep_to_vrep, norm_h, vrep_to_hrep, SymHRep, SymVRep};

/// Default cap on vertex pairs for [`isometry_group`].
pub const DEFAULT_VERTEX_CAP: usize = 16;

/// A finite-dimensional space `Q^dim` with a polyhedral norm.
///
/// The vertex representation is always materialized; the facet representation
/// is computed on first use, since it can be exponentially larger (quotients of
/// large l1-sums are the typical case).
#[derive(Clone, Debug)]
pub struct PolySpace {
    ball_v: SymVRep,
    ball_h: OnceLock<SymHRep>,
}

impl PartialEq for PolySpace {
    fn eq(&self, other: &Self) -> bool {
        self.ball_v == other.ball_v
    }
}

impl Eq for PolySpace {}

impl PolySpace {
    pub fn from_vrep(ball: SymVRep) -> Self {
        PolySpace { ball_v: ball, ball_h: OnceLock::new() }
    }

    pub fn from_hrep(ball: SymHRep) -> Result<Self> {
        let ball_v = hrep_to_vrep(&ball)?;
        let cell = OnceLock::new();
        let _ = cell.set(ball);
        Ok(PolySpace { ball_v, ball_h: cell })
    }

    pub fn from_vertices(dim: usize, generators: Vec<QVec>) -> Result<Self> {
        Ok(Self::from_vrep(SymVRep::new(dim, generators)?))
    }

    pub fn from_facets(dim: usize, functionals: Vec<QVec>) -> Result<Self> {
        Self::from_hrep(SymHRep::new(dim, functionals)?)
    }

    /// `Q^dim` with the l1 norm.
    pub fn l1(dim: usize) -> Self {
        Self::from_vrep(SymVRep::from_canonical(dim, (0..dim).rev().map(|i| unit(dim, i)).collect()))
    }

    /// `Q^dim` with the max norm.
    pub fn linf(dim: usize) -> Self {
        Self::from_facets(dim, (0..dim).map(|i| unit(dim, i)).collect()).expect("standard basis separates points")
    }

    /// `Q` with unit ball `[-radius, radius]`.
    pub fn line(radius: Rat) -> Self {
        Self::from_vertices(1, vec![vec![radius]]).expect("nonzero radius")
    }

    pub fn dim(&self) -> usize {
        self.ball_v.dim()
    }

    pub fn ball_v(&self) -> &SymVRep {
        &self.ball_v
    }

    pub fn ball_h(&self) -> &SymHRep {
        self.ball_h.get_or_init(|| vrep_to_hrep(&self.ball_v).expect("canonical V-representation spans"))
    }

    pub fn vertices(&self) -> &[QVec] {
        self.ball_v.generators()
    }

    pub fn facets(&self) -> &[QVec] {
        self.ball_h().functionals()
    }

    pub fn has_facets(&self) -> bool {
        self.ball_h.get().is_some()
    }

    /// The norm. Uses the facet functionals when they are already known,
    /// otherwise the gauge linear program; the two agree exactly.
    pub fn norm(&self, x: &[Rat]) -> Result<Rat> {
        match self.ball_h.get() {
            Some(h) => norm_h(h, x),
            None => self.gauge(x),
        }
    }

    pub fn gauge(&self, x: &[Rat]) -> Result<Rat> {
        crate::polytope::gauge(&self.ball_v, x)
    }
}

/// A linear map `Q^domain_dim -> Q^codomain_dim`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearMap {
    matrix: QMat,
}

impl LinearMap {
    pub fn new(matrix: QMat) -> Self {
        LinearMap { matrix }
    }

    pub fn identity(n: usize) -> Self {
        LinearMap { matrix: QMat::identity(n) }
    }

    pub fn matrix(&self) -> &QMat {
        &self.matrix
    }

    pub fn domain_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn codomain_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, x: &[Rat]) -> QVec {
        self.matrix.mul_vec(x)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearMap) -> LinearMap {
        LinearMap { matrix: self.matrix.matmul(&inner.matrix) }
    }

    pub fn pow(&self, n: usize) -> LinearMap {
        LinearMap { matrix: self.matrix.pow(n) }
    }

    pub fn inverse(&self) -> Option<LinearMap> {
        self.matrix.inverse().map(LinearMap::new)
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_identity()
    }

    pub fn is_injective(&self) -> bool {
        rank(&self.matrix) == self.domain_dim()
    }
}

/// A linear subspace of `Q^ambient_dim` with a fixed basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<QVec>,
}

impl Subspace {
    pub fn new(ambient_dim: usize, basis: Vec<QVec>) -> Result<Self> {
        if let Some(v) = basis.iter().find(|v| v.len() != ambient_dim) {
            return Err(Error::DimensionMismatch { expected: ambient_dim, found: v.len() });
        }
        if rank(&QMat::from_rows(ambient_dim, &basis)?) != basis.len() {
            return Err(Error::DependentBasis);
        }
        Ok(Subspace { ambient_dim, basis })
    }

    /// Basis of the span of arbitrary vectors (greedy, order-preserving).
    pub fn span(ambient_dim: usize, vectors: &[QVec]) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != ambient_dim) {
            return Err(Error::DimensionMismatch { expected: ambient_dim, found: v.len() });
        }
        let keep = independent_subset(vectors, ambient_dim);
        Ok(Subspace { ambient_dim, basis: keep.into_iter().map(|i| vectors[i].clone()).collect() })
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: Vec::new() }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: (0..ambient_dim).map(|i| unit(ambient_dim, i)).collect() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[QVec] {
        &self.basis
    }

    /// `ambient_dim x dim` matrix with the basis as columns.
    pub fn basis_matrix(&self) -> QMat {
        QMat::from_cols(self.ambient_dim, &self.basis).expect("uniform dimensions")
    }

    /// Coordinates of `x` in the basis, if `x` lies in the subspace.
    pub fn coordinates(&self, x: &[Rat]) -> Option<QVec> {
        solve(&self.basis_matrix(), x).ok().flatten()
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.coordinates(x).is_some()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    /// Same subspace as a set.
    pub fn same_span(&self, other: &Subspace) -> bool {
        self.dim() == other.dim() && self.contains_subspace(other)
    }

    pub fn intersection(&self, other: &Subspace) -> Subspace {
        let m = self.basis_matrix().hstack(&other.basis_matrix());
        let k = self.dim();
        let vectors: Vec<QVec> = kernel_basis(&m)
            .into_iter()
            .map(|coeffs| self.basis_matrix().mul_vec(&coeffs[..k]))
            .collect();
        Subspace::span(self.ambient_dim, &vectors).expect("uniform dimensions")
    }

    /// Image of the subspace under a linear map.
    pub fn image(&self, map: &LinearMap) -> Subspace {
        let images: Vec<QVec> = self.basis.iter().map(|b| map.apply(b)).collect();
        Subspace::span(map.codomain_dim(), &images).expect("uniform dimensions")
    }
}

pub fn norm(s: &PolySpace, x: &[Rat]) -> Result<Rat> {
    s.norm(x)
}

/// The dual space: vertex and facet lists swap roles.
pub fn dual(s: &PolySpace) -> PolySpace {
    let ball_v = SymVRep::from_canonical(s.dim(), s.facets().to_vec());
    let ball_h = SymHRep::from_canonical(s.dim(), s.vertices().to_vec());
    let cell = OnceLock::new();
    let _ = cell.set(ball_h);
    PolySpace { ball_v, ball_h: cell }
}

/// The restriction of the norm to `sub`, in basis coordinates.
pub fn subspace_space(s: &PolySpace, sub: &Subspace) -> Result<PolySpace> {
    if sub.ambient_dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: sub.ambient_dim() });
    }
    let b = sub.basis_matrix();
    let pulled: Vec<QVec> = s.facets().iter().map(|u| b.vec_mul(u)).collect();
    PolySpace::from_facets(sub.dim(), pulled)
}

/// `s / sub` in the coordinates of a complementary set of standard basis
/// vectors, together with the projection and a right inverse of it.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub space: PolySpace,
    pub projection: LinearMap,
    /// Maps quotient coordinates to the chosen complement representatives.
    pub lift: LinearMap,
}

pub fn quotient_space(s: &PolySpace, sub: &Subspace) -> Result<Quotient> {
    if sub.ambient_dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: sub.ambient_dim() });
    }
    let d = s.dim();
    let complement = complete_with_standard(sub.basis(), d);
    let r = complement.len();
    let mut columns: Vec<QVec> = sub.basis().to_vec();
    columns.extend(complement.iter().map(|&i| unit(d, i)));
    let full = QMat::from_cols(d, &columns)?;
    let inv = full.inverse().expect("basis completed to a basis");
    let projection = LinearMap::new(inv.row_block(sub.dim(), d));
    let lift_cols: Vec<QVec> = complement.iter().map(|&i| unit(d, i)).collect();
    let lift = LinearMap::new(QMat::from_cols(d, &lift_cols)?);
    let space = if sub.dim() == 0 {
        s.clone()
    } else {
        PolySpace::from_vertices(r, s.vertices().iter().map(|v| projection.apply(v)).collect())?
    };
    Ok(Quotient { space, projection, lift })
}

fn block_embed(total: usize, offset: usize, v: &[Rat]) -> QVec {
    let mut out = zeros(total);
    for (i, x) in v.iter().enumerate() {
        out[offset + i] = x.clone();
    }
    out
}

/// `‖(x, y)‖ = ‖x‖ + ‖y‖`.
pub fn l1_sum(x: &PolySpace, y: &PolySpace) -> PolySpace {
    l1_sum_all(&[x, y])
}

/// l1-sum of several spaces; its vertices are the block-embedded vertices.
pub fn l1_sum_all(parts: &[&PolySpace]) -> PolySpace {
    let total: usize = parts.iter().map(|p| p.dim()).sum();
    let mut gens = Vec::new();
    let mut offset = 0;
    for p in parts {
        gens.extend(p.vertices().iter().map(|v| block_embed(total, offset, v)));
        offset += p.dim();
    }
    let mut gens: Vec<QVec> = gens.iter().map(|g| crate::arith::sign_normalize(g)).collect();
    gens.sort();
    PolySpace::from_vrep(SymVRep::from_canonical(total, gens))
}

/// `‖(x, y)‖ = max(‖x‖, ‖y‖)`; its facets are the block-embedded facets.
pub fn linf_sum(x: &PolySpace, y: &PolySpace) -> PolySpace {
    let total = x.dim() + y.dim();
    let mut fs: Vec<QVec> = x.facets().iter().map(|u| block_embed(total, 0, u)).collect();
    fs.extend(y.facets().iter().map(|u| block_embed(total, x.dim(), u)));
    let mut fs: Vec<QVec> = fs.iter().map(|g| crate::arith::sign_normalize(g)).collect();
    fs.sort();
    PolySpace::from_hrep(SymHRep::from_canonical(total, fs)).expect("block functionals separate points")
}

/// Where an isometric-embedding test fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EmbeddingDefect {
    /// The map has a nontrivial kernel vector.
    NotInjective(QVec),
    /// `x` with `‖x‖_src = 1` but `‖map x‖_dst > 1`.
    Expands { x: QVec, image_norm: Rat },
    /// `x` with `‖map x‖_dst <= 1` but `‖x‖_src > 1`.
    Shrinks { x: QVec, source_norm: Rat },
}

impl EmbeddingDefect {
    pub fn witness(&self) -> &QVec {
        match self {
            EmbeddingDefect::NotInjective(x) => x,
            EmbeddingDefect::Expands { x, .. } => x,
            EmbeddingDefect::Shrinks { x, .. } => x,
        }
    }
}

fn check_shape(src: &PolySpace, dst: &PolySpace, map: &LinearMap) -> Result<()> {
    if map.domain_dim() != src.dim() {
        return Err(Error::DimensionMismatch { expected: src.dim(), found: map.domain_dim() });
    }
    if map.codomain_dim() != dst.dim() {
        return Err(Error::DimensionMismatch { expected: dst.dim(), found: map.codomain_dim() });
    }
    Ok(())
}

/// Largest value of the functional `u` on `{x : map x ∈ B_dst}`, with the
/// maximizer. The feasible set is bounded when `map` is injective.
pub(crate) fn max_on_preimage_ball(dst: &PolySpace, map: &LinearMap, u: &[Rat]) -> Option<(Rat, QVec)> {
    let d = map.domain_dim();
    let verts = dst.vertices();
    let m = verts.len();
    // variables: x (free, d), l+ (m), l- (m)
    let mut lp = LinearProgram::new(d + 2 * m);
    let mut objective = zeros(d + 2 * m);
    objective[..d].clone_from_slice(u);
    lp.set_objective(objective);
    for j in d..d + 2 * m {
        lp.set_nonneg(j);
    }
    for row in 0..dst.dim() {
        let mut coeffs = zeros(d + 2 * m);
        coeffs[..d].clone_from_slice(map.matrix().row(row));
        for (k, v) in verts.iter().enumerate() {
            coeffs[d + k] = -&v[row];
            coeffs[d + m + k] = v[row].clone();
        }
        lp.add_eq(coeffs, Rat::zero());
    }
    let mut budget = zeros(d + 2 * m);
    for c in budget.iter_mut().skip(d) {
        *c = Rat::one();
    }
    lp.add_le(budget, Rat::one());
    let out = lp_max(&lp);
    match out.status {
        LpStatus::Optimal => Some((out.value.expect("optimal"), out.point.expect("optimal")[..d].to_vec())),
        _ => None,
    }
}

/// Exact test of `‖map x‖_dst = ‖x‖_src` for all `x`, returning a witness
/// when it fails.
///
/// Decided as two ball inclusions: `map(B_src) ⊆ B_dst` is checked on the
/// vertices of `B_src`, and `map⁻¹(B_dst) ⊆ B_src` is checked facet by facet
/// by maximizing each facet functional of `B_src` over the preimage ball. Only
/// the vertices of `B_dst` are needed, so large targets stay cheap.
pub fn embedding_defect(src: &PolySpace, dst: &PolySpace, map: &LinearMap) -> Result<Option<EmbeddingDefect>> {
    check_shape(src, dst, map)?;
    if let Some(k) = kernel_basis(map.matrix()).into_iter().next() {
        return Ok(Some(EmbeddingDefect::NotInjective(k)));
    }
    for v in src.vertices() {
        let image_norm = dst.norm(&map.apply(v))?;
        if image_norm > Rat::one() {
            return Ok(Some(EmbeddingDefect::Expands { x: v.clone(), image_norm }));
        }
    }
    for u in src.facets() {
        let (value, x) = max_on_preimage_ball(dst, map, u).expect("injective map has a bounded preimage ball");
        if value > Rat::one() {
            let source_norm = src.norm(&x)?;
            return Ok(Some(EmbeddingDefect::Shrinks { x, source_norm }));
        }
    }
    Ok(None)
}

pub fn is_isometric_embedding(src: &PolySpace, dst: &PolySpace, map: &LinearMap) -> Result<bool> {
    Ok(embedding_defect(src, dst, map)?.is_none())
}

/// Canonical facet list of the pulled-back norm `x ↦ ‖map x‖_dst`, or `None`
/// when that is only a seminorm.
pub fn pullback_hrep(dst: &PolySpace, map: &LinearMap) -> Result<Option<SymHRep>> {
    if map.codomain_dim() != dst.dim() {
        return Err(Error::DimensionMismatch { expected: dst.dim(), found: map.codomain_dim() });
    }
    let pulled: Vec<QVec> = dst.facets().iter().map(|u| map.matrix().vec_mul(u)).collect();
    match SymHRep::new(map.domain_dim(), pulled) {
        Ok(h) => Ok(Some(h)),
        Err(Error::Seminorm { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Isometric-embedding test by structural comparison of the pulled-back
/// facet list with the source facets. Needs the facets of `dst`.
pub fn is_isometric_embedding_structural(src: &PolySpace, dst: &PolySpace, map: &LinearMap) -> Result<bool> {
    check_shape(src, dst, map)?;
    Ok(match pullback_hrep(dst, map)? {
        Some(h) => h.functionals() == src.facets(),
        None => false,
    })
}

fn signed_vertex_index(signed: &[QVec]) -> BTreeMap<QVec, usize> {
    signed.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect()
}

/// The permutation a surjective isometry induces on the signed vertex list, or
/// `None` if `g` does not map the ball onto itself.
fn vertex_permutation(s: &PolySpace, g: &LinearMap) -> Option<Vec<usize>> {
    if g.domain_dim() != s.dim() || g.codomain_dim() != s.dim() {
        return None;
    }
    let signed = s.ball_v().signed_vertices();
    let index = signed_vertex_index(&signed);
    let perm: Vec<usize> = signed.iter().map(|v| index.get(&g.apply(v)).copied()).collect::<Option<_>>()?;
    let mut seen = vec![false; perm.len()];
    for &p in &perm {
        if std::mem::replace(&mut seen[p], true) {
            return None;
        }
    }
    Some(perm)
}

/// `g` is a linear bijection with `g(B) = B`.
pub fn is_surjective_isometry(s: &PolySpace, g: &LinearMap) -> bool {
    vertex_permutation(s, g).is_some() && g.matrix().inverse().is_some()
}

/// Least `n >= 1` with `g^n = id`, read off the cycle structure of the induced
/// signed vertex permutation.
pub fn isometry_order(s: &PolySpace, g: &LinearMap) -> Result<usize> {
    use num::Integer;
    let perm = vertex_permutation(s, g).ok_or(Error::NotAnIsometry)?;
    let mut seen = vec![false; perm.len()];
    let mut order = 1usize;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = perm[k];
            len += 1;
        }
        order = order.lcm(&len);
    }
    debug_assert!(g.pow(order).is_identity());
    Ok(order)
}

/// All surjective linear isometries of `s`, sorted by matrix entries.
pub fn isometry_group(s: &PolySpace) -> Result<Vec<LinearMap>> {
    isometry_group_with_cap(s, DEFAULT_VERTEX_CAP)
}

pub fn isometry_group_with_cap(s: &PolySpace, cap: usize) -> Result<Vec<LinearMap>> {
    let d = s.dim();
    let pairs = s.vertices().len();
    if pairs > cap {
        return Err(Error::TooManyVertices { found: pairs, cap });
    }
    if d == 0 {
        return Ok(vec![LinearMap::identity(0)]);
    }
    let signed = s.ball_v().signed_vertices();
    let dist = |a: &QVec, b: &QVec| s.gauge(&crate::arith::sub(a, b)).expect("dimensions agree");
    // Norm profile of each signed vertex: sorted distances to all others.
    let profiles: Vec<Vec<Rat>> = signed
        .iter()
        .map(|v| {
            let mut p: Vec<Rat> = signed.iter().map(|w| dist(v, w)).collect();
            p.sort();
            p
        })
        .collect();
    let basis_idx: Vec<usize> = independent_subset(s.vertices(), d).into_iter().map(|i| 2 * i).collect();
    let basis: Vec<QVec> = basis_idx.iter().map(|&i| signed[i].clone()).collect();
    let basis_inv = QMat::from_cols(d, &basis)?.inverse().expect("independent vertices");
    let index = signed_vertex_index(&signed);

    let mut found: Vec<LinearMap> = Vec::new();
    let mut assignment: Vec<usize> = Vec::with_capacity(d);
    search_assignments(&signed, &profiles, &basis_idx, &dist, &mut assignment, &mut |images| {
        let image_cols: Vec<QVec> = images.iter().map(|&i| signed[i].clone()).collect();
        let w = QMat::from_cols(d, &image_cols).expect("dimensions");
        let g = LinearMap::new(w.matmul(&basis_inv));
        if signed.iter().all(|v| index.contains_key(&g.apply(v))) && g.matrix().inverse().is_some() {
            found.push(g);
        }
    });
    found.sort_by_key(|g| g.matrix().row_vecs());
    found.dedup();
    Ok(found)
}

fn search_assignments(
    signed: &[QVec],
    profiles: &[Vec<Rat>],
    basis_idx: &[usize],
    dist: &dyn Fn(&QVec, &QVec) -> Rat,
    assignment: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    let depth = assignment.len();
    if depth == basis_idx.len() {
        emit(assignment);
        return;
    }
    let source = basis_idx[depth];
    for cand in 0..signed.len() {
        if profiles[cand] != profiles[source] || assignment.iter().any(|&a| a / 2 == cand / 2) {
            continue;
        }
        let consistent = assignment.iter().zip(basis_idx).all(|(&img, &src)| {
            dist(&signed[cand], &signed[img]) == dist(&signed[source], &signed[src])
                && dist(&signed[cand], &signed[img ^ 1]) == dist(&signed[source], &signed[src ^ 1])
        });
        if !consistent {
            continue;
        }
        assignment.push(cand);
        search_assignments(signed, profiles, basis_idx, dist, assignment, emit);
        assignment.pop();
    }
}
