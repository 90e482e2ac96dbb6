//! Centrally symmetric polytopes as unit balls.
//!
//! A ball is stored either by its vertices ([`SymVRep`]) or by its facet
//! functionals ([`SymHRep`]), one representative per antipodal pair. The two
//! are polar to each other: the facet functionals of `absconv(V)` are exactly
//! the vertices of `{u : |u . v| <= 1 for v in V}`, so both conversions reduce
//! to vertex enumeration of a symmetric H-polytope, done here by the double
//! description method in exact arithmetic.
//!
//! Conversions are practical up to dimension ~6 with a few dozen vertex
//! pairs; the method is exponential in the worst case.

use num::{One, Signed, Zero};

use crate::arith::{dot, is_zero, kernel_basis, primitive, rank, sign_normalize, zeros, QMat, QVec, Rat};
use crate::error::{Error, Result};
use crate::lp::{lp_min, LinearProgram, LpStatus};

/// Unit ball given as the absolutely convex hull of its generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymVRep {
    dim: usize,
    generators: Vec<QVec>,
}

/// Unit ball `{x : |u . x| <= 1}` given by its facet functionals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymHRep {
    dim: usize,
    functionals: Vec<QVec>,
}

fn check_dims(dim: usize, vectors: &[QVec]) -> Result<()> {
    match vectors.iter().find(|v| v.len() != dim) {
        Some(v) => Err(Error::DimensionMismatch { expected: dim, found: v.len() }),
        None => Ok(()),
    }
}

fn stacked_rank(dim: usize, vectors: &[QVec]) -> usize {
    rank(&QMat::from_rows(dim, vectors).expect("dimensions checked"))
}

/// Gauge of `x` with respect to `absconv(points)`, or `None` if `x` is not in
/// their span. Solved as `min sum(l+ + l-)` over `sum((l+ - l-) p) = x`.
pub fn absconv_gauge(points: &[QVec], x: &[Rat]) -> Option<Rat> {
    let m = points.len();
    if is_zero(x) {
        return Some(Rat::zero());
    }
    let mut lp = LinearProgram::new(2 * m).minimize(vec![Rat::one(); 2 * m]);
    for j in 0..2 * m {
        lp.set_nonneg(j);
    }
    for (coord, target) in x.iter().enumerate() {
        let mut row = Vec::with_capacity(2 * m);
        for p in points {
            row.push(p[coord].clone());
        }
        for p in points {
            row.push(-&p[coord]);
        }
        lp.add_eq(row, target.clone());
    }
    let out = lp_min(&lp);
    match out.status {
        LpStatus::Optimal => out.value,
        _ => None,
    }
}

/// Irredundant, sign-normalized, sorted representatives of the extreme points
/// of `absconv(points)`. The result depends only on the hull.
pub fn canonical_points(points: &[QVec]) -> Vec<QVec> {
    let mut current: Vec<QVec> = points.iter().filter(|p| !is_zero(p)).map(|p| sign_normalize(p)).collect();
    current.sort();
    current.dedup();
    // `p` is exposed by the functional `p` when `p . p > |p . q|` for every
    // other `q`; such points are kept without solving a program.
    let exposed: Vec<bool> = current
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let own = dot(p, p);
            current.iter().enumerate().all(|(k, q)| k == i || dot(p, q).abs() < own)
        })
        .collect();
    let mut keep_without_lp: std::collections::BTreeSet<QVec> =
        current.iter().zip(&exposed).filter(|(_, &e)| e).map(|(p, _)| p.clone()).collect();
    let mut i = 0;
    while i < current.len() {
        let candidate = current[i].clone();
        if keep_without_lp.remove(&candidate) {
            i += 1;
            continue;
        }
        let others: Vec<QVec> = current.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, p)| p.clone()).collect();
        match absconv_gauge(&others, &candidate) {
            Some(g) if g <= Rat::one() => {
                current.remove(i);
            }
            _ => i += 1,
        }
    }
    current
}

/// The functionals among `functionals` that define facets of
/// `{x : |u . x| <= 1}`, sign-normalized and sorted. A functional defines a
/// facet iff the vertices where it is tight span the whole space; this agrees
/// with [`canonical_points`] by polarity.
fn irredundant_functionals(dim: usize, functionals: &[QVec]) -> Result<Vec<QVec>> {
    let vertices = symmetric_vertex_enumeration(dim, functionals)?;
    let mut candidates: Vec<QVec> = functionals.iter().filter(|u| !is_zero(u)).map(|u| sign_normalize(u)).collect();
    candidates.sort();
    candidates.dedup();
    Ok(candidates
        .into_iter()
        .filter(|u| {
            let tight: Vec<QVec> = vertices.iter().filter(|v| dot(u, v).abs().is_one()).cloned().collect();
            tight.len() >= dim && stacked_rank(dim, &tight) == dim
        })
        .collect())
}

impl SymVRep {
    /// Builds a canonical ball from arbitrary generators (zero and redundant
    /// generators are dropped, signs normalized, result sorted).
    pub fn new(dim: usize, generators: Vec<QVec>) -> Result<Self> {
        check_dims(dim, &generators)?;
        let r = stacked_rank(dim, &generators);
        if r < dim {
            return Err(Error::DegenerateBall { dim, rank: r });
        }
        Ok(SymVRep { dim, generators: canonical_points(&generators) })
    }

    /// Trusts the caller that `generators` are already canonical.
    pub(crate) fn from_canonical(dim: usize, generators: Vec<QVec>) -> Self {
        SymVRep { dim, generators }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[QVec] {
        &self.generators
    }

    pub fn canonicalize(&self) -> Self {
        SymVRep { dim: self.dim, generators: canonical_points(&self.generators) }
    }

    /// Signed vertex list `v_1, -v_1, v_2, -v_2, ...`.
    pub fn signed_vertices(&self) -> Vec<QVec> {
        self.generators.iter().flat_map(|g| [g.clone(), g.iter().map(|x| -x).collect()]).collect()
    }
}

impl SymHRep {
    /// Builds a canonical H-representation (redundant functionals dropped).
    pub fn new(dim: usize, functionals: Vec<QVec>) -> Result<Self> {
        check_dims(dim, &functionals)?;
        if stacked_rank(dim, &functionals) < dim {
            let m = QMat::from_rows(dim, &functionals).expect("dimensions checked");
            let witness = kernel_basis(&m).into_iter().next().expect("rank deficit gives a kernel vector");
            return Err(Error::Seminorm { witness });
        }
        Ok(SymHRep { dim, functionals: irredundant_functionals(dim, &functionals)? })
    }

    pub(crate) fn from_canonical(dim: usize, functionals: Vec<QVec>) -> Self {
        SymHRep { dim, functionals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn functionals(&self) -> &[QVec] {
        &self.functionals
    }

    pub fn canonicalize(&self) -> Self {
        let functionals = irredundant_functionals(self.dim, &self.functionals).expect("functionals span");
        SymHRep { dim: self.dim, functionals }
    }
}

/// Facet functionals of the ball, each normalized to max 1 over the ball.
pub fn vrep_to_hrep(v: &SymVRep) -> Result<SymHRep> {
    let functionals = symmetric_vertex_enumeration(v.dim, &v.generators)
        .map_err(|_| Error::DegenerateBall { dim: v.dim, rank: stacked_rank(v.dim, &v.generators) })?;
    Ok(SymHRep::from_canonical(v.dim, functionals))
}

/// Extreme points of `{x : |u_i . x| <= 1}`.
pub fn hrep_to_vrep(h: &SymHRep) -> Result<SymVRep> {
    let vertices = symmetric_vertex_enumeration(h.dim, &h.functionals)?;
    Ok(SymVRep::from_canonical(h.dim, vertices))
}

/// Minkowski gauge `min{t >= 0 : x in t B}` by linear programming.
pub fn gauge(v: &SymVRep, x: &[Rat]) -> Result<Rat> {
    if x.len() != v.dim {
        return Err(Error::DimensionMismatch { expected: v.dim, found: x.len() });
    }
    Ok(absconv_gauge(&v.generators, x).expect("generators span the space"))
}

/// `max_i |u_i . x|`.
pub fn norm_h(h: &SymHRep, x: &[Rat]) -> Result<Rat> {
    if x.len() != h.dim {
        return Err(Error::DimensionMismatch { expected: h.dim, found: x.len() });
    }
    Ok(h.functionals.iter().map(|u| dot(u, x).abs()).max().unwrap_or_else(Rat::zero))
}

/// A unit vector is a smooth point of a polyhedral norm iff exactly one facet
/// pair is active there.
pub fn is_smooth_point(h: &SymHRep, x: &[Rat]) -> Result<bool> {
    let norm = norm_h(h, x)?;
    if !norm.is_one() {
        return Err(Error::NotOnSphere { norm });
    }
    let active = h.functionals.iter().filter(|u| dot(u, x).abs().is_one()).count();
    Ok(active == 1)
}

/// Small fixed-width bitset over processed constraint indices.
#[derive(Clone, Debug, PartialEq, Eq)]
struct RowSet(Vec<u64>);

impl RowSet {
    fn new(len: usize) -> Self {
        RowSet(vec![0; len.div_ceil(64)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn intersect(&self, other: &RowSet) -> RowSet {
        RowSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_superset(&self, other: &RowSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == *b)
    }
}

struct Ray {
    coords: QVec,
    zeros: RowSet,
}

/// Vertices (one per antipodal pair, canonical order) of `{x : |a . x| <= 1}`.
///
/// Works on the homogenized cone `{(x, t) : t - a . x >= 0, t + a . x >= 0}`,
/// which is pointed when the rows span; its extreme rays all have `t > 0` and
/// scale to the polytope's vertices.
fn symmetric_vertex_enumeration(dim: usize, rows: &[QVec]) -> Result<Vec<QVec>> {
    let nonzero: Vec<QVec> = rows.iter().filter(|r| !is_zero(r)).map(|r| sign_normalize(r)).collect();
    if stacked_rank(dim, &nonzero) < dim {
        let m = QMat::from_rows(dim, &nonzero).expect("dimensions checked");
        let witness = kernel_basis(&m).into_iter().next().expect("rank deficit");
        return Err(Error::Seminorm { witness });
    }
    if dim == 0 {
        return Ok(Vec::new());
    }
    let big = dim + 1;
    let mut halfspaces: Vec<QVec> = Vec::with_capacity(2 * nonzero.len());
    for a in &nonzero {
        let mut minus: QVec = a.iter().map(|x| -x).collect();
        minus.push(Rat::one());
        let mut plus = a.clone();
        plus.push(Rat::one());
        halfspaces.push(minus);
        halfspaces.push(plus);
    }
    halfspaces.sort();
    halfspaces.dedup();
    let total = halfspaces.len();

    // Initial simplicial cone from the first `big` independent rows.
    let mut order: Vec<usize> = Vec::with_capacity(total);
    let mut chosen: Vec<QVec> = Vec::new();
    for (i, h) in halfspaces.iter().enumerate() {
        if chosen.len() == big {
            break;
        }
        chosen.push(h.clone());
        if stacked_rank(big, &chosen) == chosen.len() {
            order.push(i);
        } else {
            chosen.pop();
        }
    }
    debug_assert_eq!(order.len(), big);
    let initial = QMat::from_rows(big, &chosen).expect("dimensions").inverse().expect("independent rows");
    let mut rays: Vec<Ray> = (0..big)
        .map(|k| {
            let mut zs = RowSet::new(total);
            for (pos, _) in order.iter().enumerate().filter(|&(pos, _)| pos != k) {
                zs.insert(pos);
            }
            Ray { coords: primitive(&initial.col(k)), zeros: zs }
        })
        .collect();
    // `order[pos]` is the halfspace processed at step `pos`; zero sets index steps.
    let remaining: Vec<usize> = (0..total).filter(|i| !order.contains(i)).collect();
    for i in remaining {
        let step = order.len();
        order.push(i);
        let h = &halfspaces[i];
        let values: Vec<Rat> = rays.iter().map(|r| dot(h, &r.coords)).collect();
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for (k, v) in values.iter().enumerate() {
            if v.is_positive() {
                pos.push(k);
            } else if v.is_negative() {
                neg.push(k);
            }
        }
        if neg.is_empty() {
            for (r, v) in rays.iter_mut().zip(&values) {
                if v.is_zero() {
                    r.zeros.insert(step);
                }
            }
            continue;
        }
        let mut fresh = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common = rays[p].zeros.intersect(&rays[n].zeros);
                if common.count() + 2 < big {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(k, r)| k == p || k == n || !r.zeros.is_superset(&common));
                if !adjacent {
                    continue;
                }
                let (vp, vn) = (&values[p], &values[n]);
                let coords: QVec =
                    rays[n].coords.iter().zip(&rays[p].coords).map(|(xn, xp)| xn * vp - xp * vn).collect();
                let mut zeros = common;
                zeros.insert(step);
                fresh.push(Ray { coords: primitive(&coords), zeros });
            }
        }
        let mut next: Vec<Ray> = Vec::with_capacity(rays.len() + fresh.len());
        for (mut r, v) in rays.into_iter().zip(values) {
            if v.is_negative() {
                continue;
            }
            if v.is_zero() {
                r.zeros.insert(step);
            }
            next.push(r);
        }
        next.extend(fresh);
        rays = next;
    }

    let mut vertices: Vec<QVec> = rays
        .into_iter()
        .map(|r| {
            let t = r.coords[dim].clone();
            debug_assert!(t.is_positive(), "bounded symmetric polytope has no recession rays");
            let x: QVec = r.coords[..dim].iter().map(|c| c / &t).collect();
            sign_normalize(&x)
        })
        .collect();
    vertices.sort();
    vertices.dedup();
    Ok(vertices)
}

/// Scales `x` to the unit sphere of `h` (requires `x != 0`).
pub fn normalize_to_sphere(h: &SymHRep, x: &[Rat]) -> Result<QVec> {
    let n = norm_h(h, x)?;
    if n.is_zero() {
        return Ok(zeros(x.len()));
    }
    Ok(x.iter().map(|c| c / &n).collect())
}
