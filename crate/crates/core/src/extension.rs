//! Deciding, at a fixed cycle length `n`, whether a partial isometry extends
//! to a surjective isometry of order dividing `n` in a larger space.
//!
//! The construction: `E0` is the l1-sum of `n` copies of `C` with the cyclic
//! block shift `g0`, and `N ⊆ E0` is spanned by the vectors with `a` in block
//! `i` and `-f(a)` in block `i + 1 (mod n)`, for `a` in a basis of `A`. Since
//! `g0(N) = N`, the shift descends to `E = E0 / N`, and `c ↦ (c, 0, ..., 0) + N`
//! embeds `C` equivariantly. The embedding is isometric exactly when
//!
//! ```text
//! ‖a_0 - f(a_{n-1})‖ <= Σ_{i=0}^{n-2} ‖a_{i+1} - f(a_i)‖   for all a_i ∈ A,
//! ```
//!
//! and a vector whose quotient norm drops decodes into a tuple violating it.

use num::{One, Zero};

use crate::arith::{add, neg, solve, sub, unit, zeros, QMat, QVec, Rat};
use crate::error::{Error, Result};
use crate::lp::{lp_max, LinearProgram, LpStatus};
use crate::partiso::{validate, IsometrySystem, PartialIsometry};
use crate::space::{
    embedding_defect, is_isometric_embedding, EmbeddingDefect, is_surjective_isometry, isometry_order, l1_sum, l1_sum_all,
    quotient_space, subspace_space, LinearMap, PolySpace, Subspace,
};

/// `C = Q²` with the l1 norm, `A = span{(1,0)}`, `B = span{(1,1)}` and
/// `f(t, 0) = (t/2, t/2)`: extends at no finite cycle length.
pub fn gurarii_counterexample() -> PartialIsometry {
    let q = |n: i64, d: i64| Rat::new(n.into(), d.into());
    PartialIsometry::new(
        PolySpace::l1(2),
        Subspace::new(2, vec![vec![q(1, 1), q(0, 1)]]).expect("independent"),
        Subspace::new(2, vec![vec![q(1, 1), q(1, 1)]]).expect("independent"),
        QMat::from_rows(1, &[vec![q(1, 2)]]).expect("1x1"),
    )
    .expect("valid fixture")
}

/// Both sides of the cycle inequality for a tuple given in domain-basis
/// coordinates: `(‖a_0 - f(a_{n-1})‖, Σ ‖a_{i+1} - f(a_i)‖)`.
pub fn evaluate_condition3(o: &PartialIsometry, tuple: &[QVec]) -> Result<(Rat, Rat)> {
    let n = tuple.len();
    if n == 0 {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    if let Some(a) = tuple.iter().find(|a| a.len() != o.dom().dim()) {
        return Err(Error::DimensionMismatch { expected: o.dom().dim(), found: a.len() });
    }
    let c = o.space();
    let a: Vec<QVec> = tuple.iter().map(|t| o.dom_vector(t)).collect();
    let fa: Vec<QVec> = tuple.iter().map(|t| o.apply_coords(t)).collect();
    let lhs = c.norm(&sub(&a[0], &fa[n - 1]))?;
    let mut rhs = Rat::zero();
    for i in 0..n - 1 {
        rhs += c.norm(&sub(&a[i + 1], &fa[i]))?;
    }
    Ok((lhs, rhs))
}

/// `E = E0 / N` with the induced shift and embedding, plus the data needed
/// to decode quotient computations back into `E0`.
#[derive(Clone, Debug)]
pub struct CyclicExtension {
    pub n: usize,
    pub space: PolySpace,
    pub auto: LinearMap,
    pub embed: LinearMap,
    /// The l1-sum `C^n`.
    pub sum: PolySpace,
    /// Spanning set of `N`, indexed by `(block, domain basis vector)`.
    pub generators: Vec<QVec>,
    pub projection: LinearMap,
}

fn cyclic_generators(o: &PartialIsometry, n: usize) -> Vec<QVec> {
    let d = o.space().dim();
    let k = o.dom().dim();
    let mut gens = Vec::with_capacity(n * k);
    for i in 0..n {
        for b in 0..k {
            let a = &o.dom().basis()[b];
            let fa = o.apply_coords(&unit(k, b));
            let mut g = zeros(n * d);
            let next = (i + 1) % n;
            for r in 0..d {
                g[i * d + r] += &a[r];
                g[next * d + r] -= &fa[r];
            }
            gens.push(g);
        }
    }
    gens
}

/// Block shift `(c_0, ..., c_{n-1}) ↦ (c_1, ..., c_{n-1}, c_0)`.
fn block_shift(d: usize, n: usize) -> QMat {
    let mut m = QMat::zeros(n * d, n * d);
    for i in 0..n {
        let src = (i + 1) % n;
        for r in 0..d {
            m[(i * d + r, src * d + r)] = Rat::one();
        }
    }
    m
}

pub fn cyclic_extension(o: &PartialIsometry, n: usize) -> Result<CyclicExtension> {
    if n == 0 {
        return Err(Error::InvalidPartialIsometry("cycle length must be positive".into()));
    }
    if let Some(v) = validate(o).violation {
        return Err(Error::InvalidPartialIsometry(v.to_string()));
    }
    let c = o.space();
    let d = c.dim();
    let copies: Vec<&PolySpace> = vec![c; n];
    let sum = l1_sum_all(&copies);
    let generators = cyclic_generators(o, n);
    let kernel = Subspace::span(n * d, &generators)?;
    let q = quotient_space(&sum, &kernel)?;
    let auto = LinearMap::new(q.projection.matrix().matmul(&block_shift(d, n)).matmul(q.lift.matrix()));
    let mut first_block = QMat::zeros(n * d, d);
    for r in 0..d {
        first_block[(r, r)] = Rat::one();
    }
    let embed = LinearMap::new(q.projection.matrix().matmul(&first_block));
    Ok(CyclicExtension { n, space: q.space, auto, embed, sum, generators, projection: q.projection })
}

impl CyclicExtension {
    pub fn into_system(self) -> Result<IsometrySystem> {
        let order = isometry_order(&self.space, &self.auto)?;
        Ok(IsometrySystem { space: self.space, auto: self.auto, embed: self.embed, order })
    }
}

/// Verdict of the cycle inequality at one `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Condition3Report {
    pub n: usize,
    pub holds: bool,
    /// `a_0, ..., a_{n-1}` in domain-basis coordinates, present iff `!holds`.
    pub witness: Option<Vec<QVec>>,
    pub lhs: Option<Rat>,
    pub rhs: Option<Rat>,
}

impl Condition3Report {
    /// Re-evaluates the witness: a failing report is sound iff `lhs > rhs`
    /// and the stored sides match.
    pub fn witness_is_sound(&self, o: &PartialIsometry) -> Result<bool> {
        match (&self.witness, &self.lhs, &self.rhs) {
            (Some(w), Some(l), Some(r)) if !self.holds && w.len() == self.n => {
                let (lhs, rhs) = evaluate_condition3(o, w)?;
                Ok(lhs > rhs && &lhs == l && &rhs == r)
            }
            _ => Ok(false),
        }
    }
}

/// Maximizes `u . x` over `x ∈ C` with `‖(x, 0, ..., 0) + N‖_{E0} <= 1`.
/// Returns the value, `x`, and the coefficients of the `N` component.
fn lifted_max(ext: &CyclicExtension, d: usize, u: &[Rat]) -> (Rat, QVec, QVec) {
    let verts = ext.sum.vertices();
    let (m, t) = (verts.len(), ext.generators.len());
    let width = d + t + 2 * m;
    let mut lp = LinearProgram::new(width);
    let mut objective = zeros(width);
    objective[..d].clone_from_slice(u);
    lp.set_objective(objective);
    for j in d + t..width {
        lp.set_nonneg(j);
    }
    // (x, 0, ...) + Σ t_j gen_j - Σ (l+ - l-) v = 0
    for row in 0..ext.sum.dim() {
        let mut coeffs = zeros(width);
        if row < d {
            coeffs[row] = Rat::one();
        }
        for (j, g) in ext.generators.iter().enumerate() {
            coeffs[d + j] = g[row].clone();
        }
        for (k, v) in verts.iter().enumerate() {
            coeffs[d + t + k] = -&v[row];
            coeffs[d + t + m + k] = v[row].clone();
        }
        lp.add_eq(coeffs, Rat::zero());
    }
    let mut budget = zeros(width);
    for c in budget.iter_mut().skip(d + t) {
        *c = Rat::one();
    }
    lp.add_le(budget, Rat::one());
    let out = lp_max(&lp);
    assert_eq!(out.status, LpStatus::Optimal, "quotient ball of a norm is bounded");
    let point = out.point.expect("optimal");
    (out.value.expect("optimal"), point[..d].to_vec(), point[d..d + t].to_vec())
}

/// Decides the cycle inequality at `n` through the isometric-embedding test on
/// the cyclic extension; on failure, decodes a violating tuple.
pub fn check_condition3(o: &PartialIsometry, n: usize) -> Result<Condition3Report> {
    let ext = cyclic_extension(o, n)?;
    let c = o.space();
    let Some(defect) = embedding_defect(c, &ext.space, &ext.embed)? else {
        return Ok(Condition3Report { n, holds: true, witness: None, lhs: None, rhs: None });
    };
    let d = c.dim();
    let coeffs = match defect {
        // (x, 0, ..., 0) ∈ N: solve Σ t_j gen_j = -(x, 0, ..., 0).
        EmbeddingDefect::NotInjective(x) => {
            let gens = QMat::from_cols(n * d, &ext.generators)?;
            let mut target = zeros(n * d);
            target[..d].clone_from_slice(&neg(&x));
            solve(&gens, &target)?.expect("kernel of the embedding lies in N")
        }
        _ => c
            .facets()
            .iter()
            .map(|u| lifted_max(&ext, d, u))
            .find(|(value, _, _)| *value > Rat::one())
            .map(|(_, _, t)| t)
            .expect("a shrinking quotient embedding shrinks some facet direction"),
    };
    let k = o.dom().dim();
    let tuple: Vec<QVec> = (0..n).map(|i| coeffs[i * k..(i + 1) * k].to_vec()).collect();
    let (lhs, rhs) = evaluate_condition3(o, &tuple)?;
    assert!(lhs > rhs, "decoded tuple violates the cycle inequality");
    Ok(Condition3Report { n, holds: false, witness: Some(tuple), lhs: Some(lhs), rhs: Some(rhs) })
}

/// A positive verdict: `o` extends into `system` with `auto^n = id`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionCertificate {
    pub partiso: PartialIsometry,
    pub n: usize,
    pub system: IsometrySystem,
}

impl ExtensionCertificate {
    pub fn verify(&self) -> Result<bool> {
        if !validate(&self.partiso).is_valid() || self.n == 0 || !self.n.is_multiple_of(self.system.order) {
            return Ok(false);
        }
        self.system.verifies(&self.partiso)
    }
}

/// Least `n <= n_max` at which the cycle inequality holds, with the extension
/// built at that `n`; `None` means unknown up to `n_max`.
pub fn search_extendability(o: &PartialIsometry, n_max: usize) -> Result<Option<ExtensionCertificate>> {
    for n in 1..=n_max {
        if check_condition3(o, n)?.holds {
            let system = cyclic_extension(o, n)?.into_system()?;
            return Ok(Some(ExtensionCertificate { partiso: o.clone(), n, system }));
        }
    }
    Ok(None)
}

/// Result of amalgamating two extensions of a system over it.
#[derive(Clone, Debug)]
pub struct Amalgam {
    pub partiso: PartialIsometry,
    /// `C_2 -> C_4`.
    pub left: LinearMap,
    /// `C_3 -> C_4`.
    pub right: LinearMap,
}

fn check_equivariant(sys: &IsometrySystem, o: &PartialIsometry, j: &LinearMap, which: &str) -> Result<()> {
    if !is_isometric_embedding(&sys.space, o.space(), j)? {
        let witness = embedding_defect(&sys.space, o.space(), j)?.map(|d| d.witness().clone()).unwrap_or_default();
        return Err(Error::Embedding { reason: format!("{which} is not an isometric embedding"), witness });
    }
    for e in Subspace::full(sys.space.dim()).basis() {
        let je = j.apply(e);
        let witness = || e.clone();
        let Some(fje) = o.apply(&je) else {
            return Err(Error::Embedding { reason: format!("{which} does not land in the domain"), witness: witness() });
        };
        if fje != j.apply(&sys.auto.apply(e)) {
            return Err(Error::Embedding { reason: format!("{which} is not equivariant"), witness: witness() });
        }
    }
    Ok(())
}

/// Amalgamates `o2 ⊇ j(E)` and `o3 ⊇ k(E)` over the system `(E, g)`:
/// `C_4 = (C_2 ⊕_1 C_3) / {(j(e), -k(e))}` with `f_4 = f_2 ⊕ f_3` on
/// `A_4 = span(A_2 ∪ A_3)`.
pub fn amalgamate(
    sys: &IsometrySystem,
    o2: &PartialIsometry,
    j: &LinearMap,
    o3: &PartialIsometry,
    k: &LinearMap,
) -> Result<Amalgam> {
    if !is_surjective_isometry(&sys.space, &sys.auto) {
        return Err(Error::NotAnIsometry);
    }
    check_equivariant(sys, o2, j, "left embedding")?;
    check_equivariant(sys, o3, k, "right embedding")?;
    let (d2, d3, e) = (o2.space().dim(), o3.space().dim(), sys.space.dim());
    let sum = l1_sum(o2.space(), o3.space());
    let glue: Vec<QVec> = (0..e)
        .map(|i| {
            let x = unit(e, i);
            j.apply(&x).into_iter().chain(neg(&k.apply(&x))).collect()
        })
        .collect();
    let q = quotient_space(&sum, &Subspace::span(d2 + d3, &glue)?)?;
    let p = q.projection;
    let left = LinearMap::new(p.matrix().matmul(&QMat::from_cols(d2 + d3, &(0..d2).map(|i| unit(d2 + d3, i)).collect::<Vec<_>>())?));
    let right =
        LinearMap::new(p.matrix().matmul(&QMat::from_cols(d2 + d3, &(0..d3).map(|i| unit(d2 + d3, d2 + i)).collect::<Vec<_>>())?));

    // f_4 on the images of the two domain bases.
    let mut sources: Vec<QVec> = Vec::new();
    let mut targets: Vec<QVec> = Vec::new();
    for (idx, a) in o2.dom().basis().iter().enumerate() {
        sources.push(left.apply(a));
        targets.push(left.apply(&o2.apply_coords(&unit(o2.dom().dim(), idx))));
    }
    for (idx, a) in o3.dom().basis().iter().enumerate() {
        sources.push(right.apply(a));
        targets.push(right.apply(&o3.apply_coords(&unit(o3.dom().dim(), idx))));
    }
    let c4 = q.space;
    let dim4 = c4.dim();
    let a4 = Subspace::span(dim4, &sources)?;
    let b4 = Subspace::span(dim4, &targets)?;
    let chosen = crate::arith::independent_subset(&sources, dim4);
    let image_of = |x: &QVec| -> QVec {
        let coords = a4.coordinates(x).expect("inside A_4");
        let mut y = zeros(dim4);
        for (c, &i) in coords.iter().zip(&chosen) {
            y = add(&y, &crate::arith::scale(&targets[i], c));
        }
        y
    };
    // a4 was built greedily from `sources`, so its basis is `sources[chosen]`.
    for (s, t) in sources.iter().zip(&targets) {
        if &image_of(s) != t {
            return Err(Error::Embedding { reason: "amalgamated map is not well defined".into(), witness: s.clone() });
        }
    }
    let images: Vec<QVec> = a4.basis().iter().map(image_of).collect();
    let partiso = PartialIsometry::from_images(c4, a4, b4, &images)?;
    Ok(Amalgam { partiso, left, right })
}

/// `E_0 = C`, `E_{v+1} = f⁻¹(B ∩ E_v)` until stable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventualCore {
    pub core: Subspace,
    /// `f` restricted to the core, in core-basis coordinates.
    pub restricted: LinearMap,
    /// Least `v` with `E_{v+1} = E_v`.
    pub steps: usize,
}

pub fn eventual_core(o: &PartialIsometry) -> Result<EventualCore> {
    let d = o.space().dim();
    let mut current = Subspace::full(d);
    let mut steps = 0;
    loop {
        let next = o.preimage(&current);
        if next.same_span(&current) {
            break;
        }
        current = next;
        steps += 1;
        debug_assert!(steps <= d);
    }
    let images: Vec<QVec> = current
        .basis()
        .iter()
        .map(|x| {
            let fx = o.apply(x).expect("core lies in the domain");
            current.coordinates(&fx).expect("core is invariant")
        })
        .collect();
    let restricted = LinearMap::new(QMat::from_cols(current.dim(), &images)?);
    Ok(EventualCore { core: current, restricted, steps })
}

impl EventualCore {
    /// The restricted map is a surjective isometry of the induced norm.
    pub fn verify(&self, o: &PartialIsometry) -> Result<bool> {
        let induced = subspace_space(o.space(), &self.core)?;
        Ok(is_surjective_isometry(&induced, &self.restricted))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, ivec, qvec, rat};

    fn rotation() -> LinearMap {
        LinearMap::new(QMat::from_rows(2, &[ivec(&[0, -1]), ivec(&[1, 0])]).unwrap())
    }

    fn full(g: &LinearMap) -> PartialIsometry {
        PartialIsometry::restriction(PolySpace::l1(2), g, Subspace::full(2)).unwrap()
    }

    #[test]
    fn fixture_shape() {
        let o = gurarii_counterexample();
        assert_eq!(o.dom().basis(), &[ivec(&[1, 0])]);
        assert_eq!(o.ran().basis(), &[ivec(&[1, 1])]);
        assert_eq!(o.map()[(0, 0)], rat(1, 2));
        assert_eq!(o.space().norm(&o.apply(&ivec(&[1, 0])).unwrap()).unwrap(), int(1));
    }

    #[test]
    fn identity_at_one_is_trivial() {
        let o = full(&LinearMap::identity(2));
        let ext = cyclic_extension(&o, 1).unwrap();
        assert_eq!(ext.space.dim(), 2);
        assert!(ext.auto.is_identity());
        assert!(is_isometric_embedding(o.space(), &ext.space, &ext.embed).unwrap());
        assert!(check_condition3(&o, 1).unwrap().holds);
    }

    #[test]
    fn counterexample_at_two() {
        let o = gurarii_counterexample();
        let ext = cyclic_extension(&o, 2).unwrap();
        assert_eq!(ext.space.dim(), 2);
        assert!(ext.auto.pow(2).is_identity());
        let x = qvec(&[(3, 4), (-1, 4)]);
        assert_eq!(o.space().norm(&x).unwrap(), int(1));
        assert!(ext.space.norm(&ext.embed.apply(&x)).unwrap() <= rat(1, 2));
        assert!(!is_isometric_embedding(o.space(), &ext.space, &ext.embed).unwrap());
    }

    #[test]
    fn counterexample_at_three() {
        let o = gurarii_counterexample();
        let report = check_condition3(&o, 3).unwrap();
        assert!(!report.holds);
        assert!(report.witness_is_sound(&o).unwrap());
        let tuple = vec![ivec(&[1]), qvec(&[(1, 2)]), qvec(&[(1, 4)])];
        assert_eq!(evaluate_condition3(&o, &tuple).unwrap(), (int(1), rat(3, 4)));
    }

    #[test]
    fn rotation_extends_at_four_only() {
        let o = full(&rotation());
        let report = check_condition3(&o, 2).unwrap();
        assert!(!report.holds);
        assert!(report.witness_is_sound(&o).unwrap());
        assert_eq!(evaluate_condition3(&o, &[ivec(&[1, 0]), ivec(&[0, 1])]).unwrap(), (int(2), int(0)));

        let ext = cyclic_extension(&o, 4).unwrap();
        assert!(ext.auto.pow(4).is_identity());
        assert!(is_isometric_embedding(o.space(), &ext.space, &ext.embed).unwrap());

        let cert = search_extendability(&o, 6).unwrap().unwrap();
        assert_eq!(cert.n, 4);
        assert!(cert.verify().unwrap());
    }

    #[test]
    fn search_examples() {
        let id = full(&LinearMap::identity(2));
        assert_eq!(search_extendability(&id, 3).unwrap().unwrap().n, 1);
        assert!(search_extendability(&gurarii_counterexample(), 4).unwrap().is_none());
    }

    #[test]
    fn core_examples() {
        let core = eventual_core(&gurarii_counterexample()).unwrap();
        assert_eq!((core.core.dim(), core.steps), (0, 2));

        let o = full(&rotation());
        let core = eventual_core(&o).unwrap();
        assert_eq!((core.core.dim(), core.steps), (2, 0));
        assert!(core.verify(&o).unwrap());

        let line = Subspace::new(2, vec![ivec(&[1, 0])]).unwrap();
        let o = PartialIsometry::identity_on(PolySpace::l1(2), line.clone()).unwrap();
        let core = eventual_core(&o).unwrap();
        assert!(core.core.same_span(&line));
        assert_eq!(core.steps, 1);
        assert!(core.verify(&o).unwrap());
    }

    #[test]
    fn amalgamation_over_trivial_space() {
        let line = PolySpace::l1(1);
        let o = PartialIsometry::identity_on(line.clone(), Subspace::full(1)).unwrap();
        let sys = IsometrySystem::trivial(PolySpace::l1(0));
        let j = LinearMap::new(QMat::zeros(1, 0));
        let am = amalgamate(&sys, &o, &j, &o, &j).unwrap();
        assert_eq!(am.partiso.space(), &PolySpace::l1(2));
        assert!(crate::partiso::validate(&am.partiso).is_valid());
    }

    #[test]
    fn amalgamation_collapses_doubled_copy() {
        let c = PolySpace::l1(2);
        let o = full(&LinearMap::identity(2));
        let sys = IsometrySystem::trivial(c.clone());
        let id = LinearMap::identity(2);
        let am = amalgamate(&sys, &o, &id, &o, &id).unwrap();
        assert_eq!(am.partiso.space().dim(), 2);
        assert!(is_isometric_embedding(&c, am.partiso.space(), &am.left).unwrap());
        assert!(am.left.is_injective());
        assert_eq!(am.left.compose(&id), am.right.compose(&id));
    }

    #[test]
    fn amalgamation_rejects_non_equivariant_input() {
        let c = PolySpace::l1(2);
        let sys = IsometrySystem::on_space(c.clone(), rotation()).unwrap();
        let o = full(&LinearMap::identity(2));
        let id = LinearMap::identity(2);
        assert!(matches!(amalgamate(&sys, &o, &id, &o, &id), Err(Error::Embedding { .. })));
    }
}
