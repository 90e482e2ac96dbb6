//! Finitely supported sequences `Z -> C` under the shift, and the quotient
//! norm modulo the span of the two-term vectors
//! `(..., 0, -f(a), a, 0, ...)` (value `a` at `r`, `-f(a)` at `r - 1`).
//!
//! The quotient norm of a sequence supported in `[k, l]` can be computed with
//! correction terms supported in the same window, which keeps it a single
//! finite linear program.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::arith::{is_zero, sub, zeros, QVec, Rat};
use crate::error::{Error, Result};
use crate::lp::{lp_min, LinearProgram, LpStatus};
use crate::partiso::PartialIsometry;
use crate::space::{LinearMap, PolySpace};

/// A finitely supported sequence of vectors of `space`; only nonzero values
/// are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinSupportSeq {
    space: PolySpace,
    entries: BTreeMap<i64, QVec>,
}

impl FinSupportSeq {
    pub fn new(space: PolySpace) -> Self {
        FinSupportSeq { space, entries: BTreeMap::new() }
    }

    pub fn from_entries(space: PolySpace, entries: impl IntoIterator<Item = (i64, QVec)>) -> Result<Self> {
        let mut seq = Self::new(space);
        for (k, v) in entries {
            seq.set(k, v)?;
        }
        Ok(seq)
    }

    /// Sets the value at `index`; a zero value clears it.
    pub fn set(&mut self, index: i64, value: QVec) -> Result<()> {
        if value.len() != self.space.dim() {
            return Err(Error::DimensionMismatch { expected: self.space.dim(), found: value.len() });
        }
        if is_zero(&value) {
            self.entries.remove(&index);
        } else {
            self.entries.insert(index, value);
        }
        Ok(())
    }

    pub fn space(&self) -> &PolySpace {
        &self.space
    }

    pub fn entries(&self) -> &BTreeMap<i64, QVec> {
        &self.entries
    }

    pub fn get(&self, index: i64) -> QVec {
        self.entries.get(&index).cloned().unwrap_or_else(|| zeros(self.space.dim()))
    }

    pub fn support(&self) -> Option<(i64, i64)> {
        Some((*self.entries.keys().next()?, *self.entries.keys().next_back()?))
    }

    pub fn sub(&self, other: &FinSupportSeq) -> FinSupportSeq {
        let mut out = self.clone();
        for (&k, v) in &other.entries {
            out.set(k, sub(&self.get(k), v)).expect("same space");
        }
        out
    }
}

/// `Σ_k ‖a(k)‖`.
pub fn d_norm(a: &FinSupportSeq) -> Result<Rat> {
    let mut total = Rat::zero();
    for v in a.entries.values() {
        total += a.space.norm(v)?;
    }
    Ok(total)
}

/// `(shift a)(k) = a(k - 1)`.
pub fn shift(a: &FinSupportSeq) -> FinSupportSeq {
    FinSupportSeq { space: a.space.clone(), entries: a.entries.iter().map(|(&k, v)| (k + 1, v.clone())).collect() }
}

/// `inf ‖a + η‖` over `η` in the span of window-supported generators, with
/// `images[b] = f(dom_basis[b])`.
///
/// Each position's value `(a + η)(r)` is written as `Σ_j (λ⁺ - λ⁻)_{r,j} v_j`
/// over the ball's vertices, and `Σ (λ⁺ + λ⁻)` is minimized, so only
/// `width * dim` equality rows are needed and no facets.
fn quotient_lp(a: &FinSupportSeq, dom_basis: &[QVec], images: &[QVec], k: i64, l: i64) -> Result<Rat> {
    if let Some((lo, hi)) = a.support() {
        for index in [lo, hi] {
            if index < k || index > l {
                return Err(Error::OutsideWindow { index, lo: k, hi: l });
            }
        }
    }
    if k > l {
        return Ok(Rat::zero());
    }
    let c = &a.space;
    let dim = c.dim();
    let vertices = c.vertices();
    let positions = (l - k + 1) as usize;
    let per_position = 2 * vertices.len();
    let gens = dom_basis.len();
    // variables: λ± per position and vertex, then t_{r,b} for r in k+1..=l
    let lambda = |pos: usize, j: usize, sign: usize| pos * per_position + 2 * j + sign;
    let t_start = positions * per_position;
    let t_index = |r: i64, b: usize| t_start + (r - k - 1) as usize * gens + b;
    let total = t_start + (positions - 1) * gens;

    let mut objective = zeros(total);
    for x in objective.iter_mut().take(t_start) {
        *x = Rat::one();
    }
    let mut lp = LinearProgram::new(total).minimize(objective);
    for v in 0..t_start {
        lp.set_nonneg(v);
    }
    for r in k..=l {
        let pos = (r - k) as usize;
        let value = a.get(r);
        for i in 0..dim {
            // Σ λ v - η(r) = a(r), with η(r) = Σ_b t_{r,b} dom_b - Σ_b t_{r+1,b} f(dom_b)
            let mut row = zeros(total);
            for (j, v) in vertices.iter().enumerate() {
                row[lambda(pos, j, 0)] = v[i].clone();
                row[lambda(pos, j, 1)] = -&v[i];
            }
            if r > k {
                for (b, basis) in dom_basis.iter().enumerate() {
                    row[t_index(r, b)] = -&basis[i];
                }
            }
            if r < l {
                for (b, img) in images.iter().enumerate() {
                    row[t_index(r + 1, b)] = img[i].clone();
                }
            }
            lp.add_eq(row, value[i].clone());
        }
    }
    let out = lp_min(&lp);
    match out.status {
        LpStatus::Optimal => Ok(out.value.expect("optimal")),
        _ => unreachable!("the quotient program is feasible and bounded below by zero"),
    }
}

/// Quotient norm of `a` modulo the span of generators supported in
/// `[k, l]`, with `f = f_1` from `o`.
pub fn windowed_quotient_norm(a: &FinSupportSeq, o: &PartialIsometry, k: i64, l: i64) -> Result<Rat> {
    if o.space() != a.space() {
        return Err(Error::InvalidPartialIsometry("partial isometry lives in a different space".into()));
    }
    let images = o.image_matrix().col_vecs();
    quotient_lp(a, o.dom().basis(), &images, k, l)
}

/// The inclusion `c ↦ (..., 0, c, 0, ...)` at index 0.
pub fn embed_at_zero(space: &PolySpace, c: &[Rat]) -> FinSupportSeq {
    let mut seq = FinSupportSeq::new(space.clone());
    seq.set(0, c.to_vec()).expect("dimension of the space");
    seq
}

/// `shift(j(a))` and `j(f(a))` agree in the quotient for each sample `a ∈ A`.
pub fn check_shift_equivariance(o: &PartialIsometry, samples: &[QVec]) -> Result<bool> {
    let f = LinearMap::new(o.image_matrix());
    check_shift_equivariance_against(o, |a| f.apply(&o.dom().coordinates(a).expect("sample lies in A")), samples)
}

/// As [`check_shift_equivariance`], but comparing against an arbitrary
/// candidate `h` for `f` while the quotient is still formed with `o`'s `f`.
pub fn check_shift_equivariance_against(
    o: &PartialIsometry,
    h: impl Fn(&[Rat]) -> QVec,
    samples: &[QVec],
) -> Result<bool> {
    for a in samples {
        if !o.dom().contains(a) {
            return Err(Error::InvalidPartialIsometry("sample outside the domain".into()));
        }
        let shifted = shift(&embed_at_zero(o.space(), a));
        let mapped = embed_at_zero(o.space(), &h(a));
        let diff = shifted.sub(&mapped);
        if !windowed_quotient_norm(&diff, o, 0, 1)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, ivec, neg};
    use crate::extension::gurarii_counterexample;
    use crate::space::Subspace;

    fn seq(entries: &[(i64, &[i64])]) -> FinSupportSeq {
        FinSupportSeq::from_entries(PolySpace::l1(2), entries.iter().map(|&(k, v)| (k, ivec(v)))).unwrap()
    }

    #[test]
    fn d_norm_examples() {
        assert_eq!(d_norm(&seq(&[])).unwrap(), int(0));
        assert_eq!(d_norm(&seq(&[(0, &[1, 0])])).unwrap(), int(1));
        assert_eq!(d_norm(&seq(&[(0, &[1, 0]), (5, &[0, -2])])).unwrap(), int(3));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(shift(&seq(&[])), seq(&[]));
        assert_eq!(shift(&seq(&[(0, &[1, 2])])), seq(&[(1, &[1, 2])]));
        let s = seq(&[(-2, &[1, 3]), (4, &[0, -2])]);
        assert_eq!(d_norm(&shift(&s)).unwrap(), d_norm(&s).unwrap());
    }

    #[test]
    fn zero_values_are_not_stored() {
        let s = seq(&[(3, &[0, 0])]);
        assert!(s.entries().is_empty());
        assert_eq!(s.support(), None);
    }

    #[test]
    fn window_examples() {
        let o = gurarii_counterexample();
        let c = ivec(&[3, -1]);
        assert_eq!(windowed_quotient_norm(&embed_at_zero(o.space(), &c), &o, 0, 0).unwrap(), int(4));

        let v = ivec(&[2, 0]);
        let fv = o.apply(&v).unwrap();
        let generator = FinSupportSeq::from_entries(o.space().clone(), [(-1, neg(&fv)), (0, v)]).unwrap();
        assert_eq!(windowed_quotient_norm(&generator, &o, -1, 0).unwrap(), int(0));

        let e1 = embed_at_zero(o.space(), &ivec(&[1, 0]));
        assert_eq!(windowed_quotient_norm(&e1, &o, 0, 0).unwrap(), int(1));
        assert_eq!(windowed_quotient_norm(&e1, &o, -3, 3).unwrap(), int(1));
    }

    #[test]
    fn window_must_cover_support() {
        let o = gurarii_counterexample();
        let s = seq(&[(2, &[1, 0])]);
        assert_eq!(windowed_quotient_norm(&s, &o, 0, 1), Err(Error::OutsideWindow { index: 2, lo: 0, hi: 1 }));
    }

    #[test]
    fn equivariance_examples() {
        let o = gurarii_counterexample();
        assert!(check_shift_equivariance(&o, &[ivec(&[1, 0])]).unwrap());
        assert!(check_shift_equivariance(&o, &[ivec(&[0, 0])]).unwrap());
        // f(t, 0) = (t, t) is not isometric; the coset difference is nonzero.
        let corrupted = |a: &[Rat]| vec![a[0].clone(), a[0].clone()];
        assert!(!check_shift_equivariance_against(&o, corrupted, &[ivec(&[1, 0])]).unwrap());
    }

    #[test]
    fn full_isometry_sequences() {
        let g = LinearMap::new(crate::arith::QMat::from_rows(2, &[ivec(&[0, -1]), ivec(&[1, 0])]).unwrap());
        let o = PartialIsometry::restriction(PolySpace::l1(2), &g, Subspace::full(2)).unwrap();
        let s = seq(&[(0, &[1, 0]), (1, &[0, 1])]);
        // (e1 at 0, e2 at 1) ≡ (e1 + J e2, 0) at index 0, and J e2 = -e1.
        assert_eq!(windowed_quotient_norm(&s, &o, 0, 1).unwrap(), int(0));
    }
}
