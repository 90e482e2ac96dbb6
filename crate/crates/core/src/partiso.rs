//! Partial isometries `f : A -> B` inside a polyhedral space, the finite-order
//! systems `(E, g)` they may embed into, and the norm-free linear extension.

use std::fmt;

use num::Zero;

use crate::arith::{complete_with_standard, rank, unit, zeros, QMat, QVec, Rat};
use crate::error::{Error, Result};
use crate::space::{
    embedding_defect, is_surjective_isometry, isometry_order, subspace_space, EmbeddingDefect, LinearMap, PolySpace,
    Subspace,
};

/// `f : A -> B` with `A`, `B` subspaces of `space`. `map` sends coordinates in
/// the domain basis to coordinates in the range basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialIsometry {
    space: PolySpace,
    dom: Subspace,
    ran: Subspace,
    map: QMat,
}

/// The first invariant a candidate partial isometry violates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DomainNotInSpace { ambient_dim: usize },
    RangeNotInSpace { ambient_dim: usize },
    MapShape { rows: usize, cols: usize },
    Singular { witness: QVec },
    NotIsometric { witness: QVec, source_norm: Rat, image_norm: Rat },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::arith::{format_rat, format_vec};
        match self {
            Violation::DomainNotInSpace { ambient_dim } => {
                write!(f, "domain lives in dimension {ambient_dim}, not in the space")
            }
            Violation::RangeNotInSpace { ambient_dim } => {
                write!(f, "range lives in dimension {ambient_dim}, not in the space")
            }
            Violation::MapShape { rows, cols } => write!(f, "map is {rows}x{cols}, not square of size dim A = dim B"),
            Violation::Singular { witness } => write!(f, "map is not injective: kills {}", format_vec(witness)),
            Violation::NotIsometric { witness, source_norm, image_norm } => write!(
                f,
                "map is not isometric at {}: norm {} maps to norm {}",
                format_vec(witness),
                format_rat(source_norm),
                format_rat(image_norm)
            ),
        }
    }
}

fn find_violation(space: &PolySpace, dom: &Subspace, ran: &Subspace, map: &QMat) -> Result<Option<Violation>> {
    if dom.ambient_dim() != space.dim() {
        return Ok(Some(Violation::DomainNotInSpace { ambient_dim: dom.ambient_dim() }));
    }
    if ran.ambient_dim() != space.dim() {
        return Ok(Some(Violation::RangeNotInSpace { ambient_dim: ran.ambient_dim() }));
    }
    if map.rows() != ran.dim() || map.cols() != dom.dim() || dom.dim() != ran.dim() {
        return Ok(Some(Violation::MapShape { rows: map.rows(), cols: map.cols() }));
    }
    let a = subspace_space(space, dom)?;
    let b = subspace_space(space, ran)?;
    let to_ambient = |coords: &[Rat]| dom.basis_matrix().mul_vec(coords);
    let image_ambient = |coords: &[Rat]| ran.basis_matrix().mul_vec(&map.mul_vec(coords));
    Ok(match embedding_defect(&a, &b, &LinearMap::new(map.clone()))? {
        None => None,
        Some(EmbeddingDefect::NotInjective(k)) => Some(Violation::Singular { witness: to_ambient(&k) }),
        Some(defect) => {
            let x = defect.witness();
            Some(Violation::NotIsometric {
                witness: to_ambient(x),
                source_norm: space.norm(&to_ambient(x))?,
                image_norm: space.norm(&image_ambient(x))?,
            })
        }
    })
}

impl PartialIsometry {
    pub fn new(space: PolySpace, dom: Subspace, ran: Subspace, map: QMat) -> Result<Self> {
        if let Some(v) = find_violation(&space, &dom, &ran, &map)? {
            return Err(Error::InvalidPartialIsometry(v.to_string()));
        }
        Ok(PartialIsometry { space, dom, ran, map })
    }

    /// Skips validation; [`validate`] reports what is wrong, if anything.
    pub fn new_unchecked(space: PolySpace, dom: Subspace, ran: Subspace, map: QMat) -> Self {
        PartialIsometry { space, dom, ran, map }
    }

    /// Builds `f` from the images `f(dom_i)` given in ambient coordinates.
    pub fn from_images(space: PolySpace, dom: Subspace, ran: Subspace, images: &[QVec]) -> Result<Self> {
        if images.len() != dom.dim() {
            return Err(Error::DimensionMismatch { expected: dom.dim(), found: images.len() });
        }
        let cols = images
            .iter()
            .map(|y| ran.coordinates(y).ok_or_else(|| Error::InvalidPartialIsometry("image outside the range".into())))
            .collect::<Result<Vec<QVec>>>()?;
        let map = QMat::from_cols(ran.dim(), &cols)?;
        Self::new(space, dom, ran, map)
    }

    /// The identity on a subspace.
    pub fn identity_on(space: PolySpace, dom: Subspace) -> Result<Self> {
        let k = dom.dim();
        Self::new(space, dom.clone(), dom, QMat::identity(k))
    }

    /// Restriction of a linear map of the space to `dom`; the range basis is
    /// the image of the domain basis.
    pub fn restriction(space: PolySpace, g: &LinearMap, dom: Subspace) -> Result<Self> {
        let images: Vec<QVec> = dom.basis().iter().map(|b| g.apply(b)).collect();
        let ran = Subspace::new(space.dim(), images)?;
        let k = dom.dim();
        Self::new(space, dom, ran, QMat::identity(k))
    }

    pub fn space(&self) -> &PolySpace {
        &self.space
    }

    pub fn dom(&self) -> &Subspace {
        &self.dom
    }

    pub fn ran(&self) -> &Subspace {
        &self.ran
    }

    pub fn map(&self) -> &QMat {
        &self.map
    }

    /// `dim C x dim A` matrix whose columns are `f(dom_i)`.
    pub fn image_matrix(&self) -> QMat {
        self.ran.basis_matrix().matmul(&self.map)
    }

    /// `f(x)` for `x` given in domain-basis coordinates.
    pub fn apply_coords(&self, coords: &[Rat]) -> QVec {
        self.image_matrix().mul_vec(coords)
    }

    /// `f(x)` for `x ∈ A` in ambient coordinates; `None` if `x ∉ A`.
    pub fn apply(&self, x: &[Rat]) -> Option<QVec> {
        self.dom.coordinates(x).map(|c| self.apply_coords(&c))
    }

    /// Ambient vector with the given domain-basis coordinates.
    pub fn dom_vector(&self, coords: &[Rat]) -> QVec {
        if self.dom.dim() == 0 {
            return zeros(self.space.dim());
        }
        self.dom.basis_matrix().mul_vec(coords)
    }

    /// `f⁻¹(S)` for a subspace `S` of the ambient space.
    pub fn preimage(&self, s: &Subspace) -> Subspace {
        let target = s.intersection(&self.ran);
        let inv = self.map.inverse().expect("validated map is invertible");
        let vectors: Vec<QVec> = target
            .basis()
            .iter()
            .map(|y| {
                let c = self.ran.coordinates(y).expect("inside the range");
                self.dom_vector(&inv.mul_vec(&c))
            })
            .collect();
        Subspace::span(self.space.dim(), &vectors).expect("uniform dimensions")
    }
}

/// Outcome of [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validation {
    pub violation: Option<Violation>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks every invariant of a partial isometry. Never fails: internal errors
/// are impossible once the shapes have been checked.
pub fn validate(o: &PartialIsometry) -> Validation {
    let violation = find_violation(&o.space, &o.dom, &o.ran, &o.map).expect("shapes checked before norm computations");
    Validation { violation }
}

/// A surjective isometry `auto` of `space` of finite order, together with an
/// isometric embedding of some `C` into `space`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsometrySystem {
    pub space: PolySpace,
    pub auto: LinearMap,
    pub embed: LinearMap,
    pub order: usize,
}

/// The first way an [`IsometrySystem`] fails to extend a partial isometry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SystemDefect {
    NotSurjectiveIsometry,
    WrongOrder { claimed: usize, actual: usize },
    EmbeddingNotIsometric(EmbeddingDefect),
    NotEquivariant { witness: QVec },
}

impl fmt::Display for SystemDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::arith::format_vec;
        match self {
            SystemDefect::NotSurjectiveIsometry => write!(f, "automorphism is not a surjective isometry"),
            SystemDefect::WrongOrder { claimed, actual } => write!(f, "claimed order {claimed}, actual order {actual}"),
            SystemDefect::EmbeddingNotIsometric(d) => {
                write!(f, "embedding is not isometric at {}", format_vec(d.witness()))
            }
            SystemDefect::NotEquivariant { witness } => {
                write!(f, "g(embed(a)) != embed(f(a)) for a = {}", format_vec(witness))
            }
        }
    }
}

impl IsometrySystem {
    /// `(C, id)` with the identity embedding.
    pub fn trivial(space: PolySpace) -> Self {
        let d = space.dim();
        IsometrySystem { space, auto: LinearMap::identity(d), embed: LinearMap::identity(d), order: 1 }
    }

    /// A surjective isometry of `space` with its order and the identity
    /// embedding.
    pub fn on_space(space: PolySpace, auto: LinearMap) -> Result<Self> {
        let order = isometry_order(&space, &auto)?;
        let d = space.dim();
        Ok(IsometrySystem { space, auto, embed: LinearMap::identity(d), order })
    }

    /// Re-checks the system against `o` from scratch.
    pub fn defect(&self, o: &PartialIsometry) -> Result<Option<SystemDefect>> {
        if !is_surjective_isometry(&self.space, &self.auto) {
            return Ok(Some(SystemDefect::NotSurjectiveIsometry));
        }
        let actual = isometry_order(&self.space, &self.auto)?;
        if actual != self.order || !self.auto.pow(self.order).is_identity() {
            return Ok(Some(SystemDefect::WrongOrder { claimed: self.order, actual }));
        }
        if let Some(d) = embedding_defect(o.space(), &self.space, &self.embed)? {
            return Ok(Some(SystemDefect::EmbeddingNotIsometric(d)));
        }
        for (i, a) in o.dom().basis().iter().enumerate() {
            let lhs = self.auto.apply(&self.embed.apply(a));
            let rhs = self.embed.apply(&o.apply_coords(&unit(o.dom().dim(), i)));
            if lhs != rhs {
                return Ok(Some(SystemDefect::NotEquivariant { witness: a.clone() }));
            }
        }
        Ok(None)
    }

    pub fn verifies(&self, o: &PartialIsometry) -> Result<bool> {
        Ok(self.defect(o)?.is_none())
    }
}

/// Extends a partial linear injection of `Q^d` to an automorphism of `Q^d'`.
///
/// `images` is `d x k` with column `i` the image of `dom.basis()[i]`. The
/// domain basis is completed by standard vectors `u_1..u_m`, the image by
/// standard vectors `z_1..z_m`, and `m` fresh coordinates `w_i` are adjoined
/// with `g(u_i) = w_i`, `g(w_i) = z_i`. Returns `(d', g)`.
pub fn linear_hrushovski_extension(d: usize, dom: &Subspace, images: &QMat) -> Result<(usize, LinearMap)> {
    if dom.ambient_dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: dom.ambient_dim() });
    }
    let k = dom.dim();
    if images.rows() != d || images.cols() != k {
        return Err(Error::DimensionMismatch { expected: k, found: images.cols() });
    }
    if rank(images) != k {
        return Err(Error::SingularMap);
    }
    if k == 0 {
        return Ok((d, LinearMap::identity(d)));
    }
    if k == d {
        let g = images.matmul(&dom.basis_matrix().inverse().expect("full basis"));
        return Ok((d, LinearMap::new(g)));
    }
    let m = d - k;
    let wide = d + m;
    let lift = |v: &[Rat]| -> QVec { v.iter().cloned().chain(std::iter::repeat_n(Rat::zero(), m)).collect() };
    let image_cols = images.col_vecs();
    let us = complete_with_standard(dom.basis(), d);
    let zs = complete_with_standard(&image_cols, d);
    debug_assert_eq!((us.len(), zs.len()), (m, m));

    let mut sources: Vec<QVec> = dom.basis().iter().map(|b| lift(b)).collect();
    let mut targets: Vec<QVec> = image_cols.iter().map(|y| lift(y)).collect();
    for (i, &u) in us.iter().enumerate() {
        sources.push(unit(wide, u));
        targets.push(unit(wide, d + i));
    }
    for (i, &z) in zs.iter().enumerate() {
        sources.push(unit(wide, d + i));
        targets.push(unit(wide, z));
    }
    let s = QMat::from_cols(wide, &sources)?;
    let t = QMat::from_cols(wide, &targets)?;
    let g = t.matmul(&s.inverse().expect("completed basis"));
    Ok((wide, LinearMap::new(g)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{int, ivec, qvec};

    fn gurarii() -> PartialIsometry {
        PartialIsometry::new(
            PolySpace::l1(2),
            Subspace::new(2, vec![ivec(&[1, 0])]).unwrap(),
            Subspace::new(2, vec![ivec(&[1, 1])]).unwrap(),
            QMat::from_rows(1, &[qvec(&[(1, 2)])]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn validate_examples() {
        let o = gurarii();
        assert!(validate(&o).is_valid());
        assert_eq!(o.apply(&ivec(&[1, 0])), Some(qvec(&[(1, 2), (1, 2)])));

        let bad = PartialIsometry::new_unchecked(o.space().clone(), o.dom().clone(), o.ran().clone(), QMat::identity(1));
        match validate(&bad).violation {
            Some(Violation::NotIsometric { witness, source_norm, image_norm }) => {
                assert_eq!(witness, ivec(&[1, 0]));
                assert_eq!((source_norm, image_norm), (int(1), int(2)));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(PartialIsometry::new(bad.space().clone(), bad.dom().clone(), bad.ran().clone(), QMat::identity(1))
            .is_err());

        let id = PartialIsometry::identity_on(PolySpace::l1(2), Subspace::full(2)).unwrap();
        assert!(validate(&id).is_valid());
    }

    #[test]
    fn validate_shape_and_singular() {
        let o = gurarii();
        let wide = PartialIsometry::new_unchecked(o.space().clone(), o.dom().clone(), o.ran().clone(), QMat::identity(2));
        assert!(matches!(validate(&wide).violation, Some(Violation::MapShape { .. })));
        let zero = PartialIsometry::new_unchecked(o.space().clone(), o.dom().clone(), o.ran().clone(), QMat::zeros(1, 1));
        assert_eq!(validate(&zero).violation, Some(Violation::Singular { witness: ivec(&[1, 0]) }));
        let elsewhere = PartialIsometry::new_unchecked(o.space().clone(), Subspace::full(3), o.ran().clone(), QMat::identity(1));
        assert!(matches!(validate(&elsewhere).violation, Some(Violation::DomainNotInSpace { ambient_dim: 3 })));
    }

    #[test]
    fn preimage_of_range_is_domain() {
        let o = gurarii();
        assert!(o.preimage(&Subspace::full(2)).same_span(o.dom()));
        assert_eq!(o.preimage(o.dom()).dim(), 0);
    }

    #[test]
    fn hrushovski_cycle() {
        let dom = Subspace::new(2, vec![ivec(&[1, 0])]).unwrap();
        let images = QMat::from_cols(2, &[ivec(&[0, 1])]).unwrap();
        let (wide, g) = linear_hrushovski_extension(2, &dom, &images).unwrap();
        assert_eq!(wide, 3);
        assert_eq!(g.apply(&ivec(&[1, 0, 0])), ivec(&[0, 1, 0]));
        assert_eq!(g.apply(&ivec(&[0, 1, 0])), ivec(&[0, 0, 1]));
        assert_eq!(g.apply(&ivec(&[0, 0, 1])), ivec(&[1, 0, 0]));
        assert!(g.pow(3).is_identity());
    }

    #[test]
    fn hrushovski_degenerate_cases() {
        let (wide, g) = linear_hrushovski_extension(3, &Subspace::zero(3), &QMat::zeros(3, 0)).unwrap();
        assert_eq!(wide, 3);
        assert!(g.is_identity());

        let j = QMat::from_rows(2, &[ivec(&[0, -1]), ivec(&[1, 0])]).unwrap();
        let (wide, g) = linear_hrushovski_extension(2, &Subspace::full(2), &j).unwrap();
        assert_eq!((wide, g.matrix()), (2, &j));

        let dom = Subspace::new(2, vec![ivec(&[1, 0])]).unwrap();
        let singular = QMat::zeros(2, 1);
        assert_eq!(linear_hrushovski_extension(2, &dom, &singular), Err(Error::SingularMap));
    }

    #[test]
    fn trivial_system_extends_identity() {
        let id = PartialIsometry::identity_on(PolySpace::l1(2), Subspace::full(2)).unwrap();
        let sys = IsometrySystem::trivial(PolySpace::l1(2));
        assert_eq!(sys.defect(&id).unwrap(), None);
        let rot = LinearMap::new(QMat::from_rows(2, &[ivec(&[0, -1]), ivec(&[1, 0])]).unwrap());
        let sys = IsometrySystem::on_space(PolySpace::l1(2), rot).unwrap();
        assert_eq!(sys.order, 4);
        assert!(matches!(sys.defect(&id).unwrap(), Some(SystemDefect::NotEquivariant { .. })));
    }
}
