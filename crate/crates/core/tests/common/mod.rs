//! Seeded random instances shared by the integration tests and the
//! acceptance run.
#![allow(dead_code)]

use num::{One, Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use polyiso::arith::{dot, int, rank, rat, QMat, QVec, Rat};
use polyiso::lp::{lp_min, LinearProgram, LpStatus};
use polyiso::partiso::PartialIsometry;
use polyiso::space::{LinearMap, PolySpace, Subspace};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rat(r: &mut impl Rng) -> Rat {
    let n = r.gen_range(-4i64..=4);
    let d = r.gen_range(1i64..=3);
    rat(n, d)
}

pub fn small_int(r: &mut impl Rng, bound: i64) -> Rat {
    int(r.gen_range(-bound..=bound))
}

pub fn rat_vec(r: &mut impl Rng, dim: usize) -> QVec {
    (0..dim).map(|_| small_rat(r)).collect()
}

pub fn nonzero_rat_vec(r: &mut impl Rng, dim: usize) -> QVec {
    loop {
        let v = rat_vec(r, dim);
        if v.iter().any(|x| !x.is_zero()) {
            return v;
        }
    }
}

fn spans(dim: usize, vs: &[QVec]) -> bool {
    rank(&QMat::from_rows(dim, vs).unwrap()) == dim
}

/// `count` random points that span `Q^dim`.
pub fn spanning_points(r: &mut impl Rng, dim: usize, count: usize) -> Vec<QVec> {
    assert!(count >= dim);
    loop {
        let pts: Vec<QVec> = (0..count).map(|_| nonzero_rat_vec(r, dim)).collect();
        if spans(dim, &pts) {
            return pts;
        }
    }
}

/// A random polyhedral space with at most `max_pairs` generator pairs.
pub fn random_space(r: &mut impl Rng, dim: usize, max_pairs: usize) -> PolySpace {
    let count = r.gen_range(dim..=max_pairs.max(dim));
    PolySpace::from_vertices(dim, spanning_points(r, dim, count)).unwrap()
}

/// Independent vectors with small integer entries.
pub fn independent(r: &mut impl Rng, dim: usize, k: usize) -> Vec<QVec> {
    loop {
        let vs: Vec<QVec> = (0..k).map(|_| (0..dim).map(|_| small_int(r, 2)).collect()).collect();
        if k == 0 || rank(&QMat::from_rows(dim, &vs).unwrap()) == k {
            return vs;
        }
    }
}

pub fn invertible(r: &mut impl Rng, dim: usize) -> QMat {
    QMat::from_cols(dim, &independent(r, dim, dim)).unwrap()
}

fn m(rows: &[&[i64]]) -> QMat {
    let cols = rows.first().map_or(0, |x| x.len());
    QMat::from_rows(cols, &rows.iter().map(|x| x.iter().map(|&v| int(v)).collect()).collect::<Vec<_>>()).unwrap()
}

/// Integer matrices of known finite order, by dimension.
pub fn finite_order_maps(dim: usize) -> Vec<(QMat, usize)> {
    match dim {
        1 => vec![(m(&[&[1]]), 1), (m(&[&[-1]]), 2)],
        2 => vec![
            (m(&[&[1, 0], &[0, 1]]), 1),
            (m(&[&[0, 1], &[1, 0]]), 2),
            (m(&[&[-1, 0], &[0, -1]]), 2),
            (m(&[&[0, -1], &[1, -1]]), 3),
            (m(&[&[0, -1], &[1, 0]]), 4),
            (m(&[&[1, -1], &[1, 0]]), 6),
        ],
        3 => vec![
            (m(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]), 1),
            (m(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, -1]]), 2),
            (m(&[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]]), 3),
            (m(&[&[0, -1, 0], &[1, 0, 0], &[0, 0, 1]]), 4),
            (m(&[&[0, -1, 0], &[1, 0, 0], &[0, 0, -1]]), 4),
            (m(&[&[0, 0, -1], &[1, 0, 0], &[0, 1, 0]]), 6),
            (m(&[&[0, -1, 0], &[1, -1, 0], &[0, 0, -1]]), 6),
        ],
        _ => unreachable!("corpus dimensions are 1..=3"),
    }
}

/// A partial isometry obtained by restricting a surjective isometry of
/// known finite order; returns it with that order.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub partiso: PartialIsometry,
    pub full: LinearMap,
    pub order: usize,
}

pub fn corpus_entry(r: &mut impl Rng) -> CorpusEntry {
    let dim = r.gen_range(1..=3);
    let maps = finite_order_maps(dim);
    let (t, order) = maps[r.gen_range(0..maps.len())].clone();
    let conj = invertible(r, dim);
    let conj_inv = conj.inverse().unwrap();
    let g = conj.matmul(&t).matmul(&conj_inv);
    let seeds = r.gen_range(1..=2);
    let mut pts: Vec<QVec> = Vec::new();
    for _ in 0..seeds {
        let mut p = nonzero_rat_vec(r, dim);
        for _ in 0..order {
            pts.push(conj.mul_vec(&p));
            p = t.mul_vec(&p);
        }
    }
    if !spans(dim, &pts) {
        for i in 0..dim {
            let mut p = polyiso::arith::unit(dim, i);
            for _ in 0..order {
                pts.push(conj.mul_vec(&p));
                p = t.mul_vec(&p);
            }
        }
    }
    let space = PolySpace::from_vertices(dim, pts).unwrap();
    let k = r.gen_range(0..=dim);
    let dom = Subspace::new(dim, independent(r, dim, k)).unwrap();
    let full = LinearMap::new(g);
    let partiso = PartialIsometry::restriction(space, &full, dom).unwrap();
    CorpusEntry { partiso, full, order }
}

pub fn corpus(seed: u64, count: usize) -> Vec<CorpusEntry> {
    let mut r = rng(seed);
    (0..count).map(|_| corpus_entry(&mut r)).collect()
}

/// `f` on a one-dimensional domain: `a ↦ b ‖a‖ / ‖b‖` for random `a`, `b`.
pub fn random_line_partiso(r: &mut impl Rng, dim: usize, max_pairs: usize) -> PartialIsometry {
    let space = random_space(r, dim, max_pairs);
    let a = nonzero_rat_vec(r, dim);
    let b = nonzero_rat_vec(r, dim);
    let scale = space.norm(&a).unwrap() / space.norm(&b).unwrap();
    let fa: QVec = b.iter().map(|x| x * &scale).collect();
    let dom = Subspace::new(dim, vec![a]).unwrap();
    let ran = Subspace::new(dim, vec![fa.clone()]).unwrap();
    PartialIsometry::from_images(space, dom, ran, &[fa]).unwrap()
}

/// `inf_{u ∈ span(sub)} ‖x + u‖` by one LP over the facet functionals:
/// minimize `s` subject to `±φ(x + Σ t_i b_i) <= s`.
pub fn quotient_norm_by_lp(space: &PolySpace, sub: &[QVec], x: &[Rat]) -> Rat {
    let k = sub.len();
    let mut objective = vec![Rat::zero(); k + 1];
    objective[k] = Rat::one();
    let mut lp = LinearProgram::new(k + 1).minimize(objective);
    for phi in space.facets() {
        let base = dot(phi, x);
        let along: Vec<Rat> = sub.iter().map(|b| dot(phi, b)).collect();
        for sign in [Rat::one(), -Rat::one()] {
            let mut row: Vec<Rat> = along.iter().map(|c| &sign * c).collect();
            row.push(-Rat::one());
            lp.add_le(row, -(&sign * &base));
        }
    }
    let out = lp_min(&lp);
    assert_eq!(out.status, LpStatus::Optimal);
    out.value.unwrap()
}

/// Vertices of the symmetric hull of planar points, counter-clockwise, by a
/// monotone-chain scan (no linear programming involved).
pub fn planar_symmetric_hull(points: &[QVec]) -> Vec<QVec> {
    let mut all: Vec<QVec> = Vec::new();
    for p in points.iter().filter(|p| p.iter().any(|x| !x.is_zero())) {
        all.push(p.clone());
        all.push(p.iter().map(|x| -x).collect());
    }
    all.sort();
    all.dedup();
    let cross = |o: &QVec, a: &QVec, b: &QVec| (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0]);
    let mut lower: Vec<QVec> = Vec::new();
    for p in &all {
        while lower.len() >= 2 && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive() {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<QVec> = Vec::new();
    for p in all.iter().rev() {
        while upper.len() >= 2 && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive() {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Every linear map sending a fixed pair of independent vertices to any pair
/// of signed vertices and permuting the signed vertex set. Planar only.
pub fn brute_force_group(space: &PolySpace) -> Vec<QMat> {
    assert_eq!(space.dim(), 2);
    let signed = space.ball_v().signed_vertices();
    let idx = polyiso::arith::independent_subset(space.vertices(), 2);
    let basis = QMat::from_cols(2, &[space.vertices()[idx[0]].clone(), space.vertices()[idx[1]].clone()]).unwrap();
    let inv = basis.inverse().unwrap();
    let mut found = Vec::new();
    for a in &signed {
        for b in &signed {
            let images = QMat::from_cols(2, &[a.clone(), b.clone()]).unwrap();
            let g = images.matmul(&inv);
            let mut imgs: Vec<QVec> = signed.iter().map(|v| g.mul_vec(v)).collect();
            imgs.sort();
            let mut orig = signed.clone();
            orig.sort();
            if imgs == orig {
                found.push(g);
            }
        }
    }
    found.sort_by_key(|g| g.row_vecs());
    found.dedup();
    found
}

/// Windowed quotient norm through the facet functionals: minimize `Σ s_r`
/// subject to `±φ((a + η)(r)) <= s_r`, with `η` spanned by the generators
/// (`dom_b` at `r`, `-f(dom_b)` at `r - 1`) that fit in `[k, l]`.
pub fn windowed_norm_by_facets(o: &PartialIsometry, a: &[(i64, QVec)], k: i64, l: i64) -> Rat {
    let dom = o.dom().basis();
    let images: Vec<QVec> = (0..dom.len()).map(|b| o.apply(&dom[b]).unwrap()).collect();
    let dim = o.space().dim();
    let width = (l - k + 1) as usize;
    let g = dom.len();
    let total = width + (width - 1) * g;
    let t = |r: i64, b: usize| width + (r - k - 1) as usize * g + b;
    let mut objective = vec![Rat::zero(); total];
    for s in objective.iter_mut().take(width) {
        *s = Rat::one();
    }
    let mut lp = LinearProgram::new(total).minimize(objective);
    for r in k..=l {
        let value: QVec = a.iter().find(|(i, _)| *i == r).map_or(vec![Rat::zero(); dim], |(_, v)| v.clone());
        for phi in o.space().facets() {
            let mut row = vec![Rat::zero(); total];
            row[(r - k) as usize] = -Rat::one();
            if r > k {
                for b in 0..g {
                    row[t(r, b)] += dot(phi, &dom[b]);
                }
            }
            if r < l {
                for b in 0..g {
                    row[t(r + 1, b)] -= dot(phi, &images[b]);
                }
            }
            let base = dot(phi, &value);
            lp.add_le(row.clone(), -base.clone());
            lp.add_le(row.iter().enumerate().map(|(i, x)| if i == (r - k) as usize { x.clone() } else { -x }).collect(), base);
        }
    }
    let out = lp_min(&lp);
    assert_eq!(out.status, LpStatus::Optimal);
    out.value.unwrap()
}
