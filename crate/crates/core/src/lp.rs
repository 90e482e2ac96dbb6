//! Exact linear programming and Fourier-Motzkin projection.
//!
//! [`lp_min`] is a dense two-phase simplex over [`Rat`]. It prices by the
//! most negative reduced cost and falls back to Bland's least-index rule on
//! long degenerate runs, so it terminates and is fully deterministic. Variables are free unless marked nonnegative; free variables
//! are split into positive and negative parts internally.

use num::{One, Signed, Zero};

use crate::arith::{dot, is_zero, zeros, QVec, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: QVec,
    pub rhs: Rat,
    pub relation: Relation,
}

/// `minimize objective . x` subject to the constraints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    num_vars: usize,
    objective: QVec,
    constraints: Vec<Constraint>,
    nonneg: Vec<bool>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: zeros(num_vars),
            constraints: Vec::new(),
            nonneg: vec![false; num_vars],
        }
    }

    pub fn minimize(mut self, objective: QVec) -> Self {
        assert_eq!(objective.len(), self.num_vars, "objective dimension");
        self.objective = objective;
        self
    }

    pub fn set_objective(&mut self, objective: QVec) {
        assert_eq!(objective.len(), self.num_vars, "objective dimension");
        self.objective = objective;
    }

    pub fn add(&mut self, coeffs: QVec, relation: Relation, rhs: Rat) {
        assert_eq!(coeffs.len(), self.num_vars, "constraint dimension");
        self.constraints.push(Constraint { coeffs, rhs, relation });
    }

    pub fn add_le(&mut self, coeffs: QVec, rhs: Rat) {
        self.add(coeffs, Relation::Le, rhs);
    }

    pub fn add_ge(&mut self, coeffs: QVec, rhs: Rat) {
        let coeffs = coeffs.iter().map(|c| -c).collect();
        self.add(coeffs, Relation::Le, -rhs);
    }

    pub fn add_eq(&mut self, coeffs: QVec, rhs: Rat) {
        self.add(coeffs, Relation::Eq, rhs);
    }

    pub fn set_nonneg(&mut self, var: usize) {
        self.nonneg[var] = true;
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &[Rat] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn is_nonneg(&self, var: usize) -> bool {
        self.nonneg[var]
    }

    /// Exact feasibility check of a point.
    pub fn is_feasible(&self, x: &[Rat]) -> bool {
        x.len() == self.num_vars
            && self.nonneg.iter().zip(x).all(|(&nn, v)| !nn || !v.is_negative())
            && self.constraints.iter().all(|c| {
                let lhs = dot(&c.coeffs, x);
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                }
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub value: Option<Rat>,
    pub point: Option<QVec>,
}

impl LpOutcome {
    fn without_point(status: LpStatus) -> Self {
        LpOutcome { status, value: None, point: None }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

struct Tableau {
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    width: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rat {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize, reduced: &mut [Rat]) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            eliminate(row, &pivot_row, c);
        }
        eliminate(reduced, &pivot_row, c);
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Reduced costs with the negated objective value in the last slot.
    fn reduced_costs(&self, cost: &[Rat]) -> Vec<Rat> {
        let mut d: Vec<Rat> = cost.iter().cloned().chain(std::iter::once(Rat::zero())).collect();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (dj, aij) in d.iter_mut().zip(row) {
                if !aij.is_zero() {
                    *dj -= cb * aij;
                }
            }
        }
        d
    }

    /// Primal simplex. Prices by the most negative reduced cost and switches
    /// to Bland's rule for good after a run of degenerate pivots, which rules
    /// out cycling.
    fn run(&mut self, cost: &[Rat], active: &[bool]) -> Phase {
        const DEGENERATE_RUN: usize = 50;
        let mut d = self.reduced_costs(cost);
        let mut degenerate = 0;
        loop {
            let candidates = (0..self.width).filter(|&j| active[j] && d[j].is_negative());
            let enter = if degenerate < DEGENERATE_RUN {
                candidates.min_by(|&a, &b| d[a].cmp(&d[b]).then(a.cmp(&b)))
            } else {
                candidates.min()
            };
            let Some(enter) = enter else {
                return Phase::Optimal;
            };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else {
                return Phase::Unbounded;
            };
            if ratio.is_zero() {
                degenerate += 1;
            } else if degenerate < DEGENERATE_RUN {
                degenerate = 0;
            }
            self.pivot(r, enter, &mut d);
        }
    }
}

fn eliminate(row: &mut [Rat], pivot_row: &[Rat], c: usize) {
    if row[c].is_zero() {
        return;
    }
    let factor = row[c].clone();
    for (v, p) in row.iter_mut().zip(pivot_row) {
        if !p.is_zero() {
            *v -= &factor * p;
        }
    }
}

/// Solves the program exactly. Deterministic for a fixed input.
pub fn lp_min(p: &LinearProgram) -> LpOutcome {
    let n = p.num_vars;
    // Column layout: [positive parts | negative parts of free vars | slacks | artificials].
    let mut neg_col = vec![None; n];
    let mut width = n;
    for (col, &nonneg) in neg_col.iter_mut().zip(&p.nonneg) {
        if !nonneg {
            *col = Some(width);
            width += 1;
        }
    }
    let slack_start = width;
    let num_slacks = p.constraints.iter().filter(|c| c.relation == Relation::Le).count();
    width += num_slacks;
    // A `<=` row with nonnegative right-hand side starts with its slack basic;
    // every other row gets an artificial column.
    let needs_artificial: Vec<bool> =
        p.constraints.iter().map(|c| c.relation != Relation::Le || c.rhs.is_negative()).collect();
    let art_start = width;
    width += needs_artificial.iter().filter(|&&a| a).count();

    let m = p.constraints.len();
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut slack = slack_start;
    let mut art = art_start;
    for (i, c) in p.constraints.iter().enumerate() {
        let mut row = vec![Rat::zero(); width + 1];
        for j in 0..n {
            row[j] = c.coeffs[j].clone();
            if let Some(q) = neg_col[j] {
                row[q] = -&c.coeffs[j];
            }
        }
        let own_slack = (c.relation == Relation::Le).then(|| {
            row[slack] = Rat::one();
            slack += 1;
            slack - 1
        });
        row[width] = c.rhs.clone();
        if c.rhs.is_negative() {
            for v in row.iter_mut() {
                *v = -&*v;
            }
        }
        if needs_artificial[i] {
            row[art] = Rat::one();
            basis.push(art);
            art += 1;
        } else {
            basis.push(own_slack.expect("slack of a <= row"));
        }
        rows.push(row);
    }
    let mut t = Tableau { rows, basis, width };

    if art > art_start {
        let mut phase1_cost = vec![Rat::zero(); width];
        for c in phase1_cost.iter_mut().skip(art_start) {
            *c = Rat::one();
        }
        let all = vec![true; width];
        t.run(&phase1_cost, &all);
        let infeasibility: Rat = t
            .rows
            .iter()
            .zip(&t.basis)
            .filter(|(_, &b)| b >= art_start)
            .map(|(row, _)| row[width].clone())
            .sum();
        if infeasibility.is_positive() {
            return LpOutcome::without_point(LpStatus::Infeasible);
        }

        // Drive artificials out of the basis; rows where that is impossible are redundant.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art_start {
                if let Some(j) = (0..art_start).find(|&j| !t.rows[i][j].is_zero()) {
                    let mut scratch = vec![Rat::zero(); width + 1];
                    t.pivot(i, j, &mut scratch);
                } else {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
            i += 1;
        }
    }

    let mut cost = vec![Rat::zero(); width];
    for j in 0..n {
        cost[j] = p.objective[j].clone();
        if let Some(q) = neg_col[j] {
            cost[q] = -&p.objective[j];
        }
    }
    let mut active = vec![true; width];
    for a in active.iter_mut().skip(art_start) {
        *a = false;
    }
    if let Phase::Unbounded = t.run(&cost, &active) {
        return LpOutcome::without_point(LpStatus::Unbounded);
    }

    let mut column_value = vec![Rat::zero(); width];
    for (row, &b) in t.rows.iter().zip(&t.basis) {
        column_value[b] = row[width].clone();
    }
    let point: QVec = (0..n)
        .map(|j| match neg_col[j] {
            Some(q) => &column_value[j] - &column_value[q],
            None => column_value[j].clone(),
        })
        .collect();
    let value = dot(&p.objective, &point);
    debug_assert!(p.is_feasible(&point));
    LpOutcome { status: LpStatus::Optimal, value: Some(value), point: Some(point) }
}

/// Maximizes `objective . x`; the reported value is the maximum.
pub fn lp_max(p: &LinearProgram) -> LpOutcome {
    let mut q = p.clone();
    q.objective = p.objective.iter().map(|c| -c).collect();
    let mut out = lp_min(&q);
    out.value = out.value.map(|v| -v);
    out
}

/// A half-space `a . x <= b`.
pub type HalfSpace = (QVec, Rat);

fn inequality_lp(num_vars: usize, system: &[HalfSpace]) -> LinearProgram {
    let mut lp = LinearProgram::new(num_vars);
    for (a, b) in system {
        lp.add_le(a.clone(), b.clone());
    }
    lp
}

/// Positive rescaling so the first nonzero coefficient is +-1; `None` for a
/// tautology `0 <= b`, `b >= 0`.
fn normalize_halfspace((a, b): &HalfSpace) -> Option<HalfSpace> {
    match a.iter().find(|x| !x.is_zero()) {
        Some(first) => {
            let s = first.abs().recip();
            Some((a.iter().map(|x| x * &s).collect(), b * &s))
        }
        None if b.is_negative() => Some((a.clone(), Rat::from_integer((-1).into()))),
        None => None,
    }
}

fn canonical_system(system: Vec<HalfSpace>) -> Vec<HalfSpace> {
    let mut out: Vec<HalfSpace> = system.iter().filter_map(normalize_halfspace).collect();
    out.sort();
    out.dedup();
    out
}

/// Drops every inequality implied by the remaining ones (one LP each).
fn remove_redundant(num_vars: usize, system: Vec<HalfSpace>) -> Vec<HalfSpace> {
    let mut kept = system;
    let mut i = 0;
    while i < kept.len() {
        let others: Vec<HalfSpace> = kept.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, h)| h.clone()).collect();
        let lp = inequality_lp(num_vars, &others).minimize(kept[i].0.iter().map(|c| -c).collect());
        let out = lp_min(&lp);
        let redundant = out.status == LpStatus::Optimal && -out.value.expect("optimal") <= kept[i].1;
        if redundant {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    kept
}

/// H-description of the projection of `{x : a . x <= b}` onto the coordinates
/// in `keep` (output vectors are indexed in ascending `keep` order).
///
/// Variables are eliminated in ascending index order with redundancy removal
/// after each step. An empty polyhedron projects to the single row `0 <= -1`.
pub fn fm_project(num_vars: usize, constraints: &[HalfSpace], keep: &[usize]) -> Vec<HalfSpace> {
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    let kept_dim = keep.len();

    if lp_min(&inequality_lp(num_vars, constraints)).status == LpStatus::Infeasible {
        return vec![(zeros(kept_dim), Rat::from_integer((-1).into()))];
    }

    let mut system = remove_redundant(num_vars, canonical_system(constraints.to_vec()));
    for var in (0..num_vars).filter(|v| !keep.contains(v)) {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for h in system {
            if h.0[var].is_positive() {
                pos.push(h);
            } else if h.0[var].is_negative() {
                neg.push(h);
            } else {
                rest.push(h);
            }
        }
        for (pa, pb) in &pos {
            for (na, nb) in &neg {
                let (sp, sn) = (-&na[var], pa[var].clone());
                let a: QVec = pa.iter().zip(na).map(|(x, y)| x * &sp + y * &sn).collect();
                let b = pb * &sp + nb * &sn;
                rest.push((a, b));
            }
        }
        system = remove_redundant(num_vars, canonical_system(rest));
    }

    let projected = system
        .into_iter()
        .map(|(a, b)| (keep.iter().map(|&k| a[k].clone()).collect::<QVec>(), b))
        .filter(|(a, b)| !(is_zero(a) && !b.is_negative()))
        .collect();
    canonical_system(projected)
}
