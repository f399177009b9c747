//! Exact two-phase primal simplex with Bland's rule.
//!
//! Unknowns that carry a plain `x ≥ 0` constraint become sign-restricted
//! columns; every other unknown is split as `x = x⁺ − x⁻`. Entering columns are
//! chosen by lowest index and leaving rows by lowest basic column among ties,
//! which rules out cycling and makes every run deterministic.

use std::collections::BTreeMap;

use super::{ConstraintSystem, LinComb, Rational, Relation, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    /// `witness` is listed in scope order.
    Optimal {
        value: Rational,
        witness: Vec<Rational>,
    },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal { .. } => LpStatus::Optimal,
            LpOutcome::Infeasible => LpStatus::Infeasible,
            LpOutcome::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn witness(&self) -> Option<&[Rational]> {
        match self {
            LpOutcome::Optimal { witness, .. } => Some(witness),
            _ => None,
        }
    }
}

/// Optimizes `objective` over the feasible set of `system`.
///
/// # Panics
/// If the objective mentions an unknown outside the system's scope.
pub fn solve_lp(system: &ConstraintSystem, objective: &LinComb, sense: Sense) -> LpOutcome {
    let scope = system.scope();
    let index: BTreeMap<Var, usize> = scope.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    for v in objective.vars() {
        assert!(index.contains_key(&v), "objective unknown {v} outside system scope");
    }

    // Sign restrictions and genuine rows.
    let mut nonneg = vec![false; scope.len()];
    let mut rows = Vec::new();
    for c in system.constraints() {
        if c.lhs.is_constant() {
            if !c.relation.holds(c.lhs.constant()) {
                return LpOutcome::Infeasible;
            }
            continue;
        }
        if c.lhs.len() == 1 && c.lhs.constant().is_zero() {
            let (v, k) = c.lhs.first_term().unwrap();
            let lower_bound = match c.relation {
                Relation::Ge => k.is_positive(),
                Relation::Le => k.is_negative(),
                Relation::Eq => false,
            };
            if lower_bound {
                nonneg[index[&v]] = true;
                continue;
            }
        }
        rows.push(c);
    }

    // Structural columns: one per sign-restricted unknown, two per free one.
    let mut plus_col = vec![0usize; scope.len()];
    let mut minus_col = vec![None; scope.len()];
    let mut ncols = 0;
    for i in 0..scope.len() {
        plus_col[i] = ncols;
        ncols += 1;
        if !nonneg[i] {
            minus_col[i] = Some(ncols);
            ncols += 1;
        }
    }
    let n_struct = ncols;
    let n_slack = rows.iter().filter(|c| c.relation != Relation::Eq).count();
    let slack_start = n_struct;
    let art_start = slack_start + n_slack;

    // Assemble rows `a·x (+/- s) = b` with b ≥ 0.
    let mut dense: Vec<Vec<Rational>> = Vec::with_capacity(rows.len());
    let mut slack_of_row: Vec<Option<(usize, bool)>> = Vec::with_capacity(rows.len());
    let mut next_slack = slack_start;
    for c in &rows {
        let mut row = vec![Rational::zero(); art_start + 1];
        for (v, k) in c.lhs.terms() {
            let i = index[&v];
            row[plus_col[i]] = k.clone();
            if let Some(m) = minus_col[i] {
                row[m] = -k;
            }
        }
        let mut rhs = -c.lhs.constant();
        let mut slack = match c.relation {
            Relation::Eq => None,
            Relation::Le => Some((next_slack, true)),
            Relation::Ge => Some((next_slack, false)),
        };
        if let Some((s, positive)) = slack {
            row[s] = if positive { Rational::one() } else { -Rational::one() };
            next_slack += 1;
        }
        if rhs.is_negative() {
            for e in row.iter_mut() {
                if !e.is_zero() {
                    *e = -&*e;
                }
            }
            rhs = -rhs;
            slack = slack.map(|(s, p)| (s, !p));
        }
        row[art_start] = rhs;
        dense.push(row);
        slack_of_row.push(slack);
    }

    let n_art = slack_of_row
        .iter()
        .filter(|s| !matches!(s, Some((_, true))))
        .count();
    let total = art_start + n_art;
    let mut basis = Vec::with_capacity(dense.len());
    let mut next_art = art_start;
    for (row, slack) in dense.iter_mut().zip(&slack_of_row) {
        let rhs = row.pop().unwrap();
        row.resize(total, Rational::zero());
        match slack {
            Some((s, true)) => basis.push(*s),
            _ => {
                row[next_art] = Rational::one();
                basis.push(next_art);
                next_art += 1;
            }
        }
        row.push(rhs);
    }

    let mut t = Tableau {
        rows: dense,
        basis,
        obj: vec![Rational::zero(); total + 1],
        width: total,
    };

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        for j in art_start..total {
            t.obj[j] = Rational::one();
        }
        for r in 0..t.rows.len() {
            if t.basis[r] >= art_start {
                let row = t.rows[r].clone();
                sub_scaled(&mut t.obj, &row, &Rational::one());
            }
        }
        let finished = t.run(total);
        debug_assert!(finished, "phase 1 is bounded below");
        if t.obj[total].is_negative() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-level artificials out of the basis or drop redundant rows.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= art_start {
                match (0..art_start).find(|&j| !t.rows[r][j].is_zero()) {
                    Some(j) => {
                        t.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        t.rows.remove(r);
                        t.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        for row in t.rows.iter_mut() {
            let rhs = row.pop().unwrap();
            row.truncate(art_start);
            row.push(rhs);
        }
        t.width = art_start;
    }

    // Phase 2.
    let flip = sense == Sense::Max;
    let mut cost = vec![Rational::zero(); t.width + 1];
    for (v, k) in objective.terms() {
        let i = index[&v];
        let k = if flip { -k } else { k.clone() };
        if let Some(m) = minus_col[i] {
            cost[m] = -&k;
        }
        cost[plus_col[i]] = k;
    }
    t.obj = cost.clone();
    for r in 0..t.rows.len() {
        let cb = &cost[t.basis[r]];
        if !cb.is_zero() {
            let row = t.rows[r].clone();
            sub_scaled(&mut t.obj, &row, cb);
        }
    }
    if !t.run(t.width) {
        return LpOutcome::Unbounded;
    }

    let mut col_value = vec![Rational::zero(); t.width];
    for (r, &b) in t.basis.iter().enumerate() {
        col_value[b] = t.rows[r][t.width].clone();
    }
    let witness: Vec<Rational> = (0..scope.len())
        .map(|i| match minus_col[i] {
            Some(m) => &col_value[plus_col[i]] - &col_value[m],
            None => col_value[plus_col[i]].clone(),
        })
        .collect();
    let value = objective.eval(|v| witness[index[&v]].clone());
    LpOutcome::Optimal { value, witness }
}

/// Feasibility via a zero objective.
pub fn is_feasible(system: &ConstraintSystem) -> bool {
    solve_lp(system, &LinComb::new(), Sense::Min).status() == LpStatus::Optimal
}

fn sub_scaled(target: &mut [Rational], row: &[Rational], k: &Rational) {
    for (t, e) in target.iter_mut().zip(row) {
        if !e.is_zero() {
            *t -= &(e * k);
        }
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Reduced costs; the last entry holds minus the objective value.
    obj: Vec<Rational>,
    /// Number of live columns; the right-hand side sits at index `width`.
    width: usize,
}

impl Tableau {
    /// Minimizes over columns `< limit`. Returns false when unbounded.
    fn run(&mut self, limit: usize) -> bool {
        loop {
            let Some(enter) = (0..limit).find(|&j| self.obj[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rows[r][self.width] / a;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            match leave {
                None => return false,
                Some((r, _)) => self.pivot(r, enter),
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        if !inv.is_one() {
            for e in self.rows[r].iter_mut() {
                if !e.is_zero() {
                    *e *= &inv;
                }
            }
        }
        let nz: Vec<usize> = (0..=self.width)
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &nz {
                row[j] -= &(&pivot_row[j] * &f);
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for &j in &nz {
                self.obj[j] -= &(&pivot_row[j] * &f);
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }
}
