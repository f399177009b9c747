//! Polyhedral projection by Fourier-Motzkin elimination, with LP-certified
//! redundancy removal after every elimination step.

use std::collections::HashSet;

use super::lp::{solve_lp, LpOutcome, Sense};
use super::{Constraint, ConstraintSystem, LinComb, Rational, Relation, Var};

/// Image of `system` under `y_k = L_k(x)`, as a system over the `y_k`.
///
/// The image unknowns are adjoined through equalities `y_k − L_k(x) = 0` and
/// every original unknown is then eliminated, last in scope order first. An
/// empty input feasible set yields [`ConstraintSystem::infeasible`].
///
/// # Panics
/// If an image expression mentions an unknown outside the system's scope.
pub fn project(system: &ConstraintSystem, image_map: &[(Var, LinComb)]) -> ConstraintSystem {
    let scope = system.scope();
    let n = scope.len();
    let out_scope: Vec<Var> = image_map.iter().map(|(v, _)| *v).collect();

    // Work in a private index space: originals 0..n, images n..n+m.
    let local = |v: Var| -> Var {
        let i = scope
            .iter()
            .position(|&w| w == v)
            .unwrap_or_else(|| panic!("unknown {v} outside system scope"));
        Var(i as u32)
    };
    let mut constraints: Vec<Constraint> =
        system.constraints().iter().map(|c| c.rename(local)).collect();
    for (k, (_, expr)) in image_map.iter().enumerate() {
        let mut lhs = LinComb::var(Var((n + k) as u32));
        lhs.add_scaled(&expr.rename(local), &-Rational::one());
        constraints.push(Constraint::new(lhs, Relation::Eq));
    }

    let mut remaining: Vec<Var> = (0..(n + image_map.len()) as u32).map(Var).collect();
    let Some(mut constraints) = tidy(constraints) else {
        return ConstraintSystem::infeasible(out_scope);
    };

    for i in (0..n as u32).rev() {
        let v = Var(i);
        remaining.retain(|&w| w != v);
        let (next, pair_step) = eliminate(constraints, v);
        let Some(next) = tidy(next) else {
            return ConstraintSystem::infeasible(out_scope);
        };
        constraints = next;
        if pair_step || i == 0 {
            let reduced =
                remove_redundant(&ConstraintSystem::from_parts(remaining.clone(), constraints));
            if reduced.is_trivially_infeasible() {
                return ConstraintSystem::infeasible(out_scope);
            }
            constraints = reduced.into_parts().1;
        }
    }
    if n == 0 {
        let reduced = remove_redundant(&ConstraintSystem::from_parts(remaining, constraints));
        if reduced.is_trivially_infeasible() {
            return ConstraintSystem::infeasible(out_scope);
        }
        constraints = reduced.into_parts().1;
    }

    let renamed = constraints
        .iter()
        .map(|c| c.rename(|v| out_scope[v.0 as usize - n]))
        .collect();
    ConstraintSystem::from_parts(out_scope, renamed)
}

/// Eliminates one unknown. Returns the new constraints and whether
/// inequality pairing (rather than equality substitution) was needed.
fn eliminate(constraints: Vec<Constraint>, v: Var) -> (Vec<Constraint>, bool) {
    if let Some(pos) = constraints
        .iter()
        .position(|c| c.relation == Relation::Eq && !c.lhs.coeff(v).is_zero())
    {
        let eq = &constraints[pos];
        let k = eq.lhs.coeff(v);
        // v = -(lhs - k·v) / k
        let mut rest = eq.lhs.clone();
        rest.add_term(v, &-&k);
        let replacement = rest.scaled(&-k.recip());
        let out = constraints
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != pos)
            .map(|(_, c)| c.substitute(v, &replacement))
            .collect();
        return (out, false);
    }

    let mut upper = Vec::new(); // coefficient < 0 in `lhs ≥ 0`
    let mut lower = Vec::new(); // coefficient > 0
    let mut out = Vec::new();
    for c in constraints {
        let c = c.as_ge();
        let k = c.lhs.coeff(v);
        if k.is_zero() {
            out.push(c);
        } else if k.is_positive() {
            lower.push((c, k));
        } else {
            upper.push((c, k));
        }
    }
    let paired = !lower.is_empty() && !upper.is_empty();
    for (lc, lk) in &lower {
        for (uc, uk) in &upper {
            let mut lhs = lc.lhs.scaled(&-uk);
            lhs.add_scaled(&uc.lhs, lk);
            debug_assert!(lhs.coeff(v).is_zero());
            out.push(Constraint::new(lhs, Relation::Ge));
        }
    }
    (out, paired)
}

/// Normalizes, drops tautologies and duplicates. `None` when a constant
/// constraint is violated.
fn tidy(constraints: Vec<Constraint>) -> Option<Vec<Constraint>> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(constraints.len());
    for c in constraints {
        let c = c.normalized();
        if c.lhs.is_constant() {
            if c.relation.holds(c.lhs.constant()) {
                continue;
            }
            return None;
        }
        if seen.insert(c.clone()) {
            out.push(c);
        }
    }
    Some(out)
}

/// Drops every constraint implied by the others, keeping the feasible set.
///
/// Constraints are visited in order; an inequality `lhs ≥ 0` is dropped when
/// minimizing `lhs` over the remaining constraints cannot go below zero, and an
/// equality when both its minimum and maximum are zero. Infeasible systems
/// collapse to [`ConstraintSystem::infeasible`].
pub fn remove_redundant(system: &ConstraintSystem) -> ConstraintSystem {
    let scope = system.scope().to_vec();
    let mut seen = HashSet::new();
    let mut kept: Vec<Constraint> = Vec::new();
    for c in system.constraints() {
        let key = c.normalized();
        if key.lhs.is_constant() {
            if key.relation.holds(key.lhs.constant()) {
                continue;
            }
            return ConstraintSystem::infeasible(scope);
        }
        if seen.insert(key) {
            kept.push(c.clone());
        }
    }
    if solve_lp(
        &ConstraintSystem::from_parts(scope.clone(), kept.clone()),
        &LinComb::new(),
        Sense::Min,
    ) == LpOutcome::Infeasible
    {
        return ConstraintSystem::infeasible(scope);
    }

    let mut i = 0;
    while i < kept.len() {
        let candidate = kept[i].as_ge();
        let others: Vec<Constraint> = kept
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, c)| c.clone())
            .collect();
        let rest = ConstraintSystem::from_parts(scope.clone(), others);
        let bounded_below = |sense: Sense, ok: fn(&Rational) -> bool| -> bool {
            match solve_lp(&rest, &candidate.lhs, sense) {
                LpOutcome::Optimal { value, .. } => ok(&value),
                _ => false,
            }
        };
        let implied = match candidate.relation {
            Relation::Eq => {
                bounded_below(Sense::Min, |v| !v.is_negative())
                    && bounded_below(Sense::Max, |v| !v.is_positive())
            }
            _ => bounded_below(Sense::Min, |v| !v.is_negative()),
        };
        if implied {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    ConstraintSystem::from_parts(scope, kept)
}
