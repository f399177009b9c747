//! Small random polytopes and a grid membership oracle for projections.

use probint_core::numeric::{is_feasible, project, Constraint, ConstraintSystem, LinComb, Rational, Relation, Sense, Var};
use probint_core::numeric::{solve_lp, LpOutcome};
use rand::Rng;

use super::TestRng;

/// Bounded system over at most `max_unknowns` unknowns: a box `[0, 2]` per
/// unknown plus a few random rows with small integer coefficients.
pub fn random_bounded_system(rng: &mut TestRng, max_unknowns: usize) -> ConstraintSystem {
    let n = rng.gen_range(2..=max_unknowns);
    let mut s = ConstraintSystem::with_dense_scope(n);
    for j in 0..n as u32 {
        s.push(Constraint::nonnegative(Var(j)));
        s.push(Constraint::compare(LinComb::var(Var(j)), Relation::Le, &Rational::from(2)));
    }
    for _ in 0..rng.gen_range(1..=4) {
        let mut lhs = LinComb::new();
        for j in 0..n as u32 {
            if rng.gen_bool(0.6) {
                lhs.add_term(Var(j), &Rational::from(rng.gen_range(-3i64..=3)));
            }
        }
        let rhs = Rational::new(rng.gen_range(-4i64..=8), rng.gen_range(1i64..=3));
        let rel = match rng.gen_range(0..5) {
            0 => Relation::Eq,
            1 | 2 => Relation::Le,
            _ => Relation::Ge,
        };
        s.push(Constraint::compare(lhs, rel, &rhs));
    }
    s
}

/// One to three image coordinates, each a random small combination of unknowns.
pub fn random_image(rng: &mut TestRng, system: &ConstraintSystem) -> Vec<(Var, LinComb)> {
    let n = system.scope().len() as u32;
    let m = rng.gen_range(1..=3usize.min(n as usize));
    (0..m)
        .map(|k| {
            let mut lc = LinComb::new();
            while lc.is_constant() {
                for j in 0..n {
                    if rng.gen_bool(0.5) {
                        lc.add_term(Var(j), &Rational::from(rng.gen_range(-2i64..=2)));
                    }
                }
            }
            (Var(100 + k as u32), lc)
        })
        .collect()
}

/// Is `point` the image of some feasible `x`? Decided by one LP per point.
pub fn liftable(system: &ConstraintSystem, image: &[(Var, LinComb)], point: &[Rational]) -> bool {
    let mut lifted = system.clone();
    for ((_, lc), y) in image.iter().zip(point) {
        lifted.push(Constraint::compare(lc.clone(), Relation::Eq, y));
    }
    is_feasible(&lifted)
}

/// Grid over the bounding box of the image, padded by one step on each side.
/// Box endpoints are grid points.
pub fn grid(system: &ConstraintSystem, image: &[(Var, LinComb)], steps: i64) -> Vec<Vec<Rational>> {
    let mut axes = Vec::new();
    for (_, lc) in image {
        let (lo, hi) = match (
            solve_lp(system, lc, Sense::Min),
            solve_lp(system, lc, Sense::Max),
        ) {
            (LpOutcome::Optimal { value: lo, .. }, LpOutcome::Optimal { value: hi, .. }) => (lo, hi),
            _ => (Rational::zero(), Rational::one()),
        };
        let width = &hi - &lo;
        let step = if width.is_zero() { Rational::new(1, 4) } else { width / Rational::from(steps) };
        axes.push((-1..=steps + 1).map(|i| &lo + &(&step * &Rational::from(i))).collect::<Vec<_>>());
    }
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(v.clone());
                    q
                })
            })
            .collect();
    }
    points
}

/// Compares projection membership with LP lifting on every grid point.
/// Returns the number of points checked and, on disagreement, the first offending point.
pub fn check_projection(system: &ConstraintSystem, image: &[(Var, LinComb)], steps: i64) -> Result<usize, String> {
    let projected = project(system, image);
    let wanted: Vec<Var> = image.iter().map(|(v, _)| *v).collect();
    if projected.scope() != wanted.as_slice() {
        return Err(format!("projection scope {:?}, wanted {wanted:?}", projected.scope()));
    }
    let points = grid(system, image, steps);
    for p in &points {
        let by_projection = projected.is_satisfied_by(p);
        let by_lifting = liftable(system, image, p);
        if by_projection != by_lifting {
            return Err(format!(
                "point {:?}: projection says {by_projection}, lifting says {by_lifting}\n{system}\n→\n{projected}",
                p.iter().map(|r| r.to_string()).collect::<Vec<_>>()
            ));
        }
    }
    Ok(points.len())
}
