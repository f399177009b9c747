mod common;

use common::polytopes::{check_projection, random_bounded_system, random_image};
use probint_core::numeric::{
    is_feasible, remove_redundant, solve_lp, Constraint, ConstraintSystem, LinComb, LpOutcome, Rational, Relation,
    Sense, Var,
};
use rand::Rng;

/// Solves the square system `rows · x = rhs`; `None` when singular.
fn solve_square(mut rows: Vec<Vec<Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = rows.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(col, pivot);
        rhs.swap(col, pivot);
        let p = rows[col][col].clone();
        for r in 0..n {
            if r != col && !rows[r][col].is_zero() {
                let f = &rows[r][col] / &p;
                #[allow(clippy::needless_range_loop)]
                for c in col..n {
                    let d = &f * &rows[col][c];
                    rows[r][c] -= &d;
                }
                let d = &f * &rhs[col];
                rhs[r] -= &d;
            }
        }
    }
    Some((0..n).map(|i| &rhs[i] / &rows[i][i]).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Optimum over a bounded polytope by enumerating every basic solution.
fn vertex_optimum(system: &ConstraintSystem, objective: &LinComb, sense: Sense) -> Option<Rational> {
    let n = system.scope().len();
    let cs = system.constraints();
    let mut best: Option<Rational> = None;
    for pick in subsets(cs.len(), n) {
        let rows = pick
            .iter()
            .map(|&i| (0..n as u32).map(|j| cs[i].lhs.coeff(Var(j))).collect())
            .collect();
        let rhs = pick.iter().map(|&i| -cs[i].lhs.constant()).collect();
        let Some(x) = solve_square(rows, rhs) else { continue };
        if !system.is_satisfied_by(&x) {
            continue;
        }
        let v = objective.eval(|var| x[var.0 as usize].clone());
        best = Some(match (best, sense) {
            (None, _) => v,
            (Some(b), Sense::Min) => b.min(v),
            (Some(b), Sense::Max) => b.max(v),
        });
    }
    best
}

fn random_objective(rng: &mut common::TestRng, n: usize) -> LinComb {
    let mut lc = LinComb::new();
    for j in 0..n as u32 {
        lc.add_term(Var(j), &Rational::new(rng.gen_range(-5i64..=5), rng.gen_range(1i64..=4)));
    }
    lc
}

#[test]
fn simplex_matches_vertex_enumeration() {
    let mut rng = common::rng(7);
    let mut optimal = 0;
    for _ in 0..60 {
        let system = random_bounded_system(&mut rng, 4);
        let objective = random_objective(&mut rng, system.scope().len());
        for sense in [Sense::Min, Sense::Max] {
            match (solve_lp(&system, &objective, sense), vertex_optimum(&system, &objective, sense)) {
                (LpOutcome::Optimal { value, witness }, Some(v)) => {
                    assert_eq!(value, v, "{system}");
                    assert!(system.is_satisfied_by(&witness));
                    assert_eq!(objective.eval(|var| witness[var.0 as usize].clone()), value);
                    optimal += 1;
                }
                (LpOutcome::Infeasible, None) => {}
                (lp, vertices) => panic!("{system}\nlp {lp:?} vertices {vertices:?}"),
            }
        }
    }
    assert!(optimal > 40);
}

#[test]
fn optimum_is_tight_by_epsilon_probe() {
    let eps = Rational::new(1, 1_000_000_000);
    let mut rng = common::rng(8);
    for _ in 0..60 {
        let system = random_bounded_system(&mut rng, 6);
        let objective = random_objective(&mut rng, system.scope().len());
        let LpOutcome::Optimal { value, .. } = solve_lp(&system, &objective, Sense::Min) else {
            continue;
        };
        let mut below = system.clone();
        below.push(Constraint::compare(objective.clone(), Relation::Le, &(&value - &eps)));
        assert!(!is_feasible(&below));
        let mut at = system.clone();
        at.push(Constraint::compare(objective.clone(), Relation::Le, &value));
        assert!(is_feasible(&at));
    }
}

#[test]
fn unbounded_and_infeasible_outcomes() {
    let mut s = ConstraintSystem::with_dense_scope(2);
    s.push(Constraint::nonnegative(Var(0)));
    s.push(Constraint::nonnegative(Var(1)));
    let obj = LinComb::sum_of([Var(0), Var(1)]);
    assert_eq!(solve_lp(&s, &obj, Sense::Max), LpOutcome::Unbounded);
    assert_eq!(solve_lp(&s, &obj, Sense::Min).value(), Some(&Rational::zero()));
    s.push(Constraint::compare(obj.clone(), Relation::Le, &Rational::from(-1)));
    assert_eq!(solve_lp(&s, &obj, Sense::Min), LpOutcome::Infeasible);
}

#[test]
fn projection_agrees_with_lifting() {
    let mut rng = common::rng(9);
    for _ in 0..40 {
        let system = random_bounded_system(&mut rng, 6);
        let image = random_image(&mut rng, &system);
        let steps = [24, 8, 4][image.len() - 1];
        check_projection(&system, &image, steps).unwrap();
    }
}

#[test]
fn redundancy_removal_keeps_the_feasible_set() {
    let mut rng = common::rng(10);
    for _ in 0..50 {
        let mut system = random_bounded_system(&mut rng, 4);
        // add implied rows: the sum of the first two rows, and a loosened copy
        let cs = system.constraints().to_vec();
        system.push(Constraint::new(&cs[0].lhs + &cs[1].lhs, Relation::Ge));
        system.push(Constraint::new(&cs[0].lhs + &LinComb::from_constant(Rational::one()), Relation::Ge));
        let reduced = remove_redundant(&system);
        if !is_feasible(&system) {
            assert!(reduced.is_trivially_infeasible());
            continue;
        }
        assert!(reduced.len() < system.len());
        for c in system.constraints() {
            let lo = solve_lp(&reduced, &c.lhs, Sense::Min).value().cloned().unwrap();
            let hi = solve_lp(&reduced, &c.lhs, Sense::Max).value().cloned().unwrap();
            let implied = match c.relation {
                Relation::Ge => !lo.is_negative(),
                Relation::Le => !hi.is_positive(),
                Relation::Eq => lo.is_zero() && hi.is_zero(),
            };
            assert!(implied, "{c} not implied by\n{reduced}");
        }
        for (i, c) in reduced.constraints().iter().enumerate() {
            if c.relation == Relation::Eq {
                continue;
            }
            let others: Vec<Constraint> = reduced
                .constraints()
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, c)| c.clone())
                .collect();
            let rest = ConstraintSystem::from_parts(reduced.scope().to_vec(), others);
            let c = c.as_ge();
            let lo = solve_lp(&rest, &c.lhs, Sense::Min);
            assert!(
                lo.status() != probint_core::numeric::LpStatus::Optimal || lo.value().unwrap().is_negative(),
                "{c} is redundant in\n{reduced}"
            );
        }
    }
}
