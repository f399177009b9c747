//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::graphs::{adjacency, chordless_cycle, max_spanning_weight, maximal_cliques, running_intersection};
use common::polytopes::{check_projection, random_bounded_system, random_image};
use common::{random_case, statement, Case, Query};
use probint_core::global::{GlobalEngine, Verdict};
use probint_core::graph::{build_join_tree, max_cliques, mcs_fill_in, UGraph};
use probint_core::interval::Interval;
use probint_core::jointree::{
    build_local_systems, build_marginal_joint_system, calibrate, check_consistency_wrt_g, CalibrationState,
    GraphConsistency,
};
use probint_core::model::{localize, parse_model, PartialSpecification};
use probint_core::numeric::{Rational, Relation};
use probint_core::{Error, EventExpr};
use rand::Rng;

const CORPUS_SIZE: u64 = 200;
const CORPUS_SEED: u64 = 1_000_000;

fn corpus() -> Vec<Case> {
    (0..CORPUS_SIZE).map(|i| random_case(CORPUS_SEED + i)).collect()
}

fn calibrated(spec: &PartialSpecification, root: usize) -> CalibrationState {
    let tree = spec.structure().expect("structure").tree;
    let nodes = build_local_systems(&localize(spec, &tree).expect("localize")).expect("local systems");
    calibrate(nodes, &tree, root)
}

fn watched(case: &Case) -> Vec<Query> {
    let mut out: Vec<Query> = case
        .names
        .iter()
        .map(|v| Query {
            event: EventExpr::var(v.clone()),
            given: None,
        })
        .collect();
    for s in case.pinning_statements() {
        out.push(Query {
            event: s.prob.parse().unwrap(),
            given: None,
        });
    }
    out
}

fn local(state: &CalibrationState, q: &Query) -> Interval {
    state
        .local_interval(&q.event, q.given.as_ref())
        .unwrap_or_else(|e| panic!("{} | {:?}: {e}", q.event, q.given))
        .bounds
        .interval
}

fn true_value(case: &Case, q: &Query) -> Rational {
    match &q.given {
        None => case.prob(&q.event),
        Some(g) => case.prob(&EventExpr::and(q.event.clone(), g.clone())) / case.prob(g),
    }
}

fn three_way_equality(cases: &[Case]) -> String {
    let engine = GlobalEngine::default();
    let mut queries = 0;
    let mut at_other_cliques = 0;
    for case in cases {
        assert!(case.queries.len() >= 10);
        let spec = case.spec();
        let state = calibrated(&spec, 0);
        let mj = build_marginal_joint_system(&state.nodes, &state.tree);
        for q in &case.queries {
            let jt = state.local_interval(&q.event, q.given.as_ref()).unwrap();
            let (_, direct) = mj.interval(&state.tree, &q.event, q.given.as_ref()).unwrap();
            let global = engine.interval(&spec, &q.event, q.given.as_ref()).unwrap();
            assert_eq!(
                jt.bounds.interval, direct.interval,
                "seed {}: {} join tree vs marginal joint system",
                case.seed, q.event
            );
            assert_eq!(
                jt.bounds.interval, global.interval,
                "seed {}: {} join tree vs global",
                case.seed, q.event
            );
            // any other clique covering the query must give the same answer
            let mut vars = q.event.variables();
            if let Some(g) = &q.given {
                vars.extend(g.variables());
            }
            for c in 0..state.nodes.len() {
                if c != jt.clique && vars.iter().all(|v| state.nodes[c].scope.contains(v)) {
                    let other = state.local_interval_at(c, &q.event, q.given.as_ref()).unwrap();
                    assert_eq!(other.bounds.interval, jt.bounds.interval, "seed {}", case.seed);
                    at_other_cliques += 1;
                }
            }
            queries += 1;
        }
    }
    format!(
        "{} models, {queries} queries, {at_other_cliques} extra covering-clique answers, all exactly equal",
        cases.len()
    )
}

fn monotone_refinement(cases: &[Case]) -> String {
    let mut steps = 0;
    let mut points = 0;
    for case in cases {
        let watch = watched(case);
        let pins = case.pinning_statements();
        let all: Vec<_> = case.statements.iter().chain(&pins).cloned().collect();
        let mut previous: Vec<Interval> = vec![Interval::unit(); watch.len()];
        for k in 0..=all.len() {
            let state = calibrated(&case.spec_with(&all[..k]), 0);
            for (q, prev) in watch.iter().zip(previous.iter_mut()) {
                let now = local(&state, q);
                assert!(
                    now.nested_in(prev),
                    "seed {}: statement {k} widened {} from {prev} to {now}",
                    case.seed,
                    q.event
                );
                *prev = now;
            }
            steps += 1;
        }
        let state = calibrated(&case.spec_with(&all), 0);
        for q in watch.iter().chain(&case.queries) {
            let i = local(&state, q);
            assert_eq!(i, Interval::point(true_value(case, q)), "seed {}: {}", case.seed, q.event);
            points += 1;
        }
    }
    format!("{steps} refinement steps; {points} pinned queries equal direct summation")
}

fn frechet() -> String {
    let engine = GlobalEngine::default();
    let grid: Vec<Rational> = (0..=4).map(|i| Rational::new(i, 4)).collect();
    let mut n = 0;
    for alpha in &grid {
        for beta in &grid {
            let spec = parse_model(&format!(
                r#"{{"variables":["a","b"],"edges":[["a","b"]],"statements":[
                    {{"prob":"a","rel":"=","value":"{alpha}"}},{{"prob":"b","rel":"=","value":"{beta}"}}]}}"#
            ))
            .unwrap();
            let got = engine.interval(&spec, &"a & b".parse().unwrap(), None).unwrap().interval;
            let lower = (alpha + beta - Rational::one()).max(Rational::zero());
            let upper = alpha.clone().min(beta.clone());
            assert_eq!(got, Interval::new(lower, upper), "alpha {alpha} beta {beta}");
            n += 1;
        }
    }
    format!("{n} (alpha, beta) pairs exact")
}

fn consistency_classification(cases: &[Case]) -> String {
    let spec = parse_model(
        r#"{"variables":["a","b","c"],"edges":[["a","b"],["b","c"]],"statements":[
            {"prob":"a","rel":"=","value":"1/2"},
            {"prob":"a & b","rel":"=","value":"1/2"},
            {"prob":"b & (c | !c)","rel":"=","value":"1/4"}]}"#,
    )
    .unwrap();
    let tree = spec.structure().unwrap().tree;
    let loc = localize(&spec, &tree).unwrap();
    assert_eq!(loc.per_clique.iter().map(Vec::len).collect::<Vec<_>>(), vec![2, 1]);
    let nodes = build_local_systems(&loc).unwrap();
    assert_eq!(check_consistency_wrt_g(&nodes, &tree), GraphConsistency::GloballyInconsistent);
    assert_eq!(GlobalEngine::default().check_consistency(&spec).unwrap(), Verdict::Inconsistent);
    assert!(!calibrate(nodes, &tree, 1).is_consistent());

    let engine = GlobalEngine::default();
    for case in cases {
        let spec = case.spec();
        let tree = spec.structure().unwrap().tree;
        let nodes = build_local_systems(&localize(&spec, &tree).unwrap()).unwrap();
        assert_eq!(check_consistency_wrt_g(&nodes, &tree), GraphConsistency::Consistent, "seed {}", case.seed);
        assert_eq!(engine.check_consistency(&spec).unwrap(), Verdict::Consistent, "seed {}", case.seed);
    }
    format!("crafted chain locally consistent, globally inconsistent; {} sampled models consistent", cases.len())
}

fn calibration_invariances(cases: &[Case]) -> String {
    let mut runs = 0;
    for case in cases {
        let spec = case.spec();
        let queries: Vec<Query> = case.queries.iter().cloned().chain(watched(case)).collect();
        let base = calibrated(&spec, 0);
        let expected: Vec<Interval> = queries.iter().map(|q| local(&base, q)).collect();
        for root in 0..base.nodes.len() {
            let state = if root == 0 { base.clone() } else { calibrated(&spec, root) };
            let again = state.recalibrate();
            for s in [&state, &again] {
                let got: Vec<Interval> = queries.iter().map(|q| local(s, q)).collect();
                assert_eq!(got, expected, "seed {} root {root}", case.seed);
            }
            runs += 1;
        }
    }
    format!("{runs} (model, root) calibrations and second passes identical")
}

fn projection_oracle() -> String {
    let mut rng = common::rng(77);
    let mut points = 0;
    for _ in 0..150 {
        let system = random_bounded_system(&mut rng, 6);
        let image = random_image(&mut rng, &system);
        let steps = [40, 12, 5][image.len() - 1];
        points += check_projection(&system, &image, steps).unwrap_or_else(|e| panic!("{e}"));
    }
    format!("150 systems, {points} grid points, projection and lifting agree")
}

fn graph_layer(cases: &[Case]) -> String {
    let mut rng = common::rng(78);
    let mut graphs: Vec<(usize, Vec<(usize, usize)>)> = (0..400)
        .map(|_| {
            let n = rng.gen_range(1..=10);
            let extra = rng.gen_range(0..=2 * n);
            (n, common::random_connected_edges(&mut rng, n, extra))
        })
        .collect();
    for case in cases {
        let idx = |v: &str| case.names.iter().position(|n| n == v).unwrap();
        graphs.push((case.names.len(), case.edges.iter().map(|[a, b]| (idx(a), idx(b))).collect()));
    }
    let mut trees = 0;
    for (n, edges) in &graphs {
        let mut g = UGraph::new((0..*n).map(|i| format!("v{i}")));
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        let tri = mcs_fill_in(&g).unwrap();
        assert!(edges.iter().all(|&(a, b)| tri.graph.has_edge(a, b)));
        let adj = adjacency(*n, tri.graph.edges());
        if let Some(cycle) = chordless_cycle(&adj) {
            panic!("chordless cycle {cycle:?} after triangulating {edges:?}");
        }
        let cs = max_cliques(&tri.graph, &tri.elimination_order).unwrap();
        let sets: Vec<BTreeSet<usize>> = cs.cliques().iter().map(|c| c.iter().copied().collect()).collect();
        assert_eq!(sets.iter().cloned().collect::<BTreeSet<_>>(), maximal_cliques(&adj));
        if sets.len() <= 7 {
            let tree = build_join_tree(cs).unwrap();
            let tree_edges: Vec<(usize, usize)> = tree.edges().iter().map(|e| (e.a, e.b)).collect();
            running_intersection(&sets, &tree_edges).unwrap_or_else(|e| panic!("{e}"));
            let weight: usize = tree.edges().iter().map(|e| e.separator.len()).sum();
            assert_eq!(weight, max_spanning_weight(&sets));
            trees += 1;
        }
    }
    format!("{} triangulations chordal; {trees} join trees pass the exhaustive running-intersection check", graphs.len())
}

fn scalability() -> String {
    let n = 30;
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut statements = vec![statement("x0", None, Relation::Eq, &Rational::new(1, 3))];
    for i in 1..n {
        let (prev, cur) = (&names[i - 1], &names[i]);
        statements.push(statement(cur, Some(prev), Relation::Ge, &Rational::new(3, 5)));
        statements.push(statement(cur, Some(&format!("!{prev}")), Relation::Le, &Rational::new(1, 5)));
    }
    let doc = probint_core::model::ModelDocument {
        variables: names.clone(),
        edges: names.windows(2).map(|w| [w[0].clone(), w[1].clone()]).collect(),
        statements,
    };
    let spec = PartialSpecification::from_document(&doc).unwrap();

    let start = Instant::now();
    let state = calibrated(&spec, 0);
    let b = state.local_interval(&"x29".parse().unwrap(), None).unwrap();
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    assert_eq!(state.nodes.len(), n - 1);
    assert!(state.is_consistent());

    let refused = GlobalEngine::default().interval(&spec, &"x29".parse().unwrap(), None);
    assert_eq!(refused.unwrap_err(), Error::SizeCap { variables: 30, cap: 20 });
    format!(
        "30-variable chain calibrated and queried in {:.3}s (x29 in {}); global mode refused",
        elapsed.as_secs_f64(),
        b.bounds.interval
    )
}

type Criterion<'a> = Box<dyn Fn() -> String + 'a>;

fn main() -> ExitCode {
    panic::set_hook(Box::new(|_| {}));
    let started = Instant::now();
    let cases = corpus();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("three-way oracle equality", Box::new(|| three_way_equality(&cases))),
        ("monotone refinement and fully pinned models", Box::new(|| monotone_refinement(&cases))),
        ("Frechet spot checks", Box::new(frechet)),
        ("consistency classification", Box::new(|| consistency_classification(&cases))),
        ("calibration invariances", Box::new(|| calibration_invariances(&cases))),
        ("projection oracle", Box::new(projection_oracle)),
        ("graph layer", Box::new(|| graph_layer(&cases))),
        ("scalability sanity", Box::new(scalability)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let t = Instant::now();
        match panic::catch_unwind(AssertUnwindSafe(run)) {
            Ok(detail) => println!("PASS  {name}: {detail} [{:.1}s]", t.elapsed().as_secs_f64()),
            Err(payload) => {
                failed += 1;
                let msg = payload
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panicked".into());
                println!("FAIL  {name}: {msg} [{:.1}s]", t.elapsed().as_secs_f64());
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
