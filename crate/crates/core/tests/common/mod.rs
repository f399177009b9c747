#![allow(dead_code)]

pub mod graphs;
pub mod polytopes;

use probint_core::events::EventExpr;
use probint_core::graph::{max_cliques, mcs_fill_in, UGraph};
use probint_core::model::{ModelDocument, PartialSpecification, StatementDocument};
use probint_core::numeric::{Relation, Rational};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone)]
pub struct Query {
    pub event: EventExpr,
    pub given: Option<EventExpr>,
}

/// A random model whose statements all hold in `truth`.
#[derive(Debug, Clone)]
pub struct Case {
    pub seed: u64,
    pub names: Vec<String>,
    pub edges: Vec<[String; 2]>,
    pub cliques: Vec<Vec<String>>,
    /// Joint distribution over all variables; bit `j` of the index is variable `j`.
    pub truth: Vec<Rational>,
    pub statements: Vec<StatementDocument>,
    pub queries: Vec<Query>,
}

impl Case {
    pub fn document(&self, statements: &[StatementDocument]) -> ModelDocument {
        ModelDocument {
            variables: self.names.clone(),
            edges: self.edges.clone(),
            statements: statements.to_vec(),
        }
    }

    pub fn spec(&self) -> PartialSpecification {
        self.spec_with(&self.statements)
    }

    pub fn spec_with(&self, statements: &[StatementDocument]) -> PartialSpecification {
        PartialSpecification::from_document(&self.document(statements)).expect("generated model is valid")
    }

    /// Probability of `event` under `truth`, by evaluating it on every full assignment.
    pub fn prob(&self, event: &EventExpr) -> Rational {
        prob_under(&self.names, &self.truth, event)
    }

    /// Every constituent of every clique pinned to its true marginal.
    pub fn pinning_statements(&self) -> Vec<StatementDocument> {
        let mut out = Vec::new();
        for clique in &self.cliques {
            for mask in 0..(1usize << clique.len()) {
                let text = clique
                    .iter()
                    .enumerate()
                    .map(|(i, v)| if mask >> i & 1 == 1 { v.clone() } else { format!("!{v}") })
                    .collect::<Vec<_>>()
                    .join(" & ");
                let value = self.prob(&text.parse().unwrap());
                out.push(statement(&text, None, Relation::Eq, &value));
            }
        }
        out
    }
}

pub fn prob_under(names: &[String], truth: &[Rational], event: &EventExpr) -> Rational {
    let mut total = Rational::zero();
    for (index, p) in truth.iter().enumerate() {
        let holds = event.eval(&|v: &str| {
            let j = names.iter().position(|n| n == v).expect("declared variable");
            index >> j & 1 == 1
        });
        if holds {
            total += p;
        }
    }
    total
}

pub fn statement(prob: &str, given: Option<&str>, rel: Relation, value: &Rational) -> StatementDocument {
    StatementDocument {
        prob: prob.to_string(),
        given: given.map(str::to_string),
        rel,
        value: value.to_string(),
    }
}

pub fn random_event(rng: &mut TestRng, vars: &[String], depth: u32) -> EventExpr {
    if depth == 0 || rng.gen_bool(0.3) {
        let v = EventExpr::var(vars.choose(rng).unwrap().clone());
        return if rng.gen_bool(0.4) { EventExpr::negate(v) } else { v };
    }
    let a = random_event(rng, vars, depth - 1);
    let b = random_event(rng, vars, depth - 1);
    let e = if rng.gen_bool(0.5) { EventExpr::and(a, b) } else { EventExpr::or(a, b) };
    if rng.gen_bool(0.15) {
        EventExpr::negate(e)
    } else {
        e
    }
}

fn random_subset(rng: &mut TestRng, clique: &[String]) -> Vec<String> {
    let k = rng.gen_range(1..=clique.len());
    let mut vs = clique.to_vec();
    vs.shuffle(rng);
    vs.truncate(k);
    vs
}

/// A connected graph on `n` vertices: a random tree plus a few extra edges.
pub fn random_connected_edges(rng: &mut TestRng, n: usize, extra: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((rng.gen_range(0..i), i));
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            let e = (a.min(b), a.max(b));
            if !edges.contains(&e) {
                edges.push(e);
            }
        }
    }
    edges
}

fn random_truth(rng: &mut TestRng, n: usize) -> Vec<Rational> {
    loop {
        let w: Vec<i64> = (0..1usize << n)
            .map(|_| if rng.gen_bool(0.25) { 0 } else { rng.gen_range(1..=4) })
            .collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.into_iter().map(|x| Rational::new(x, total)).collect();
        }
    }
}

const SLACKS: [(i64, i64); 4] = [(0, 1), (1, 20), (1, 10), (1, 4)];

fn clamp01(v: Rational) -> Rational {
    v.max(Rational::zero()).min(Rational::one())
}

fn random_statement(rng: &mut TestRng, case: &Case) -> StatementDocument {
    let clique = case.cliques.choose(rng).unwrap();
    let vars = random_subset(rng, clique);
    let event = random_event(rng, &vars, 2);
    let (s_num, s_den) = *SLACKS.choose(rng).unwrap();
    let slack = Rational::new(s_num, s_den);
    let rel = *[Relation::Eq, Relation::Le, Relation::Ge].choose(rng).unwrap();
    let adjust = |p: Rational| match rel {
        Relation::Eq => p,
        Relation::Le => clamp01(&p + &slack),
        Relation::Ge => clamp01(&p - &slack),
    };
    if rng.gen_bool(0.3) {
        let cond_vars = random_subset(rng, clique);
        for _ in 0..8 {
            let given = random_event(rng, &cond_vars, 1);
            let pg = case.prob(&given);
            if pg.is_positive() {
                let ratio = case.prob(&EventExpr::and(event.clone(), given.clone())) / pg;
                return statement(&event.to_string(), Some(&given.to_string()), rel, &adjust(ratio));
            }
        }
    }
    statement(&event.to_string(), None, rel, &adjust(case.prob(&event)))
}

fn random_query(rng: &mut TestRng, case: &Case) -> Query {
    let clique = case.cliques.choose(rng).unwrap();
    let vars = random_subset(rng, clique);
    let event = random_event(rng, &vars, 2);
    if rng.gen_bool(0.3) {
        let cond_vars = random_subset(rng, clique);
        for _ in 0..8 {
            let given = random_event(rng, &cond_vars, 1);
            if case.prob(&given).is_positive() {
                return Query {
                    event,
                    given: Some(given),
                };
            }
        }
    }
    Query { event, given: None }
}

/// Model with 3 to 9 variables, triangulated cliques of at most 4 variables,
/// statements drawn from a hidden distribution, and clique-local queries.
pub fn random_case(seed: u64) -> Case {
    random_case_sized(seed, 3, 9, 12)
}

pub fn random_case_sized(seed: u64, min_vars: usize, max_vars: usize, queries: usize) -> Case {
    let mut rng = rng(seed);
    let n = rng.gen_range(min_vars..=max_vars);
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let (edges, cliques) = loop {
        let extra = rng.gen_range(0..=n / 2 + 1);
        let edges = random_connected_edges(&mut rng, n, extra);
        let mut g = UGraph::new(names.clone());
        for &(a, b) in &edges {
            g.add_edge(a, b);
        }
        let tri = mcs_fill_in(&g).expect("connected");
        let cs = max_cliques(&tri.graph, &tri.elimination_order).expect("perfect ordering");
        if cs.cliques().iter().all(|c| c.len() <= 4) {
            let cliques = (0..cs.len()).map(|i| cs.names(i)).collect();
            break (edges, cliques);
        }
    };
    let mut case = Case {
        seed,
        edges: edges.iter().map(|&(a, b)| [names[a].clone(), names[b].clone()]).collect(),
        names,
        cliques,
        truth: random_truth(&mut rng, n),
        statements: Vec::new(),
        queries: Vec::new(),
    };
    let count = rng.gen_range(2..=2 * n);
    case.statements = (0..count).map(|_| random_statement(&mut rng, &case)).collect();
    case.queries = (0..queries).map(|_| random_query(&mut rng, &case)).collect();
    case
}
