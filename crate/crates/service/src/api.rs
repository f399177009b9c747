//! JSON request and response bodies. Probabilities travel as exact fraction
//! strings with 12-digit decimal companions.

use probint_core::jointree::GraphConsistency;
use probint_core::model::{ModelDocument, StatementDocument};
use probint_core::{Interval, Rational};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub model: ModelDocument,
    /// Queries to re-evaluate after every mutation; defaults to every single
    /// variable followed by every clique constituent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub watch: Option<Vec<QueryRequest>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryRequest {
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub given: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalsRequest {
    pub queries: Vec<QueryRequest>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalResult {
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub given: Option<String>,
    pub lower: String,
    pub upper: String,
    pub lower_decimal: String,
    pub upper_decimal: String,
    /// Clique that answered the query.
    pub clique: usize,
    pub pinned: bool,
    /// The bounds range over extensions giving `given` positive mass only.
    pub condition_may_vanish: bool,
}

impl IntervalResult {
    pub fn new(request: &QueryRequest, interval: &Interval, clique: usize, condition_may_vanish: bool) -> Self {
        IntervalResult {
            query: request.query.clone(),
            given: request.given.clone(),
            lower: interval.lower.to_string(),
            upper: interval.upper.to_string(),
            lower_decimal: interval.lower.to_decimal(12),
            upper_decimal: interval.upper.to_decimal(12),
            clique,
            pinned: interval.is_point(),
            condition_may_vanish,
        }
    }

    /// The exact interval, parsed back from the fraction strings.
    pub fn interval(&self) -> Interval {
        let parse = |s: &str| s.parse::<Rational>().expect("fraction string");
        Interval::new(parse(&self.lower), parse(&self.upper))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueSummary {
    pub index: usize,
    pub variables: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatorSummary {
    pub a: usize,
    pub b: usize,
    pub variables: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureSummary {
    pub variables: Vec<String>,
    pub edges: Vec<[String; 2]>,
    pub fill_in: Vec<[String; 2]>,
    pub elimination_order: Vec<String>,
    pub cliques: Vec<CliqueSummary>,
    pub separators: Vec<SeparatorSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementView {
    pub id: u64,
    #[serde(flatten)]
    pub statement: StatementDocument,
    pub clique: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyView {
    pub verdict: Verdict,
    pub local: Verdict,
    pub global: Verdict,
    /// Cliques whose own statements contradict each other.
    pub inconsistent_cliques: Vec<usize>,
}

impl From<&GraphConsistency> for ConsistencyView {
    fn from(c: &GraphConsistency) -> Self {
        use Verdict::*;
        let (local, global, cliques) = match c {
            GraphConsistency::LocallyInconsistent { cliques } => (Inconsistent, Inconsistent, cliques.clone()),
            GraphConsistency::GloballyInconsistent => (Consistent, Inconsistent, Vec::new()),
            GraphConsistency::Consistent => (Consistent, Consistent, Vec::new()),
        };
        ConsistencyView {
            verdict: global,
            local,
            global,
            inconsistent_cliques: cliques,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub revision: u64,
    pub structure: StructureSummary,
    pub statements: Vec<StatementView>,
    pub consistency: ConsistencyView,
    /// Withheld while the session is inconsistent.
    pub watched: Option<Vec<IntervalResult>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationView {
    pub revision: u64,
    pub statement_id: u64,
    pub consistency: ConsistencyView,
    pub watched: Option<Vec<IntervalResult>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalsView {
    pub revision: u64,
    pub results: Vec<IntervalResult>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Created,
    Applied,
    Retracted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub revision: u64,
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statement_id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statement: Option<StatementDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryView {
    pub revision: u64,
    pub events: Vec<HistoryEntry>,
}
