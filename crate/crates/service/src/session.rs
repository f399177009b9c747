//! Sessions as immutable snapshots. A mutation derives a fresh snapshot from
//! the current one under the session's write lock and swaps it in; readers
//! clone the `Arc` and never block on a recalibration.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use probint_core::events::{constituent_event, Scope};
use probint_core::graph::JoinTree;
use probint_core::jointree::{build_local_systems, calibrate, check_consistency_wrt_g, CalibrationState, GraphConsistency};
use probint_core::model::{localize, ModelDocument, PartialSpecification, StatementDocument};
use probint_core::{Error as ModelError, EventExpr};
use serde::{Deserialize, Serialize};

use crate::api::{
    Action, CliqueSummary, ConsistencyView, HistoryEntry, IntervalResult, QueryRequest, SeparatorSummary,
    SessionView, StatementView, StructureSummary,
};
use crate::error::ApiError;

/// What a snapshot file holds; everything else is derived.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Persisted {
    pub id: String,
    pub revision: u64,
    pub model: ModelDocument,
    /// Session statement id for each statement of `model`, in order.
    pub statement_ids: Vec<u64>,
    pub next_statement_id: u64,
    pub watch: Vec<QueryRequest>,
    pub history: Vec<HistoryEntry>,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub persisted: Persisted,
    pub structure: StructureSummary,
    pub statement_cliques: Vec<usize>,
    pub consistency: GraphConsistency,
    pub calibration: CalibrationState,
    pub watched: Option<Vec<IntervalResult>>,
}

fn clique_names(tree: &JoinTree) -> Vec<Vec<String>> {
    (0..tree.len()).map(|i| tree.cliques().names(i)).collect()
}

fn summarize(spec: &PartialSpecification) -> Result<(StructureSummary, JoinTree), ModelError> {
    let structure = spec.structure()?;
    let names = spec.variables.names();
    let pair = |(a, b): (usize, usize)| [names[a].clone(), names[b].clone()];
    let tree = structure.tree;
    let summary = StructureSummary {
        variables: names.to_vec(),
        edges: spec.imap.edges().map(pair).collect(),
        fill_in: structure.triangulation.added_edges.iter().copied().map(pair).collect(),
        elimination_order: structure
            .triangulation
            .elimination_order
            .iter()
            .map(|&v| names[v].clone())
            .collect(),
        cliques: clique_names(&tree)
            .into_iter()
            .enumerate()
            .map(|(index, variables)| CliqueSummary { index, variables })
            .collect(),
        separators: tree
            .edges()
            .iter()
            .map(|e| SeparatorSummary {
                a: e.a,
                b: e.b,
                variables: e.separator.iter().map(|&v| names[v].clone()).collect(),
            })
            .collect(),
    };
    Ok((summary, tree))
}

/// Every single variable, then every constituent of every clique.
pub fn default_watch(spec: &PartialSpecification, tree: &JoinTree) -> Vec<QueryRequest> {
    let mut out: Vec<QueryRequest> = spec
        .variables
        .names()
        .iter()
        .map(|v| QueryRequest {
            query: v.clone(),
            given: None,
        })
        .collect();
    for names in clique_names(tree) {
        let scope = Scope::new(names);
        for i in 0..scope.constituent_count() {
            out.push(QueryRequest {
                query: constituent_event(i, &scope).to_string(),
                given: None,
            });
        }
    }
    out
}

fn parse_query(text: &str) -> Result<EventExpr, ApiError> {
    Ok(text.parse::<EventExpr>()?)
}

impl Snapshot {
    /// Rebuilds structure, localization, consistency and calibration.
    pub fn derive(persisted: Persisted) -> Result<Snapshot, ApiError> {
        let spec = PartialSpecification::from_document(&persisted.model)?;
        let (structure, tree) = summarize(&spec)?;
        let localized = localize(&spec, &tree).map_err(|error| ApiError::Locality {
            error,
            cliques: clique_names(&tree),
        })?;
        let statement_cliques = (0..spec.statements.len()).map(|i| localized.assignment[&i]).collect();
        let nodes = build_local_systems(&localized)?;
        let consistency = check_consistency_wrt_g(&nodes, &tree);
        let calibration = calibrate(nodes, &tree, 0);
        let mut snapshot = Snapshot {
            persisted,
            structure,
            statement_cliques,
            consistency,
            calibration,
            watched: None,
        };
        if snapshot.is_consistent() {
            snapshot.watched = Some(snapshot.intervals(&snapshot.persisted.watch)?);
        }
        Ok(snapshot)
    }

    pub fn id(&self) -> &str {
        &self.persisted.id
    }

    pub fn revision(&self) -> u64 {
        self.persisted.revision
    }

    pub fn is_consistent(&self) -> bool {
        self.consistency == GraphConsistency::Consistent
    }

    pub fn consistency_view(&self) -> ConsistencyView {
        ConsistencyView::from(&self.consistency)
    }

    pub fn intervals(&self, queries: &[QueryRequest]) -> Result<Vec<IntervalResult>, ApiError> {
        if !self.is_consistent() {
            return Err(ApiError::Inconsistent);
        }
        queries
            .iter()
            .map(|q| {
                let event = parse_query(&q.query)?;
                let given = q.given.as_deref().map(parse_query).transpose()?;
                let b = self
                    .calibration
                    .local_interval(&event, given.as_ref())
                    .map_err(|error| match error {
                        ModelError::Locality { .. } => ApiError::Locality {
                            error,
                            cliques: clique_names(&self.calibration.tree),
                        },
                        e => ApiError::Model(e),
                    })?;
                Ok(IntervalResult::new(q, &b.bounds.interval, b.clique, b.bounds.condition_may_vanish))
            })
            .collect()
    }

    pub fn statements(&self) -> Vec<StatementView> {
        self.persisted
            .statement_ids
            .iter()
            .zip(&self.persisted.model.statements)
            .zip(&self.statement_cliques)
            .map(|((&id, s), &clique)| StatementView {
                id,
                statement: s.clone(),
                clique,
            })
            .collect()
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            id: self.id().to_string(),
            revision: self.revision(),
            structure: self.structure.clone(),
            statements: self.statements(),
            consistency: self.consistency_view(),
            watched: self.watched.clone(),
        }
    }

    /// The next state with `statement` appended, or the error that rejects it.
    pub fn apply(&self, statement: StatementDocument) -> Result<(Snapshot, u64), ApiError> {
        let mut p = self.persisted.clone();
        let sid = p.next_statement_id;
        p.next_statement_id += 1;
        p.revision += 1;
        p.model.statements.push(statement.clone());
        p.statement_ids.push(sid);
        p.history.push(HistoryEntry {
            revision: p.revision,
            action: Action::Applied,
            statement_id: Some(sid),
            statement: Some(statement),
        });
        // the client knows which statement it sent; drop the positional wrapper
        let next = Snapshot::derive(p).map_err(|e| match e {
            ApiError::Model(ModelError::Statement { source, .. }) => ApiError::Model(*source),
            e => e,
        })?;
        Ok((next, sid))
    }

    pub fn retract(&self, sid: u64) -> Result<Snapshot, ApiError> {
        let position = self
            .persisted
            .statement_ids
            .iter()
            .position(|&s| s == sid)
            .ok_or(ApiError::UnknownStatement(sid))?;
        let mut p = self.persisted.clone();
        p.revision += 1;
        let removed = p.model.statements.remove(position);
        p.statement_ids.remove(position);
        p.history.push(HistoryEntry {
            revision: p.revision,
            action: Action::Retracted,
            statement_id: Some(sid),
            statement: Some(removed),
        });
        Snapshot::derive(p)
    }
}

/// A fresh session at revision 0.
pub fn create(id: String, model: ModelDocument, watch: Option<Vec<QueryRequest>>) -> Result<Snapshot, ApiError> {
    let spec = PartialSpecification::from_document(&model)?;
    let watch = match watch {
        Some(w) => w,
        None => default_watch(&spec, &summarize(&spec)?.1),
    };
    let n = model.statements.len() as u64;
    Snapshot::derive(Persisted {
        id,
        revision: 0,
        model,
        statement_ids: (0..n).collect(),
        next_statement_id: n,
        watch,
        history: vec![HistoryEntry {
            revision: 0,
            action: Action::Created,
            statement_id: None,
            statement: None,
        }],
    })
}

pub struct SessionEntry {
    /// Serializes mutations of this session.
    pub write: tokio::sync::Mutex<()>,
    current: RwLock<Arc<Snapshot>>,
}

impl SessionEntry {
    fn new(snapshot: Snapshot) -> Self {
        SessionEntry {
            write: tokio::sync::Mutex::new(()),
            current: RwLock::new(Arc::new(snapshot)),
        }
    }

    pub fn current(&self) -> Arc<Snapshot> {
        self.current.read().expect("snapshot lock").clone()
    }

    pub fn replace(&self, snapshot: Snapshot) -> Arc<Snapshot> {
        let snapshot = Arc::new(snapshot);
        *self.current.write().expect("snapshot lock") = snapshot.clone();
        snapshot
    }
}

pub struct Store {
    sessions: RwLock<HashMap<String, Arc<SessionEntry>>>,
    state_dir: Option<PathBuf>,
}

impl Store {
    pub fn in_memory() -> Self {
        Store {
            sessions: RwLock::new(HashMap::new()),
            state_dir: None,
        }
    }

    /// Store backed by `dir`, reloading every snapshot already there.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, ApiError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        let mut sessions = HashMap::new();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        paths.sort();
        for path in paths.into_iter().filter(|p| p.extension().is_some_and(|e| e == "json")) {
            let text = std::fs::read_to_string(&path)?;
            let persisted: Persisted = serde_json::from_str(&text)
                .map_err(|e| ApiError::BadRequest(format!("{}: {e}", path.display())))?;
            let snapshot = Snapshot::derive(persisted)?;
            sessions.insert(snapshot.id().to_string(), Arc::new(SessionEntry::new(snapshot)));
        }
        Ok(Store {
            sessions: RwLock::new(sessions),
            state_dir: Some(dir),
        })
    }

    pub fn get(&self, id: &str) -> Result<Arc<SessionEntry>, ApiError> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::UnknownSession(id.to_string()))
    }

    pub fn insert(&self, snapshot: Snapshot) -> Result<Arc<Snapshot>, ApiError> {
        self.persist(&snapshot)?;
        let entry = Arc::new(SessionEntry::new(snapshot));
        let current = entry.current();
        self.sessions
            .write()
            .expect("session map lock")
            .insert(current.id().to_string(), entry);
        Ok(current)
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the snapshot file when a state directory is configured.
    pub fn persist(&self, snapshot: &Snapshot) -> Result<(), ApiError> {
        let Some(dir) = &self.state_dir else {
            return Ok(());
        };
        write_atomically(&dir.join(format!("{}.json", snapshot.id())), &snapshot.persisted)?;
        Ok(())
    }
}

fn write_atomically(path: &Path, value: &Persisted) -> std::io::Result<()> {
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, serde_json::to_vec_pretty(value).map_err(std::io::Error::other)?)?;
    std::fs::rename(tmp, path)
}
