//! Partial specifications: the model document, statements, their linear
//! encoding over constituent unknowns, and assignment to cliques.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::events::{index_set, is_valid_name, EventExpr, Scope};
use crate::graph::{build_join_tree, max_cliques, mcs_fill_in, JoinTree, Triangulation, UGraph};
use crate::numeric::{Constraint, LinComb, Rational, Relation, Var};

/// On-disk model document (`.pspec.json`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub variables: Vec<String>,
    #[serde(default)]
    pub edges: Vec<[String; 2]>,
    #[serde(default)]
    pub statements: Vec<StatementDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatementDocument {
    pub prob: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub given: Option<String>,
    pub rel: Relation,
    pub value: String,
}

/// `Pr(event | condition) rel value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub id: usize,
    pub event: EventExpr,
    pub condition: Option<EventExpr>,
    pub relation: Relation,
    pub value: Rational,
}

impl Statement {
    /// Variables of the event and the condition together.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut vs = self.event.variables();
        if let Some(c) = &self.condition {
            vs.extend(c.variables());
        }
        vs
    }

    pub fn to_document(&self) -> StatementDocument {
        StatementDocument {
            prob: self.event.to_string(),
            given: self.condition.as_ref().map(|c| c.to_string()),
            rel: self.relation,
            value: self.value.to_string(),
        }
    }

    /// Validates a statement document against the declared variables.
    pub fn from_document(doc: &StatementDocument, id: usize, variables: &Scope) -> Result<Self, Error> {
        let wrap = |e: Error| Error::Statement {
            statement: id,
            source: Box::new(e),
        };
        let event = EventExpr::parse(&doc.prob).map_err(wrap)?;
        let condition = doc
            .given
            .as_deref()
            .map(EventExpr::parse)
            .transpose()
            .map_err(wrap)?;
        let value: Rational = doc
            .value
            .parse()
            .map_err(|e: crate::numeric::ParseRationalError| wrap(Error::Validation(e.to_string())))?;
        if value.is_negative() || value > Rational::one() {
            return Err(wrap(Error::Validation(format!(
                "value {value} lies outside [0, 1]"
            ))));
        }
        let stmt = Statement {
            id,
            event,
            condition,
            relation: doc.rel,
            value,
        };
        for v in stmt.variables() {
            if !variables.contains(&v) {
                return Err(wrap(Error::UnknownVariable(v)));
            }
        }
        Ok(stmt)
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.condition {
            Some(c) => write!(f, "P({} | {}) {} {}", self.event, c, self.relation, self.value),
            None => write!(f, "P({}) {} {}", self.event, self.relation, self.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialSpecification {
    pub variables: Scope,
    pub imap: UGraph,
    pub statements: Vec<Statement>,
}

impl PartialSpecification {
    pub fn from_document(doc: &ModelDocument) -> Result<Self, Error> {
        let mut seen = BTreeSet::new();
        for v in &doc.variables {
            if !is_valid_name(v) {
                return Err(Error::Validation(format!("invalid variable name `{v}`")));
            }
            if !seen.insert(v) {
                return Err(Error::Validation(format!("duplicate variable `{v}`")));
            }
        }
        if doc.variables.is_empty() {
            return Err(Error::Validation("the model declares no variables".into()));
        }
        let variables = Scope::new(doc.variables.iter().cloned());
        let mut imap = UGraph::new(doc.variables.iter().cloned());
        for [a, b] in &doc.edges {
            imap.add_named_edge(a, b)?;
        }
        let statements = doc
            .statements
            .iter()
            .enumerate()
            .map(|(i, s)| Statement::from_document(s, i, &variables))
            .collect::<Result<_, _>>()?;
        Ok(PartialSpecification {
            variables,
            imap,
            statements,
        })
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            variables: self.variables.names().to_vec(),
            edges: self
                .imap
                .named_edges()
                .into_iter()
                .map(|(a, b)| [a, b])
                .collect(),
            statements: self.statements.iter().map(Statement::to_document).collect(),
        }
    }

    /// Triangulates the I-map and builds its join tree.
    pub fn structure(&self) -> Result<Structure, Error> {
        let triangulation = mcs_fill_in(&self.imap)?;
        let cliques = max_cliques(&triangulation.graph, &triangulation.elimination_order)?;
        let tree = build_join_tree(cliques)?;
        Ok(Structure {
            triangulation,
            tree,
        })
    }

    /// Checks that a query's variables are declared.
    pub fn check_declared(&self, event: &EventExpr) -> Result<(), Error> {
        for v in event.variables() {
            if !self.variables.contains(&v) {
                return Err(Error::UnknownVariable(v));
            }
        }
        Ok(())
    }
}

/// Parses a model document from JSON text.
pub fn parse_model(text: &str) -> Result<PartialSpecification, Error> {
    let doc: ModelDocument = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    PartialSpecification::from_document(&doc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    pub triangulation: Triangulation,
    pub tree: JoinTree,
}

/// Encodes a statement as one linear constraint over the constituents of
/// `scope`, unknown `Var(j)` standing for constituent `j`.
///
/// Conditionals are cross-multiplied: `Pr(e ∧ c) − v·Pr(c) rel 0`.
pub fn linearize(statement: &Statement, scope: &Scope) -> Result<Constraint, Error> {
    let mass = |e: &EventExpr| -> Result<LinComb, Error> {
        Ok(LinComb::sum_of(
            index_set(e, scope)?.members().iter().map(|&j| Var(j as u32)),
        ))
    };
    Ok(match &statement.condition {
        None => Constraint::compare(mass(&statement.event)?, statement.relation, &statement.value),
        Some(cond) => {
            let joint = EventExpr::and(statement.event.clone(), cond.clone());
            let mut lhs = mass(&joint)?;
            lhs.add_scaled(&mass(cond)?, &-&statement.value);
            Constraint::new(lhs, statement.relation)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalizedModel {
    pub tree: JoinTree,
    /// statement id → clique index
    pub assignment: BTreeMap<usize, usize>,
    pub per_clique: Vec<Vec<Statement>>,
}

impl LocalizedModel {
    /// Clique scope with variables in declaration order.
    pub fn clique_scope(&self, clique: usize) -> Scope {
        Scope::new(self.tree.cliques().names(clique))
    }
}

/// Assigns each statement to the lowest-index clique covering all its variables.
pub fn localize(spec: &PartialSpecification, tree: &JoinTree) -> Result<LocalizedModel, Error> {
    let mut assignment = BTreeMap::new();
    let mut per_clique = vec![Vec::new(); tree.len()];
    for s in &spec.statements {
        let vars = s.variables();
        let clique = tree.cliques().covering(&vars).ok_or_else(|| Error::Locality {
            subject: format!("statement {} ({s})", s.id),
            variables: vars.iter().cloned().collect(),
        })?;
        assignment.insert(s.id, clique);
        per_clique[clique].push(s.clone());
    }
    Ok(LocalizedModel {
        tree: tree.clone(),
        assignment,
        per_clique,
    })
}
