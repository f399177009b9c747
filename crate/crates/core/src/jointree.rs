//! Interval computation local to the cliques of a join tree.
//!
//! Every clique holds a constraint system over its own constituents. Adjacent
//! cliques exchange constraint systems over the constituents of their
//! separator: the sender projects its current knowledge onto the separator
//! marginal and the recipient reads the message back through its own
//! marginalization map. A collect pass towards the root followed by a
//! distribute pass away from it leaves every clique with the implications of
//! the whole joint system for its variables, so a clique-local query can be
//! answered from that clique alone.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::Error;
use crate::events::{index_set, marginal_map, EventExpr, MarginalMap, Scope};
use crate::graph::JoinTree;
use crate::interval::{bounds, Bounds};
use crate::model::{linearize, LocalizedModel};
use crate::numeric::{
    is_feasible, project, Constraint, ConstraintSystem, LinComb, Rational, Relation, Var,
};

/// Unit-sum, nonnegative system over `Var(0..2^k)`.
fn simplex(scope: &Scope) -> ConstraintSystem {
    let mut s = ConstraintSystem::with_dense_scope(scope.constituent_count());
    s.push(Constraint::compare(
        LinComb::sum_of(s.scope().to_vec()),
        Relation::Eq,
        &Rational::one(),
    ));
    s
}

fn mass(event: &EventExpr, scope: &Scope, offset: u32) -> Result<LinComb, Error> {
    Ok(LinComb::sum_of(
        index_set(event, scope)?
            .members()
            .iter()
            .map(|&j| Var(offset + j as u32)),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueNode {
    pub index: usize,
    pub scope: Scope,
    /// Normalization, local statements and nonnegativity over `Var(0..2^k)`.
    pub base: ConstraintSystem,
    pub received: Vec<Message>,
}

impl CliqueNode {
    /// Base system plus every received message read through the separator map.
    pub fn knowledge(&self) -> ConstraintSystem {
        let mut s = self.base.clone();
        for m in &self.received {
            s.extend(m.translate_into(&self.scope));
        }
        s
    }
}

/// A constraint system over separator constituents `Var(0..2^s)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub from: usize,
    pub to: usize,
    pub separator: Scope,
    pub system: ConstraintSystem,
}

impl Message {
    pub fn is_infeasible(&self) -> bool {
        self.system.is_trivially_infeasible()
    }

    /// Rewrites the message over a clique's constituents: each separator
    /// unknown becomes the sum of the clique constituents marginalizing onto it.
    pub fn translate_into(&self, clique: &Scope) -> Vec<Constraint> {
        let map = marginal_map(clique, &self.separator)
            .expect("message separator lies inside the recipient clique");
        translate(&self.system, &map)
    }
}

fn translate(system: &ConstraintSystem, map: &MarginalMap) -> Vec<Constraint> {
    system
        .constraints()
        .iter()
        .map(|c| {
            let mut lhs = LinComb::from_constant(c.lhs.constant().clone());
            for (v, k) in c.lhs.terms() {
                for &b in map.row(v.0 as usize) {
                    lhs.add_term(Var(b as u32), k);
                }
            }
            Constraint::new(lhs, c.relation)
        })
        .collect()
}

/// One clique node per join-tree clique with its assigned statements.
pub fn build_local_systems(localized: &LocalizedModel) -> Result<Vec<CliqueNode>, Error> {
    (0..localized.tree.len())
        .map(|i| {
            let scope = localized.clique_scope(i);
            let mut base = simplex(&scope);
            for s in &localized.per_clique[i] {
                base.push(linearize(s, &scope)?);
            }
            base.add_nonnegativity();
            Ok(CliqueNode {
                index: i,
                scope,
                base,
                received: Vec::new(),
            })
        })
        .collect()
}

/// All clique base systems over disjoint unknowns, linked by separator
/// equalities along the join-tree edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarginalJointSystem {
    pub system: ConstraintSystem,
    /// First unknown id of each clique's block.
    pub offsets: Vec<u32>,
    pub scopes: Vec<Scope>,
    /// Number of separator-equality rows.
    pub separator_rows: usize,
}

impl MarginalJointSystem {
    /// Bounds for a query local to some clique, straight from the joint LP.
    pub fn interval(
        &self,
        tree: &JoinTree,
        query: &EventExpr,
        given: Option<&EventExpr>,
    ) -> Result<(usize, Bounds), Error> {
        let clique = covering_clique(tree, query, given)?;
        let scope = &self.scopes[clique];
        let offset = self.offsets[clique];
        let b = match given {
            None => bounds(&self.system, &mass(query, scope, offset)?, None)?,
            Some(g) => bounds(
                &self.system,
                &mass(&EventExpr::and(query.clone(), g.clone()), scope, offset)?,
                Some(&mass(g, scope, offset)?),
            )?,
        };
        Ok((clique, b))
    }
}

pub fn build_marginal_joint_system(nodes: &[CliqueNode], tree: &JoinTree) -> MarginalJointSystem {
    let mut offsets = Vec::with_capacity(nodes.len());
    let mut next = 0u32;
    for n in nodes {
        offsets.push(next);
        next += n.scope.constituent_count() as u32;
    }
    let mut system = ConstraintSystem::with_dense_scope(next as usize);
    for (n, &off) in nodes.iter().zip(&offsets) {
        for c in n.base.constraints() {
            system.push(c.rename(|v| Var(v.0 + off)));
        }
    }
    let mut separator_rows = 0;
    for e in tree.edges() {
        let sep = Scope::new(e.separator.iter().map(|&v| tree.cliques().vertices()[v].clone()));
        let ma = marginal_map(&nodes[e.a].scope, &sep).expect("separator inside clique");
        let mb = marginal_map(&nodes[e.b].scope, &sep).expect("separator inside clique");
        for s in 0..sep.constituent_count() {
            let left = LinComb::sum_of(ma.row(s).iter().map(|&j| Var(offsets[e.a] + j as u32)));
            let right = LinComb::sum_of(mb.row(s).iter().map(|&j| Var(offsets[e.b] + j as u32)));
            system.push(Constraint::new(&left - &right, Relation::Eq));
            separator_rows += 1;
        }
    }
    MarginalJointSystem {
        system,
        offsets,
        scopes: nodes.iter().map(|n| n.scope.clone()).collect(),
        separator_rows,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GraphConsistency {
    LocallyInconsistent { cliques: Vec<usize> },
    GloballyInconsistent,
    Consistent,
}

/// Local check per clique base system, then the marginal joint system.
pub fn check_consistency_wrt_g(nodes: &[CliqueNode], tree: &JoinTree) -> GraphConsistency {
    let bad: Vec<usize> = nodes
        .iter()
        .filter(|n| !is_feasible(&n.base))
        .map(|n| n.index)
        .collect();
    if !bad.is_empty() {
        return GraphConsistency::LocallyInconsistent { cliques: bad };
    }
    if is_feasible(&build_marginal_joint_system(nodes, tree).system) {
        GraphConsistency::Consistent
    } else {
        GraphConsistency::GloballyInconsistent
    }
}

/// Projects the sender's base system, augmented with `incoming`, onto the
/// separator it shares with clique `to`.
pub fn compute_message(
    sender: &CliqueNode,
    to: usize,
    separator: &Scope,
    incoming: &[&Message],
) -> Message {
    let mut knowledge = sender.base.clone();
    for m in incoming {
        knowledge.extend(m.translate_into(&sender.scope));
    }
    let map = marginal_map(&sender.scope, separator).expect("separator inside sender clique");
    let image: Vec<(Var, LinComb)> = map
        .rows()
        .iter()
        .enumerate()
        .map(|(s, row)| (Var(s as u32), LinComb::sum_of(row.iter().map(|&b| Var(b as u32)))))
        .collect();
    Message {
        from: sender.index,
        to,
        separator: separator.clone(),
        system: project(&knowledge, &image),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pass {
    Collect,
    Distribute,
}

/// One transmitted message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub from: usize,
    pub to: usize,
    pub pass: Pass,
    pub constraints: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CalibrationState {
    pub tree: JoinTree,
    pub nodes: Vec<CliqueNode>,
    pub root: usize,
    pub trace: Vec<TraceRecord>,
}

/// Bounds answered by one clique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalBounds {
    pub clique: usize,
    pub bounds: Bounds,
}

fn separator_scope(tree: &JoinTree, a: usize, b: usize) -> Scope {
    let e = tree.edge_between(a, b).expect("adjacent cliques");
    Scope::new(e.separator.iter().map(|&v| tree.cliques().vertices()[v].clone()))
}

fn covering_clique(tree: &JoinTree, query: &EventExpr, given: Option<&EventExpr>) -> Result<usize, Error> {
    let mut vars: BTreeSet<String> = query.variables();
    if let Some(g) = given {
        vars.extend(g.variables());
    }
    for v in &vars {
        if !tree.cliques().vertices().contains(v) {
            return Err(Error::UnknownVariable(v.clone()));
        }
    }
    tree.cliques().covering(&vars).ok_or_else(|| Error::Locality {
        subject: "query".into(),
        variables: vars.into_iter().collect(),
    })
}

struct Scheduler<'a> {
    tree: &'a JoinTree,
    nodes: Vec<CliqueNode>,
    trace: Vec<TraceRecord>,
}

impl Scheduler<'_> {
    fn children(&self, v: usize, parent: Option<usize>) -> Vec<usize> {
        self.tree
            .neighbors(v)
            .into_iter()
            .map(|(w, _)| w)
            .filter(|&w| Some(w) != parent)
            .collect()
    }

    fn send(&mut self, from: usize, to: usize, pass: Pass) {
        let separator = separator_scope(self.tree, from, to);
        let sender = &self.nodes[from];
        let incoming: Vec<&Message> = sender.received.iter().collect();
        let stripped = CliqueNode {
            received: Vec::new(),
            ..sender.clone()
        };
        let msg = compute_message(&stripped, to, &separator, &incoming);
        self.trace.push(TraceRecord {
            from,
            to,
            pass,
            constraints: msg.system.len(),
        });
        self.nodes[to].received.push(msg);
    }

    fn collect(&mut self, v: usize, parent: Option<usize>) {
        for c in self.children(v, parent) {
            self.collect(c, Some(v));
        }
        if let Some(p) = parent {
            self.send(v, p, Pass::Collect);
        }
    }

    fn distribute(&mut self, v: usize, parent: Option<usize>) {
        for c in self.children(v, parent) {
            self.send(v, c, Pass::Distribute);
            self.distribute(c, Some(v));
        }
    }
}

/// Collect towards `root`, then distribute away from it. Children are
/// visited in clique-index order. A node's outgoing message is computed from
/// its base system and everything it has received so far, so nodes that
/// already carry messages (a second round) simply know more.
///
/// # Panics
/// If `root` is not a clique of the tree or `nodes` does not match the tree.
pub fn calibrate(nodes: Vec<CliqueNode>, tree: &JoinTree, root: usize) -> CalibrationState {
    assert!(root < tree.len(), "root {root} is not a clique");
    assert_eq!(nodes.len(), tree.len(), "one node per clique");
    let mut sched = Scheduler {
        tree,
        nodes,
        trace: Vec::new(),
    };
    sched.collect(root, None);
    sched.distribute(root, None);
    CalibrationState {
        tree: tree.clone(),
        nodes: sched.nodes,
        root,
        trace: sched.trace,
    }
}

impl CalibrationState {
    /// A clique's final system: base plus all received messages.
    pub fn augmented_system(&self, clique: usize) -> ConstraintSystem {
        self.nodes[clique].knowledge()
    }

    /// Cliques whose augmented system is empty.
    pub fn infeasible_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| !is_feasible(&self.augmented_system(i)))
            .collect()
    }

    /// Any inconsistency reaches the root during collect and every other node
    /// during distribute, so the root alone decides.
    pub fn is_consistent(&self) -> bool {
        is_feasible(&self.augmented_system(self.root))
    }

    /// Runs both passes again on top of the current state.
    pub fn recalibrate(&self) -> CalibrationState {
        calibrate(self.nodes.clone(), &self.tree, self.root)
    }

    /// Bounds from the lowest-index clique covering the query.
    pub fn local_interval(
        &self,
        query: &EventExpr,
        given: Option<&EventExpr>,
    ) -> Result<LocalBounds, Error> {
        let clique = covering_clique(&self.tree, query, given)?;
        self.local_interval_at(clique, query, given)
    }

    /// Bounds from a chosen clique, which must contain every query variable.
    pub fn local_interval_at(
        &self,
        clique: usize,
        query: &EventExpr,
        given: Option<&EventExpr>,
    ) -> Result<LocalBounds, Error> {
        let node = self
            .nodes
            .get(clique)
            .ok_or_else(|| Error::Validation(format!("no clique {clique}")))?;
        let mut vars = query.variables();
        if let Some(g) = given {
            vars.extend(g.variables());
        }
        let outside: Vec<String> = vars.into_iter().filter(|v| !node.scope.contains(v)).collect();
        if !outside.is_empty() {
            return Err(Error::Validation(format!(
                "query variables {{{}}} lie outside clique {}",
                outside.join(","),
                node.scope
            )));
        }
        let system = node.knowledge();
        let b = match given {
            None => bounds(&system, &mass(query, &node.scope, 0)?, None)?,
            Some(g) => bounds(
                &system,
                &mass(&EventExpr::and(query.clone(), g.clone()), &node.scope, 0)?,
                Some(&mass(g, &node.scope, 0)?),
            )?,
        };
        Ok(LocalBounds { clique, bounds: b })
    }
}
