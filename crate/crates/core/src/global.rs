//! Intervals over the full joint distribution: one unknown per constituent of
//! all `n` variables, ignoring any independence structure.

use crate::error::Error;
use crate::events::{index_set, EventExpr, Scope};
use crate::interval::Bounds;
use crate::model::{linearize, PartialSpecification};
use crate::numeric::{is_feasible, Constraint, ConstraintSystem, LinComb, Rational, Relation, Var};

pub const DEFAULT_VARIABLE_CAP: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

/// Normalization, one row per statement, and nonnegativity over `2^n` unknowns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointSystem {
    pub scope: Scope,
    pub system: ConstraintSystem,
}

impl JointSystem {
    /// Sum of the constituents in the event's index set.
    pub fn mass(&self, event: &EventExpr) -> Result<LinComb, Error> {
        Ok(LinComb::sum_of(
            index_set(event, &self.scope)?.members().iter().map(|&j| Var(j as u32)),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlobalEngine {
    pub variable_cap: usize,
}

impl Default for GlobalEngine {
    fn default() -> Self {
        GlobalEngine {
            variable_cap: DEFAULT_VARIABLE_CAP,
        }
    }
}

impl GlobalEngine {
    pub fn with_cap(variable_cap: usize) -> Self {
        GlobalEngine { variable_cap }
    }

    pub fn build_joint_system(&self, spec: &PartialSpecification) -> Result<JointSystem, Error> {
        let n = spec.variables.len();
        if n > self.variable_cap {
            return Err(Error::SizeCap {
                variables: n,
                cap: self.variable_cap,
            });
        }
        let scope = spec.variables.clone();
        let mut system = ConstraintSystem::with_dense_scope(scope.constituent_count());
        system.push(Constraint::compare(
            LinComb::sum_of(system.scope().to_vec()),
            Relation::Eq,
            &Rational::one(),
        ));
        for s in &spec.statements {
            system.push(linearize(s, &scope)?);
        }
        system.add_nonnegativity();
        Ok(JointSystem { scope, system })
    }

    pub fn check_consistency(&self, spec: &PartialSpecification) -> Result<Verdict, Error> {
        let joint = self.build_joint_system(spec)?;
        Ok(if is_feasible(&joint.system) {
            Verdict::Consistent
        } else {
            Verdict::Inconsistent
        })
    }

    /// Bounds on `Pr(query)` or `Pr(query | given)`; witnesses are full joint
    /// distributions indexed by constituent.
    pub fn interval(
        &self,
        spec: &PartialSpecification,
        query: &EventExpr,
        given: Option<&EventExpr>,
    ) -> Result<Bounds, Error> {
        spec.check_declared(query)?;
        if let Some(g) = given {
            spec.check_declared(g)?;
        }
        let joint = self.build_joint_system(spec)?;
        match given {
            None => crate::interval::bounds(&joint.system, &joint.mass(query)?, None),
            Some(g) => {
                let numerator = joint.mass(&EventExpr::and(query.clone(), g.clone()))?;
                let denominator = joint.mass(g)?;
                crate::interval::bounds(&joint.system, &numerator, Some(&denominator))
            }
        }
    }
}
