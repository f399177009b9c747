//! Linear combinations, constraints and constraint systems over named unknowns.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Rational;

/// Identifier of an unknown. Meaning is given by the enclosing system's scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var(pub u32);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// `Σ coeff·var + constant`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LinComb {
    terms: BTreeMap<Var, Rational>,
    constant: Rational,
}

impl LinComb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_constant(c: Rational) -> Self {
        LinComb {
            terms: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn var(v: Var) -> Self {
        Self::term(v, Rational::one())
    }

    pub fn term(v: Var, coeff: Rational) -> Self {
        let mut lc = LinComb::new();
        lc.add_term(v, &coeff);
        lc
    }

    /// Sum of the given unknowns with unit coefficients.
    pub fn sum_of(vars: impl IntoIterator<Item = Var>) -> Self {
        let one = Rational::one();
        let mut lc = LinComb::new();
        for v in vars {
            lc.add_term(v, &one);
        }
        lc
    }

    pub fn add_term(&mut self, v: Var, coeff: &Rational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(v).or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&v);
        }
    }

    pub fn add_constant(&mut self, c: &Rational) {
        self.constant += c;
    }

    pub fn coeff(&self, v: Var) -> Rational {
        self.terms.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (Var, &Rational)> + '_ {
        self.terms.iter().map(|(v, c)| (*v, c))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.terms.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no unknown appears.
    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn first_term(&self) -> Option<(Var, &Rational)> {
        self.terms.iter().next().map(|(v, c)| (*v, c))
    }

    pub fn scaled(&self, k: &Rational) -> LinComb {
        if k.is_zero() {
            return LinComb::new();
        }
        LinComb {
            terms: self.terms.iter().map(|(v, c)| (*v, c * k)).collect(),
            constant: &self.constant * k,
        }
    }

    pub fn add_scaled(&mut self, other: &LinComb, k: &Rational) {
        if k.is_zero() {
            return;
        }
        for (v, c) in &other.terms {
            self.add_term(*v, &(c * k));
        }
        self.constant += &(&other.constant * k);
    }

    /// Replaces every occurrence of `v` by `replacement`.
    pub fn substitute(&self, v: Var, replacement: &LinComb) -> LinComb {
        match self.terms.get(&v) {
            None => self.clone(),
            Some(c) => {
                let c = c.clone();
                let mut out = self.clone();
                out.terms.remove(&v);
                out.add_scaled(replacement, &c);
                out
            }
        }
    }

    /// Renames unknowns; colliding images have their coefficients summed.
    pub fn rename(&self, mut f: impl FnMut(Var) -> Var) -> LinComb {
        let mut out = LinComb::from_constant(self.constant.clone());
        for (v, c) in &self.terms {
            out.add_term(f(*v), c);
        }
        out
    }

    pub fn eval(&self, mut value: impl FnMut(Var) -> Rational) -> Rational {
        let mut acc = self.constant.clone();
        for (v, c) in &self.terms {
            acc += &(c * &value(*v));
        }
        acc
    }
}

impl std::ops::Add<&LinComb> for &LinComb {
    type Output = LinComb;
    fn add(self, rhs: &LinComb) -> LinComb {
        let mut out = self.clone();
        out.add_scaled(rhs, &Rational::one());
        out
    }
}

impl std::ops::Sub<&LinComb> for &LinComb {
    type Output = LinComb;
    fn sub(self, rhs: &LinComb) -> LinComb {
        let mut out = self.clone();
        out.add_scaled(rhs, &-Rational::one());
        out
    }
}

impl fmt::Display for LinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.terms {
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{mag}*{v}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if !self.constant.is_zero() {
            let sign = if self.constant.is_negative() { "-" } else { "+" };
            write!(f, " {sign} {}", self.constant.abs())
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Le => "<=",
            Relation::Ge => ">=",
        }
    }

    pub fn holds(self, value: &Rational) -> bool {
        match self {
            Relation::Eq => value.is_zero(),
            Relation::Le => !value.is_positive(),
            Relation::Ge => !value.is_negative(),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `lhs rel 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub lhs: LinComb,
    pub relation: Relation,
}

impl Constraint {
    pub fn new(lhs: LinComb, relation: Relation) -> Self {
        Constraint { lhs, relation }
    }

    /// `lhs rel rhs`, folded into `lhs - rhs rel 0`.
    pub fn compare(lhs: LinComb, relation: Relation, rhs: &Rational) -> Self {
        let mut lhs = lhs;
        lhs.add_constant(&-rhs);
        Constraint { lhs, relation }
    }

    pub fn nonnegative(v: Var) -> Self {
        Constraint::new(LinComb::var(v), Relation::Ge)
    }

    pub fn is_satisfied(&self, value: impl FnMut(Var) -> Rational) -> bool {
        self.relation.holds(&self.lhs.eval(value))
    }

    /// Same constraint with `≤` rewritten as `≥`.
    pub fn as_ge(&self) -> Constraint {
        match self.relation {
            Relation::Le => Constraint::new(self.lhs.scaled(&-Rational::one()), Relation::Ge),
            _ => self.clone(),
        }
    }

    /// Canonical form: `≥` or `=`, leading coefficient of magnitude one
    /// (exactly one for equalities). Constant-only constraints are returned as is.
    pub fn normalized(&self) -> Constraint {
        let c = self.as_ge();
        let Some((_, lead)) = c.lhs.first_term() else {
            return c;
        };
        let k = match c.relation {
            Relation::Eq => lead.recip(),
            _ => lead.abs().recip(),
        };
        Constraint::new(c.lhs.scaled(&k), c.relation)
    }

    pub fn substitute(&self, v: Var, replacement: &LinComb) -> Constraint {
        Constraint::new(self.lhs.substitute(v, replacement), self.relation)
    }

    pub fn rename(&self, f: impl FnMut(Var) -> Var) -> Constraint {
        Constraint::new(self.lhs.rename(f), self.relation)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} 0", self.lhs, self.relation)
    }
}

/// An ordered scope of unknowns together with constraints over them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintSystem {
    scope: Vec<Var>,
    constraints: Vec<Constraint>,
}

impl ConstraintSystem {
    pub fn new(scope: Vec<Var>) -> Self {
        debug_assert!(
            scope.iter().collect::<BTreeSet<_>>().len() == scope.len(),
            "duplicate unknown in scope"
        );
        ConstraintSystem {
            scope,
            constraints: Vec::new(),
        }
    }

    /// Unknowns `0..n`.
    pub fn with_dense_scope(n: usize) -> Self {
        Self::new((0..n as u32).map(Var).collect())
    }

    /// The canonical empty-feasible-set system `-1 ≥ 0`.
    pub fn infeasible(scope: Vec<Var>) -> Self {
        let mut s = Self::new(scope);
        s.constraints.push(Constraint::new(
            LinComb::from_constant(-Rational::one()),
            Relation::Ge,
        ));
        s
    }

    /// True when some constant-only constraint is violated.
    pub fn is_trivially_infeasible(&self) -> bool {
        self.constraints
            .iter()
            .any(|c| c.lhs.is_constant() && !c.relation.holds(c.lhs.constant()))
    }

    pub fn scope(&self) -> &[Var] {
        &self.scope
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// # Panics
    /// If the constraint mentions an unknown outside the scope.
    pub fn push(&mut self, c: Constraint) {
        for v in c.lhs.vars() {
            assert!(self.scope.contains(&v), "unknown {v} outside system scope");
        }
        self.constraints.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = Constraint>) {
        for c in cs {
            self.push(c);
        }
    }

    pub fn add_nonnegativity(&mut self) {
        let vars = self.scope.clone();
        for v in vars {
            self.constraints.push(Constraint::nonnegative(v));
        }
    }

    pub fn position(&self, v: Var) -> Option<usize> {
        self.scope.iter().position(|&w| w == v)
    }

    /// Checks a point given in scope order.
    pub fn is_satisfied_by(&self, point: &[Rational]) -> bool {
        assert_eq!(point.len(), self.scope.len());
        let index: BTreeMap<Var, usize> =
            self.scope.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        self.constraints
            .iter()
            .all(|c| c.is_satisfied(|v| point[index[&v]].clone()))
    }

    pub fn into_parts(self) -> (Vec<Var>, Vec<Constraint>) {
        (self.scope, self.constraints)
    }

    pub fn from_parts(scope: Vec<Var>, constraints: Vec<Constraint>) -> Self {
        let mut s = Self::new(scope);
        s.extend(constraints);
        s
    }

    /// Joins another system over a disjoint or overlapping scope.
    pub fn merged(&self, other: &ConstraintSystem) -> ConstraintSystem {
        let mut scope = self.scope.clone();
        for v in &other.scope {
            if !scope.contains(v) {
                scope.push(*v);
            }
        }
        let mut out = ConstraintSystem::new(scope);
        out.constraints = self.constraints.clone();
        out.constraints.extend(other.constraints.iter().cloned());
        out
    }
}

impl fmt::Display for ConstraintSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.constraints {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
