//! Probability intervals as pairs of linear programs.

use std::fmt;

use serde::Serialize;

use crate::error::Error;
use crate::numeric::{solve_lp, Constraint, ConstraintSystem, LinComb, LpOutcome, Rational, Relation, Sense, Var};

/// `[lower, upper]` with `0 ≤ lower ≤ upper ≤ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Interval {
    pub lower: Rational,
    pub upper: Rational,
}

impl Interval {
    pub fn new(lower: Rational, upper: Rational) -> Self {
        debug_assert!(lower <= upper);
        Interval { lower, upper }
    }

    pub fn point(v: Rational) -> Self {
        Interval::new(v.clone(), v)
    }

    pub fn unit() -> Self {
        Interval::new(Rational::zero(), Rational::one())
    }

    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }

    pub fn is_point(&self) -> bool {
        self.lower == self.upper
    }

    /// True when `self ⊆ outer`.
    pub fn nested_in(&self, outer: &Interval) -> bool {
        outer.lower <= self.lower && self.upper <= outer.upper
    }

    /// `"lower upper (dec dec)"` with 12-digit half-even decimals.
    pub fn render(&self) -> String {
        format!(
            "{} {} ({} {})",
            self.lower,
            self.upper,
            self.lower.to_decimal(12),
            self.upper.to_decimal(12)
        )
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

/// An interval together with the optimal points attaining each endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub interval: Interval,
    /// Attains the lower endpoint; listed in the system's scope order.
    pub lower_witness: Vec<Rational>,
    pub upper_witness: Vec<Rational>,
    /// For conditional queries: some extension gives the condition mass 0, and
    /// the bounds range over extensions where it is positive.
    pub condition_may_vanish: bool,
}

fn optimum(system: &ConstraintSystem, objective: &LinComb, sense: Sense) -> Result<(Rational, Vec<Rational>), Error> {
    match solve_lp(system, objective, sense) {
        LpOutcome::Optimal { value, witness } => Ok((value, witness)),
        LpOutcome::Infeasible => Err(Error::Inconsistent),
        LpOutcome::Unbounded => Err(Error::Internal("unbounded probability objective".into())),
    }
}

/// Min and max of `numerator` (or of `numerator / denominator`) over a system.
///
/// Ratios are handled by the Charnes-Cooper substitution `z = t·x`,
/// `denominator(z) = 1`, which is exact whenever the system bounds its
/// unknowns (every probability system here carries a normalization row).
pub fn bounds(
    system: &ConstraintSystem,
    numerator: &LinComb,
    denominator: Option<&LinComb>,
) -> Result<Bounds, Error> {
    let Some(den) = denominator else {
        let (lo, lo_w) = optimum(system, numerator, Sense::Min)?;
        let (hi, hi_w) = optimum(system, numerator, Sense::Max)?;
        return Ok(Bounds {
            interval: Interval::new(lo, hi),
            lower_witness: lo_w,
            upper_witness: hi_w,
            condition_may_vanish: false,
        });
    };
    assert!(den.constant().is_zero(), "denominator must be homogeneous");

    let (den_max, _) = optimum(system, den, Sense::Max)?;
    if !den_max.is_positive() {
        return Err(Error::UndefinedConditional);
    }
    let (den_min, _) = optimum(system, den, Sense::Min)?;

    let scale = Var(system.scope().iter().map(|v| v.0 + 1).max().unwrap_or(0));
    let homogenize = |lc: &LinComb| -> LinComb {
        let mut out = lc.clone();
        let k = out.constant().clone();
        out.add_constant(&-&k);
        out.add_term(scale, &k);
        out
    };
    let mut scope = system.scope().to_vec();
    scope.push(scale);
    let mut cc = ConstraintSystem::new(scope);
    for c in system.constraints() {
        cc.push(Constraint::new(homogenize(&c.lhs), c.relation));
    }
    cc.push(Constraint::nonnegative(scale));
    cc.push(Constraint::compare(den.clone(), Relation::Eq, &Rational::one()));
    let objective = homogenize(numerator);

    let recover = |w: Vec<Rational>| -> Result<Vec<Rational>, Error> {
        let t = w.last().cloned().unwrap_or_else(Rational::zero);
        if !t.is_positive() {
            return Err(Error::Internal("degenerate scaling in conditional bound".into()));
        }
        Ok(w[..w.len() - 1].iter().map(|z| z / &t).collect())
    };
    let (lo, lo_w) = optimum(&cc, &objective, Sense::Min)?;
    let (hi, hi_w) = optimum(&cc, &objective, Sense::Max)?;
    Ok(Bounds {
        interval: Interval::new(lo, hi),
        lower_witness: recover(lo_w)?,
        upper_witness: recover(hi_w)?,
        condition_may_vanish: den_min.is_zero(),
    })
}
