//! Frequentist posteriors: normalisation under the uniform base-rate prior
//! and range, tail, interval and point queries on the result.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Curve, CurveKind, Observation, ParameterGrid};
use crate::likelihood::{binomial_pmf, likelihood_curve};
use crate::special::{compensated_sum, ln_binomial_pmf};

/// Which side of a threshold a tail covers. Both include the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AtOrBelow,
    AtOrAbove,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::AtOrBelow => Direction::AtOrAbove,
            Direction::AtOrAbove => Direction::AtOrBelow,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::AtOrBelow => f.write_str("at_or_below"),
            Direction::AtOrAbove => f.write_str("at_or_above"),
        }
    }
}

/// An interval of parameter values with explicit bound inclusivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeSpec {
    lower: f64,
    upper: f64,
    lower_inclusive: bool,
    upper_inclusive: bool,
}

impl RangeSpec {
    pub fn new(
        lower: f64,
        upper: f64,
        lower_inclusive: bool,
        upper_inclusive: bool,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&lower) || !(0.0..=1.0).contains(&upper) {
            return Err(Error::invalid(format!(
                "range bounds must lie in [0, 1], got {lower}:{upper}"
            )));
        }
        if lower > upper {
            return Err(Error::invalid(format!(
                "range lower bound {lower} exceeds upper bound {upper}"
            )));
        }
        Ok(Self {
            lower,
            upper,
            lower_inclusive,
            upper_inclusive,
        })
    }

    /// `[lower, upper]`
    pub fn closed(lower: f64, upper: f64) -> Result<Self> {
        Self::new(lower, upper, true, true)
    }

    /// `[0, 1]`
    pub fn full() -> Self {
        Self {
            lower: 0.0,
            upper: 1.0,
            lower_inclusive: true,
            upper_inclusive: true,
        }
    }

    /// The one-sided range a tail query covers.
    pub fn tail(threshold: f64, direction: Direction) -> Result<Self> {
        match direction {
            Direction::AtOrBelow => Self::closed(0.0, threshold),
            Direction::AtOrAbove => Self::closed(threshold, 1.0),
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn lower_inclusive(&self) -> bool {
        self.lower_inclusive
    }

    pub fn upper_inclusive(&self) -> bool {
        self.upper_inclusive
    }

    pub fn contains(&self, p: f64) -> bool {
        let above = if self.lower_inclusive {
            p >= self.lower
        } else {
            p > self.lower
        };
        let below = if self.upper_inclusive {
            p <= self.upper
        } else {
            p < self.upper
        };
        above && below
    }
}

impl fmt::Display for RangeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lower_inclusive { '[' } else { '(' },
            self.lower,
            self.upper,
            if self.upper_inclusive { ']' } else { ')' },
        )
    }
}

/// Divides every value by the total, giving the posterior under uniform
/// base-rate priors. Distribution inputs are renormalised.
pub fn normalize(curve: &Curve) -> Result<Curve> {
    let total = curve.sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::DegenerateEvidence(
            "likelihood is zero at every grid point".into(),
        ));
    }
    let values = curve.values().iter().map(|v| v / total).collect();
    Ok(Curve::from_parts(
        *curve.grid(),
        values,
        CurveKind::Distribution,
    ))
}

/// Frequentist posterior of `obs` on `grid`.
pub fn posterior(obs: &Observation, grid: &ParameterGrid) -> Result<Curve> {
    normalize(&likelihood_curve(obs, grid))
}

/// Posterior mass on grid points inside `range`.
pub fn range_probability(dist: &Curve, range: &RangeSpec) -> Result<f64> {
    dist.expect_kind(CurveKind::Distribution)?;
    let grid = dist.grid();
    Ok(compensated_sum(
        dist.values()
            .iter()
            .enumerate()
            .filter(|(i, _)| range.contains(grid.value(*i)))
            .map(|(_, v)| *v),
    ))
}

/// Posterior mass at or beyond `threshold` in `direction`.
pub fn tail_probability(dist: &Curve, threshold: f64, direction: Direction) -> Result<f64> {
    range_probability(dist, &RangeSpec::tail(threshold, direction)?)
}

/// Equal-tail interval: the narrowest grid-aligned `[lo, hi]` leaving at most
/// `(1 - mass) / 2` strictly below `lo` and at most that much strictly above
/// `hi`.
pub fn replication_interval(dist: &Curve, mass: f64) -> Result<RangeSpec> {
    dist.expect_kind(CurveKind::Distribution)?;
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::invalid(format!(
            "interval mass must lie strictly between 0 and 1, got {mass}"
        )));
    }
    let per_tail = (1.0 - mass) / 2.0;
    let values = dist.values();
    let last = values.len() - 1;

    // largest lo with mass(< lo) <= per_tail
    let mut lo = 0;
    let mut below = 0.0;
    while lo < last && below + values[lo] <= per_tail {
        below += values[lo];
        lo += 1;
    }

    // smallest hi with mass(> hi) <= per_tail
    let mut hi = last;
    let mut above = 0.0;
    while hi > 0 && above + values[hi] <= per_tail {
        above += values[hi];
        hi -= 1;
    }

    // the two tails together hold less than the total mass
    debug_assert!(lo <= hi);
    let grid = dist.grid();
    RangeSpec::closed(grid.value(lo), grid.value(hi))
}

/// Posterior probability of `p_a` against `p_b` with equal priors:
/// `L(p_a) / (L(p_a) + L(p_b))`, evaluated from the log-likelihood gap.
pub fn two_hypothesis_posterior(obs: &Observation, p_a: f64, p_b: f64) -> Result<f64> {
    for (name, p) in [("p_a", p_a), ("p_b", p_b)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!(
                "{name} must lie in [0, 1], got {p}"
            )));
        }
    }
    let la = ln_binomial_pmf(obs.successes(), obs.trials(), p_a);
    let lb = ln_binomial_pmf(obs.successes(), obs.trials(), p_b);
    match (la.is_finite(), lb.is_finite()) {
        (false, false) => Err(Error::DegenerateEvidence(format!(
            "{obs} is impossible under both {p_a} and {p_b}"
        ))),
        (true, false) => Ok(1.0),
        (false, true) => Ok(0.0),
        (true, true) => Ok(1.0 / (1.0 + (lb - la).exp())),
    }
}

/// Bayes rule for a single event: `prior * likelihood / marginal`.
pub fn scalar_bayes(prior: f64, likelihood: f64, marginal: f64) -> Result<f64> {
    for (name, v) in [
        ("prior", prior),
        ("likelihood", likelihood),
        ("marginal", marginal),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!(
                "{name} must lie in [0, 1], got {v}"
            )));
        }
    }
    if marginal == 0.0 {
        return Err(Error::invalid("marginal probability must be positive"));
    }
    let joint = prior * likelihood;
    if joint > marginal + 1e-12 {
        return Err(Error::InconsistentInputs(format!(
            "joint probability {joint} exceeds marginal {marginal}"
        )));
    }
    Ok((joint / marginal).min(1.0))
}

/// Re-expresses a distribution on another grid.
///
/// Each source point's mass is spread uniformly over its cell
/// `[p - h/2, p + h/2]`; the target point receives the mass falling in its
/// own cell, and the result is renormalised. Range probabilities are
/// preserved up to the width of one cell.
pub fn rescale_grid(dist: &Curve, new_grid: &ParameterGrid) -> Result<Curve> {
    dist.expect_kind(CurveKind::Distribution)?;
    let old = dist.grid();
    let old_h = old.spacing();
    let masses = dist.values();

    // cumulative mass at the old cell edges: edges[i] is the lower edge of cell i
    let mut edges = Vec::with_capacity(masses.len() + 1);
    let mut acc = 0.0;
    edges.push(0.0);
    for m in masses {
        acc += m;
        edges.push(acc);
    }
    let cdf = |x: f64| -> f64 {
        let pos = x / old_h + 0.5;
        if pos <= 0.0 {
            return 0.0;
        }
        let cell = pos.floor() as usize;
        if cell >= masses.len() {
            return edges[masses.len()];
        }
        edges[cell] + masses[cell] * (pos - cell as f64)
    };

    let half = new_grid.spacing() / 2.0;
    let values: Vec<f64> = new_grid
        .values()
        .map(|p| (cdf(p + half) - cdf(p - half)).max(0.0))
        .collect();
    normalize(&Curve::from_parts(*new_grid, values, CurveKind::Likelihood))
}

/// Maximum gap between the normalised likelihood of `obs` and the binomial
/// distribution of outcomes `k / n` at the observed proportion.
///
/// The posterior lives on the `n + 2` point grid whose `n + 1` intervals match
/// the `n + 1` possible outcomes; it is read at each outcome proportion
/// `k / n` by linear interpolation and compared with `binomial_pmf(k; n, r/n)`.
pub fn binomial_identity_divergence(obs: &Observation) -> Result<f64> {
    let n = obs.trials();
    let grid = ParameterGrid::new(n as usize + 2)?;
    let post = posterior(obs, &grid)?;
    let observed = obs.proportion();
    let mut worst: f64 = 0.0;
    for k in 0..=n {
        let x = k as f64 / n as f64;
        let gap = (interpolate(&post, x) - binomial_pmf(k, n, observed)?).abs();
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// Piecewise-linear reading of a curve at an arbitrary `x` in `[0, 1]`.
pub fn interpolate(curve: &Curve, x: f64) -> f64 {
    let grid = curve.grid();
    let values = curve.values();
    let pos = (x * grid.intervals() as f64).clamp(0.0, grid.intervals() as f64);
    let i = (pos.floor() as usize).min(grid.intervals() - 1);
    let t = pos - i as f64;
    values[i] * (1.0 - t) + values[i + 1] * t
}
