//! Observations, parameter grids and curves over them.
//!
//! A grid with `m` points has `m - 1` equal intervals. The uniform base-rate
//! prior attaches to the intervals, so each candidate value carries a prior
//! of `1 / (m - 1)`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::compensated_sum;

/// Tolerance for "sums to one" on distribution curves.
pub const DISTRIBUTION_SUM_TOLERANCE: f64 = 1e-12;

/// A study result: `successes` out of `trials` random selections.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Observation {
    successes: u64,
    trials: u64,
}

impl Observation {
    pub fn new(successes: u64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if successes > trials {
            return Err(Error::invalid(format!(
                "successes ({successes}) exceed trials ({trials})"
            )));
        }
        Ok(Self { successes, trials })
    }

    pub fn successes(&self) -> u64 {
        self.successes
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn failures(&self) -> u64 {
        self.trials - self.successes
    }

    /// Observed proportion `r / n`.
    pub fn proportion(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.successes, self.trials)
    }
}

/// Equally spaced candidate proportions `i / (m - 1)` for `i = 0..m`.
///
/// Values are computed by division on demand, never by accumulation, so
/// every value is the correctly rounded double of its rational and compares
/// equal to the same decimal literal (e.g. `4300 / 10000 == 0.43`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ParameterGrid {
    points: usize,
}

impl ParameterGrid {
    pub fn new(points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::invalid(format!(
                "a grid needs at least 2 points, got {points}"
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn intervals(&self) -> usize {
        self.points - 1
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.intervals() as f64
    }

    /// Base-rate prior carried by each candidate value.
    pub fn prior_per_point(&self) -> f64 {
        1.0 / self.intervals() as f64
    }

    /// The `i`-th candidate value. Panics if `i` is out of range.
    pub fn value(&self, i: usize) -> f64 {
        assert!(i < self.points, "grid index {i} out of range");
        if i == self.intervals() {
            1.0
        } else {
            i as f64 / self.intervals() as f64
        }
    }

    pub fn values(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.value(i))
    }

    /// Index of the grid point nearest to `p`, clamped to the grid.
    pub fn nearest_index(&self, p: f64) -> usize {
        let scaled = (p * self.intervals() as f64).round();
        if scaled <= 0.0 {
            0
        } else {
            (scaled as usize).min(self.intervals())
        }
    }

    /// Index of `p` if it lies on the grid (to within a billionth of a step).
    pub fn index_of(&self, p: f64) -> Option<usize> {
        if !(0.0..=1.0).contains(&p) {
            return None;
        }
        let i = self.nearest_index(p);
        ((self.value(i) - p).abs() <= 1e-9 * self.spacing()).then_some(i)
    }
}

/// Shorthand for [`ParameterGrid::new`].
pub fn make_grid(points: usize) -> Result<ParameterGrid> {
    ParameterGrid::new(points)
}

/// Shorthand for [`ParameterGrid::prior_per_point`].
pub fn prior_per_point(grid: &ParameterGrid) -> f64 {
    grid.prior_per_point()
}

/// The pair `(r/(n+1), (r+1)/(n+1))` bounding the predicted probability that
/// the next member has the attribute.
pub fn induced_pair(obs: &Observation) -> (f64, f64) {
    let denom = (obs.trials + 1) as f64;
    (
        obs.successes as f64 / denom,
        (obs.successes + 1) as f64 / denom,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// Unnormalised values, e.g. `P(data | p)` per grid point.
    Likelihood,
    /// Point masses summing to one.
    Distribution,
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveKind::Likelihood => f.write_str("likelihood"),
            CurveKind::Distribution => f.write_str("distribution"),
        }
    }
}

/// Nonnegative values over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    grid: ParameterGrid,
    values: Vec<f64>,
    kind: CurveKind,
}

impl Curve {
    pub fn new(grid: ParameterGrid, values: Vec<f64>, kind: CurveKind) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::invalid(format!(
                "curve has {} values for a {}-point grid",
                values.len(),
                grid.points()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::invalid(format!(
                "curve value at index {i} is {v}; values must be finite and nonnegative"
            )));
        }
        if kind == CurveKind::Distribution {
            let total = compensated_sum(values.iter().copied());
            if (total - 1.0).abs() > DISTRIBUTION_SUM_TOLERANCE {
                return Err(Error::invalid(format!(
                    "distribution sums to {total}, not 1"
                )));
            }
        }
        Ok(Self { grid, values, kind })
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_parts(grid: ParameterGrid, values: Vec<f64>, kind: CurveKind) -> Self {
        debug_assert_eq!(values.len(), grid.points());
        Self { grid, values, kind }
    }

    /// The uniform distribution: every candidate equally probable.
    pub fn uniform(grid: ParameterGrid) -> Self {
        let mass = 1.0 / grid.points() as f64;
        Self::from_parts(grid, vec![mass; grid.points()], CurveKind::Distribution)
    }

    /// All mass on the grid point nearest to `p`.
    pub fn point_mass(grid: ParameterGrid, p: f64) -> Self {
        let mut values = vec![0.0; grid.points()];
        values[grid.nearest_index(p)] = 1.0;
        Self::from_parts(grid, values, CurveKind::Distribution)
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn kind(&self) -> CurveKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        compensated_sum(self.values.iter().copied())
    }

    /// Value at grid point `p`, or `None` if `p` is not on the grid.
    pub fn value_at(&self, p: f64) -> Option<f64> {
        self.grid.index_of(p).map(|i| self.values[i])
    }

    /// Grid value holding the largest value (the first one on ties).
    pub fn mode(&self) -> f64 {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        self.grid.value(best)
    }

    pub fn mean(&self) -> f64 {
        let total = self.sum();
        let weighted = compensated_sum(
            self.values
                .iter()
                .enumerate()
                .map(|(i, v)| v * self.grid.value(i)),
        );
        weighted / total
    }

    pub(crate) fn expect_kind(&self, expected: CurveKind) -> Result<()> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(Error::WrongCurveKind {
                expected,
                found: self.kind,
            })
        }
    }
}
