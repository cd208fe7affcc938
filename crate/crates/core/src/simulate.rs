//! Monte Carlo checks of the random sampling model.
//!
//! Random numbers come from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64(seed)`. Trial `t` reads the four 32-bit words starting at
//! word position `4 t` of a fixed stream, so every trial's draws depend only
//! on `(seed, t)`. Trials are split into fixed-size chunks that run on the
//! rayon pool and are merged by integer addition, which makes reports
//! identical for any number of worker threads.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::compare::{exact_binomial_p_value, Direction};
use crate::error::{Error, Result};
use crate::grid::{Observation, ParameterGrid};
use crate::posterior::posterior;
use crate::special::ln_binomial_pmf;

/// Conditioning cells with fewer samples are reported but not scored.
pub const MIN_CELL_SAMPLES: u64 = 1000;

const WORDS_PER_TRIAL: u128 = 4;
const CHUNK_TRIALS: u64 = 1 << 16;
const CALIBRATION_STREAM: u64 = 0;
const THRESHOLD_STREAM: u64 = 1;
/// Largest CDF table (grid points x outcomes) kept in memory.
const MAX_TABLE_ENTRIES: usize = 1 << 25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub grid_points: usize,
    /// Selections per simulated study.
    pub trials_n: u64,
    /// Number of simulated studies.
    pub num_trials: u64,
    pub seed: u64,
    pub significance_null: Option<f64>,
    pub significance_alpha: Option<f64>,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 {
            return Err(Error::invalid("grid_points must be at least 2"));
        }
        if self.trials_n < 1 {
            return Err(Error::invalid("trials_n must be at least 1"));
        }
        if self.num_trials < 1 {
            return Err(Error::invalid("num_trials must be at least 1"));
        }
        if let Some(null) = self.significance_null {
            if !(0.0..=1.0).contains(&null) {
                return Err(Error::invalid(format!(
                    "significance_null must lie in [0, 1], got {null}"
                )));
            }
        }
        if let Some(alpha) = self.significance_alpha {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::invalid(format!(
                    "significance_alpha must lie in (0, 1), got {alpha}"
                )));
            }
        }
        Ok(())
    }
}

/// Simulated studies that produced one particular success count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationCell {
    pub successes: u64,
    pub samples: u64,
    /// How often each grid point was the true value, in grid order.
    pub counts: Vec<u64>,
    /// Largest point mass of the analytic posterior for this cell.
    pub analytic_max_mass: f64,
    /// Max absolute gap between empirical and analytic posterior.
    pub max_abs_deviation: f64,
    /// `samples >= MIN_CELL_SAMPLES`
    pub included: bool,
}

impl CalibrationCell {
    pub fn empirical(&self) -> Vec<f64> {
        let total = self.samples as f64;
        self.counts.iter().map(|c| *c as f64 / total).collect()
    }

    /// Binomial standard error of the empirical frequency at the analytic mode.
    pub fn largest_mass_standard_error(&self) -> f64 {
        let p = self.analytic_max_mass;
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub config: SimulationConfig,
    /// Cells with at least one sample, by increasing success count.
    pub cells: Vec<CalibrationCell>,
    /// Worst deviation over included cells; `None` if no cell qualifies.
    pub max_abs_deviation: Option<f64>,
    /// Number of studies with each success count `0..=trials_n`.
    pub outcome_counts: Vec<u64>,
}

impl CalibrationReport {
    pub fn cell(&self, successes: u64) -> Option<&CalibrationCell> {
        self.cells.iter().find(|c| c.successes == successes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignificanceBoundary {
    /// Smallest success count whose one-sided exact P-value is at most alpha.
    pub critical_successes: u64,
    /// True proportion at which a repeat study reaches `critical_successes`
    /// exactly half the time.
    pub boundary_p: f64,
}

fn uniform01(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn uniform_index(word: u64, len: usize) -> usize {
    ((u128::from(word) * len as u128) >> 64) as usize
}

fn stream_at(seed: u64, stream: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(trial) * WORDS_PER_TRIAL);
    rng
}

/// Inverse-CDF sampling of binomial outcomes for each grid point.
enum OutcomeSampler {
    Table {
        outcomes: usize,
        cdf: Vec<f64>,
    },
    Direct {
        trials: u64,
        probabilities: Vec<f64>,
    },
}

impl OutcomeSampler {
    fn new(trials: u64, probabilities: Vec<f64>) -> Self {
        let outcomes = trials as usize + 1;
        if probabilities.len().saturating_mul(outcomes) > MAX_TABLE_ENTRIES {
            return OutcomeSampler::Direct {
                trials,
                probabilities,
            };
        }
        let cdf = probabilities
            .par_iter()
            .flat_map_iter(|&p| {
                let mut acc = 0.0;
                let mut row: Vec<f64> = (0..=trials)
                    .map(|k| {
                        acc += ln_binomial_pmf(k, trials, p).exp();
                        acc
                    })
                    .collect();
                row[outcomes - 1] = 1.0;
                row
            })
            .collect();
        OutcomeSampler::Table { outcomes, cdf }
    }

    fn sample(&self, point: usize, u: f64) -> u64 {
        match self {
            OutcomeSampler::Table { outcomes, cdf } => {
                let row = &cdf[point * outcomes..(point + 1) * outcomes];
                row.partition_point(|c| *c <= u) as u64
            }
            OutcomeSampler::Direct {
                trials,
                probabilities,
            } => {
                let p = probabilities[point];
                let mut acc = 0.0;
                for k in 0..*trials {
                    acc += ln_binomial_pmf(k, *trials, p).exp();
                    if acc > u {
                        return k;
                    }
                }
                *trials
            }
        }
    }
}

fn chunks(num_trials: u64) -> impl IndexedParallelIterator<Item = (u64, u64)> {
    let count = usize::try_from(num_trials.div_ceil(CHUNK_TRIALS)).expect("chunk count fits usize");
    (0..count).into_par_iter().map(move |c| {
        let start = c as u64 * CHUNK_TRIALS;
        (start, (start + CHUNK_TRIALS).min(num_trials))
    })
}

/// Draws a true proportion uniformly from the grid, then a success count
/// from it, `num_trials` times; bins the true values by success count and
/// compares each bin with the analytic posterior.
pub fn simulate_calibration(config: &SimulationConfig) -> Result<CalibrationReport> {
    config.validate()?;
    let grid = ParameterGrid::new(config.grid_points)?;
    let m = grid.points();
    let n = config.trials_n;
    let outcomes = n as usize + 1;
    let sampler = OutcomeSampler::new(n, grid.values().collect());

    let counts = chunks(config.num_trials)
        .fold(
            || vec![0u64; outcomes * m],
            |mut acc, (start, end)| {
                let mut rng = stream_at(config.seed, CALIBRATION_STREAM, start);
                for _ in start..end {
                    let point = uniform_index(rng.next_u64(), m);
                    let r = sampler.sample(point, uniform01(rng.next_u64()));
                    acc[r as usize * m + point] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; outcomes * m],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let cells: Vec<CalibrationCell> = (0..outcomes)
        .into_par_iter()
        .filter_map(|r| {
            let row = &counts[r * m..(r + 1) * m];
            let samples: u64 = row.iter().sum();
            (samples > 0).then(|| (r, row.to_vec(), samples))
        })
        .map(|(r, row, samples)| {
            let analytic = posterior(&Observation::new(r as u64, n)?, &grid)?;
            let total = samples as f64;
            let max_abs_deviation = row
                .iter()
                .zip(analytic.values())
                .map(|(c, a)| (*c as f64 / total - a).abs())
                .fold(0.0, f64::max);
            Ok(CalibrationCell {
                successes: r as u64,
                samples,
                analytic_max_mass: analytic.values().iter().copied().fold(0.0, f64::max),
                counts: row,
                max_abs_deviation,
                included: samples >= MIN_CELL_SAMPLES,
            })
        })
        .collect::<Result<_>>()?;

    let outcome_counts = (0..outcomes)
        .map(|r| counts[r * m..(r + 1) * m].iter().sum())
        .collect();
    let max_abs_deviation = cells
        .iter()
        .filter(|c| c.included)
        .map(|c| c.max_abs_deviation)
        .reduce(f64::max);

    Ok(CalibrationReport {
        config: config.clone(),
        cells,
        max_abs_deviation,
        outcome_counts,
    })
}

/// Locates the smallest significant success count for a one-sided
/// (at-or-above) exact test, and the true proportion at which repeat
/// studies reach it exactly half the time.
pub fn significance_boundary(
    trials_n: u64,
    null_p: f64,
    alpha: f64,
) -> Result<SignificanceBoundary> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let p_value = |r: u64, p: f64| -> Result<f64> {
        exact_binomial_p_value(&Observation::new(r, trials_n)?, p, Direction::AtOrAbove)
    };
    let mut critical = None;
    for r in 0..=trials_n {
        if p_value(r, null_p)? <= alpha {
            critical = Some(r);
            break;
        }
    }
    let critical_successes = match critical {
        Some(0) | None => {
            return Err(Error::invalid(format!(
                "no significance boundary for n = {trials_n}, null = {null_p}, alpha = {alpha}"
            )))
        }
        Some(r) => r,
    };
    // P(X >= critical | p) increases with p
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if p_value(critical_successes, mid)? < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SignificanceBoundary {
        critical_successes,
        boundary_p: 0.5 * (lo + hi),
    })
}

/// Fraction of `num_trials` simulated studies at `true_p` whose one-sided
/// (at-or-above) exact P-value against `null_p` exceeds `alpha`.
pub fn simulate_threshold_instability(
    true_p: f64,
    trials_n: u64,
    null_p: f64,
    alpha: f64,
    num_trials: u64,
    seed: u64,
) -> Result<f64> {
    for (name, v) in [("true_p", true_p), ("null_p", null_p)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!(
                "{name} must lie in [0, 1], got {v}"
            )));
        }
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if trials_n < 1 || num_trials < 1 {
        return Err(Error::invalid("trials_n and num_trials must be at least 1"));
    }
    let not_significant: Vec<bool> = (0..=trials_n)
        .map(|r| {
            exact_binomial_p_value(
                &Observation::new(r, trials_n)?,
                null_p,
                Direction::AtOrAbove,
            )
            .map(|pv| pv > alpha)
        })
        .collect::<Result<_>>()?;
    let sampler = OutcomeSampler::new(trials_n, vec![true_p]);

    let misses: u64 = chunks(num_trials)
        .map(|(start, end)| {
            let mut rng = stream_at(seed, THRESHOLD_STREAM, start);
            let mut misses = 0u64;
            for _ in start..end {
                let _ = rng.next_u64();
                let r = sampler.sample(0, uniform01(rng.next_u64()));
                misses += u64::from(not_significant[r as usize]);
            }
            misses
        })
        .sum();
    Ok(misses as f64 / num_trials as f64)
}
