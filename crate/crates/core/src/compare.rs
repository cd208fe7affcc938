//! P-values next to posterior tails beyond the null.
//!
//! A one-sided P-value is the tail beyond the observed proportion under a
//! sampling distribution centred on the null. The matching posterior
//! quantity is the posterior mass beyond the null, on the other side, under
//! the likelihood of the observation. For a symmetric Gaussian model the two
//! coincide; for binomial data the P-value only approximates the posterior.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Observation, ParameterGrid};
use crate::likelihood::{gaussian_likelihood_curve, likelihood_curve, GaussianModel};
use crate::posterior::{normalize, tail_probability};
use crate::special::{compensated_sum, ln_binomial_pmf, normal_cdf, normal_sf};

pub use crate::posterior::Direction;

/// Where the Gaussian sd `sqrt(p (1 - p) / n)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdConvention {
    /// At the observed proportion.
    #[default]
    AtObserved,
    /// At the null proportion.
    AtNull,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub null_value: f64,
    pub direction: Direction,
    pub observed_proportion: f64,
    /// Gaussian P-value with sd at the observed proportion.
    pub p_value_gaussian: f64,
    /// Gaussian P-value with sd at the null.
    pub p_value_gaussian_at_null: f64,
    pub p_value_exact_binomial: f64,
    /// Posterior mass at or beyond the null, opposite to `direction`.
    pub posterior_null_tail: f64,
    /// `1 - posterior_null_tail`.
    pub posterior_complement: f64,
    /// `|p_value_gaussian - posterior_null_tail|`
    pub absolute_gap: f64,
}

/// Comparison for a Gaussian likelihood used in both roles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianComparison {
    pub null_value: f64,
    pub direction: Direction,
    pub p_value: f64,
    pub posterior_null_tail: f64,
    pub absolute_gap: f64,
}

fn check_null(null_p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&null_p) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "null must lie in [0, 1], got {null_p}"
        )))
    }
}

/// Exact one-sided binomial P-value: total null probability of outcomes as
/// extreme as `obs` or more.
pub fn exact_binomial_p_value(obs: &Observation, null_p: f64, direction: Direction) -> Result<f64> {
    check_null(null_p)?;
    let (n, r) = (obs.trials(), obs.successes());
    let outcomes = match direction {
        Direction::AtOrAbove => r..=n,
        Direction::AtOrBelow => 0..=r,
    };
    let total = compensated_sum(outcomes.map(|k| ln_binomial_pmf(k, n, null_p).exp()));
    Ok(total.min(1.0))
}

/// One-sided Gaussian P-value of the observed proportion under a normal
/// sampling distribution centred on `null_p`.
pub fn gaussian_p_value(
    obs: &Observation,
    null_p: f64,
    direction: Direction,
    sd_convention: SdConvention,
) -> Result<f64> {
    check_null(null_p)?;
    let observed = obs.proportion();
    let at = match sd_convention {
        SdConvention::AtObserved => observed,
        SdConvention::AtNull => null_p,
    };
    let sd = (at * (1.0 - at) / obs.trials() as f64).sqrt();
    if sd.is_nan() || sd <= 0.0 {
        return Err(Error::invalid(format!(
            "gaussian sd is zero when evaluated at {at} ({sd_convention:?})"
        )));
    }
    let z = (observed - null_p) / sd;
    Ok(match direction {
        Direction::AtOrAbove => normal_sf(z),
        Direction::AtOrBelow => normal_cdf(z),
    })
}

/// Places both Gaussian P-values and the exact binomial P-value next to the
/// posterior tail beyond the null.
pub fn compare_p_and_posterior(
    obs: &Observation,
    null_p: f64,
    grid: &ParameterGrid,
    direction: Direction,
) -> Result<ComparisonReport> {
    let p_value_gaussian = gaussian_p_value(obs, null_p, direction, SdConvention::AtObserved)?;
    let p_value_gaussian_at_null = gaussian_p_value(obs, null_p, direction, SdConvention::AtNull)?;
    let p_value_exact_binomial = exact_binomial_p_value(obs, null_p, direction)?;
    let posterior = normalize(&likelihood_curve(obs, grid))?;
    let posterior_null_tail = tail_probability(&posterior, null_p, direction.opposite())?;
    Ok(ComparisonReport {
        null_value: null_p,
        direction,
        observed_proportion: obs.proportion(),
        p_value_gaussian,
        p_value_gaussian_at_null,
        p_value_exact_binomial,
        posterior_null_tail,
        posterior_complement: 1.0 - posterior_null_tail,
        absolute_gap: (p_value_gaussian - posterior_null_tail).abs(),
    })
}

/// The symmetric case: a Gaussian with the same sd serves as the sampling
/// distribution around the null and as the likelihood around the
/// observation `model.center()`.
pub fn compare_gaussian_model(
    model: &GaussianModel,
    null_p: f64,
    grid: &ParameterGrid,
    direction: Direction,
) -> Result<GaussianComparison> {
    check_null(null_p)?;
    let z = (model.center() - null_p) / model.sd();
    let p_value = match direction {
        Direction::AtOrAbove => normal_sf(z),
        Direction::AtOrBelow => normal_cdf(z),
    };
    let posterior = normalize(&gaussian_likelihood_curve(model, grid))?;
    let posterior_null_tail = tail_probability(&posterior, null_p, direction.opposite())?;
    Ok(GaussianComparison {
        null_value: null_p,
        direction,
        p_value,
        posterior_null_tail,
        absolute_gap: (p_value - posterior_null_tail).abs(),
    })
}
