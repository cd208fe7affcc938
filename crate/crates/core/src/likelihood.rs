//! Binomial and Gaussian likelihood curves over a parameter grid.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Curve, CurveKind, Observation, ParameterGrid};
use crate::special::{compensated_sum, ln_binomial_pmf, normal_pdf};

/// A Gaussian curve in parameter units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianModel {
    center: f64,
    sd: f64,
}

impl GaussianModel {
    pub fn new(center: f64, sd: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::invalid(format!(
                "gaussian center must be finite, got {center}"
            )));
        }
        if !(sd.is_finite() && sd > 0.0) {
            return Err(Error::invalid(format!(
                "gaussian sd must be positive and finite, got {sd}"
            )));
        }
        Ok(Self { center, sd })
    }

    /// Normal approximation to the sampling distribution of `r / n` when
    /// the true proportion is `p`: sd `sqrt(p (1 - p) / n)`.
    pub fn proportion(center: f64, p: f64, trials: u64) -> Result<Self> {
        Self::new(center, (p * (1.0 - p) / trials as f64).sqrt())
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} must lie in [0, 1], got {p}"
        )))
    }
}

/// Binomial point mass `C(n, r) p^r (1 - p)^(n - r)`.
pub fn binomial_pmf(successes: u64, trials: u64, p: f64) -> Result<f64> {
    check_probability("p", p)?;
    if successes > trials {
        return Err(Error::invalid(format!(
            "successes ({successes}) exceed trials ({trials})"
        )));
    }
    Ok(ln_binomial_pmf(successes, trials, p).exp())
}

/// Natural log of [`binomial_pmf`]; `-inf` for impossible outcomes.
pub fn ln_binomial_likelihood(obs: &Observation, p: f64) -> Result<f64> {
    check_probability("p", p)?;
    Ok(ln_binomial_pmf(obs.successes(), obs.trials(), p))
}

/// `P(obs | p_i)` at every grid point.
pub fn likelihood_curve(obs: &Observation, grid: &ParameterGrid) -> Curve {
    let values = grid
        .values()
        .map(|p| ln_binomial_pmf(obs.successes(), obs.trials(), p).exp())
        .collect();
    Curve::from_parts(*grid, values, CurveKind::Likelihood)
}

/// Gaussian density at each grid point times the grid spacing, so values are
/// comparable per-point masses.
pub fn gaussian_likelihood_curve(model: &GaussianModel, grid: &ParameterGrid) -> Curve {
    let h = grid.spacing();
    let values = grid
        .values()
        .map(|p| normal_pdf((p - model.center) / model.sd) / model.sd * h)
        .collect();
    Curve::from_parts(*grid, values, CurveKind::Likelihood)
}

/// Sum of a likelihood curve's values.
///
/// For a binomial curve on a fine grid this is close to
/// `(m_points - 1) / (n + 1)`, the grid's interval count times the Beta
/// integral `1 / (n + 1)`.
pub fn likelihood_sum(curve: &Curve) -> Result<f64> {
    curve.expect_kind(CurveKind::Likelihood)?;
    Ok(compensated_sum(curve.values().iter().copied()))
}
