//! Bayes-rule combination of curves on a shared grid.
//!
//! Pooling fixed-truth studies multiplies their likelihoods, so the combined
//! posterior of `r1/n1` and `r2/n2` is the posterior of `(r1+r2)/(n1+n2)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Curve, CurveKind, Observation, ParameterGrid};
use crate::likelihood::{gaussian_likelihood_curve, likelihood_curve, GaussianModel};
use crate::posterior::normalize;

/// A labelled study result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StudyRecord {
    label: String,
    observation: Observation,
}

impl StudyRecord {
    pub fn new(label: impl Into<String>, observation: Observation) -> Result<Self> {
        let label = label.into();
        if label.trim().is_empty() {
            return Err(Error::invalid("study label must not be empty"));
        }
        Ok(Self { label, observation })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn observation(&self) -> &Observation {
        &self.observation
    }
}

fn check_same_grid(a: &ParameterGrid, b: &ParameterGrid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::IncompatibleGrids {
            left: a.points(),
            right: b.points(),
        })
    }
}

/// Pointwise product of `prior` and `likelihood`, renormalised.
///
/// The product is taken as a sum of logs and exponentiated against its
/// maximum, so long chains of updates do not underflow.
pub fn multiply_normalize(prior: &Curve, likelihood: &Curve) -> Result<Curve> {
    prior.expect_kind(CurveKind::Distribution)?;
    check_same_grid(prior.grid(), likelihood.grid())?;

    let logs: Vec<f64> = prior
        .values()
        .iter()
        .zip(likelihood.values())
        .map(|(a, b)| a.ln() + b.ln())
        .collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return Err(Error::ContradictoryEvidence(
            "prior and likelihood share no support on the grid".into(),
        ));
    }
    let scaled = logs.iter().map(|l| (l - peak).exp()).collect();
    normalize(&Curve::from_parts(
        *prior.grid(),
        scaled,
        CurveKind::Likelihood,
    ))
}

/// Sequentially updates a uniform prior with each study's likelihood.
pub fn pool_studies(studies: &[StudyRecord], grid: &ParameterGrid) -> Result<Curve> {
    if studies.is_empty() {
        return Err(Error::invalid("at least one study is required"));
    }
    studies
        .iter()
        .try_fold(Curve::uniform(*grid), |acc, study| {
            multiply_normalize(&acc, &likelihood_curve(study.observation(), grid))
        })
}

/// Updates `current` with a hypothetical Gaussian likelihood, e.g. a
/// shifted or widened result expected from another setting.
pub fn what_if_update(
    current: &Curve,
    hypothetical: &GaussianModel,
    grid: &ParameterGrid,
) -> Result<Curve> {
    check_same_grid(current.grid(), grid)?;
    multiply_normalize(current, &gaussian_likelihood_curve(hypothetical, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::posterior::{range_probability, replication_interval, RangeSpec};

    fn obs(r: u64, n: u64) -> Observation {
        Observation::new(r, n).unwrap()
    }

    fn study(label: &str, r: u64, n: u64) -> StudyRecord {
        StudyRecord::new(label, obs(r, n)).unwrap()
    }

    fn max_gap(a: &Curve, b: &Curve) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn two_studies_equal_their_combined_counts() {
        let g = make_grid(10001).unwrap();
        let prior = normalize(&likelihood_curve(&obs(22, 46), &g)).unwrap();
        let combined = multiply_normalize(&prior, &likelihood_curve(&obs(28, 53), &g)).unwrap();
        let batch = normalize(&likelihood_curve(&obs(50, 99), &g)).unwrap();
        assert!(max_gap(&combined, &batch) < 1e-10);

        let pooled = pool_studies(&[study("a", 22, 46), study("b", 28, 53)], &g).unwrap();
        assert!(max_gap(&pooled, &batch) < 1e-10);
    }

    #[test]
    fn uniform_prior_is_absorbed() {
        let g = make_grid(1001).unwrap();
        let l = likelihood_curve(&obs(3, 17), &g);
        let a = multiply_normalize(&Curve::uniform(g), &l).unwrap();
        let b = normalize(&l).unwrap();
        assert!(max_gap(&a, &b) < 1e-15);
    }

    #[test]
    fn point_mass_prior_stays_put() {
        let g = make_grid(101).unwrap();
        let prior = Curve::point_mass(g, 0.37);
        let out = multiply_normalize(&prior, &likelihood_curve(&obs(8, 10), &g)).unwrap();
        assert_eq!(out.value_at(0.37).unwrap(), 1.0);
        assert!((out.sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_mismatch_and_contradiction() {
        let a = Curve::uniform(make_grid(11).unwrap());
        let l = likelihood_curve(&obs(1, 2), &make_grid(21).unwrap());
        assert!(matches!(
            multiply_normalize(&a, &l),
            Err(Error::IncompatibleGrids {
                left: 11,
                right: 21
            })
        ));
        let g = make_grid(11).unwrap();
        let prior = Curve::point_mass(g, 0.0);
        let l = likelihood_curve(&obs(1, 1), &g);
        assert!(matches!(
            multiply_normalize(&prior, &l),
            Err(Error::ContradictoryEvidence(_))
        ));
    }

    #[test]
    fn prior_must_be_a_distribution() {
        let g = make_grid(11).unwrap();
        let l = likelihood_curve(&obs(1, 2), &g);
        assert!(matches!(
            multiply_normalize(&l, &l),
            Err(Error::WrongCurveKind { .. })
        ));
    }

    #[test]
    fn pooling_edge_cases() {
        let g = make_grid(101).unwrap();
        assert!(matches!(
            pool_studies(&[], &g),
            Err(Error::InvalidArgument(_))
        ));
        let single = pool_studies(&[study("only", 4, 9)], &g).unwrap();
        let direct = normalize(&likelihood_curve(&obs(4, 9), &g)).unwrap();
        assert!(max_gap(&single, &direct) < 1e-15);
    }

    #[test]
    fn pooling_is_order_independent() {
        let g = make_grid(1001).unwrap();
        let s = [study("a", 3, 10), study("b", 40, 70), study("c", 11, 12)];
        let orders = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let reference = pool_studies(&s, &g).unwrap();
        let batch = normalize(&likelihood_curve(&obs(54, 92), &g)).unwrap();
        assert!(max_gap(&reference, &batch) < 1e-10);
        for order in orders {
            let permuted: Vec<_> = order.iter().map(|&i| s[i].clone()).collect();
            assert!(max_gap(&pool_studies(&permuted, &g).unwrap(), &reference) < 1e-10);
        }
    }

    #[test]
    fn empty_label_rejected() {
        assert!(StudyRecord::new("  ", obs(1, 2)).is_err());
    }

    #[test]
    fn dominating_hypothetical_concentrates() {
        let g = make_grid(10001).unwrap();
        let current = normalize(&likelihood_curve(&obs(50, 99), &g)).unwrap();
        let before = replication_interval(&current, 0.95).unwrap();
        let sharp = GaussianModel::new(current.mode(), 0.005).unwrap();
        let after =
            replication_interval(&what_if_update(&current, &sharp, &g).unwrap(), 0.95).unwrap();
        assert!(after.upper() - after.lower() < 0.5 * (before.upper() - before.lower()));
    }

    #[test]
    fn flat_hypothetical_changes_nothing() {
        let g = make_grid(1001).unwrap();
        let current = normalize(&likelihood_curve(&obs(50, 99), &g)).unwrap();
        let flat = GaussianModel::new(0.5, 1e6).unwrap();
        let updated = what_if_update(&current, &flat, &g).unwrap();
        assert!(max_gap(&updated, &current) < 1e-6);
    }

    #[test]
    fn shifted_hypothetical_lowers_replication() {
        let g = make_grid(10001).unwrap();
        let current = normalize(&likelihood_curve(&obs(50, 99), &g)).unwrap();
        let range = RangeSpec::new(0.45, 1.0, false, true).unwrap();
        let before = range_probability(&current, &range).unwrap();
        let shifted = GaussianModel::new(0.45, 0.05).unwrap();
        let after =
            range_probability(&what_if_update(&current, &shifted, &g).unwrap(), &range).unwrap();
        assert!(after < before, "{after} >= {before}");
    }
}
