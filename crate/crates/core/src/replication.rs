//! Idealistic and realistic probabilities of replication.
//!
//! The idealistic probability is the posterior mass on a replication range,
//! assuming the study can be repeated exactly. With probability `q` that it
//! is perfectly reproducible, the realistic probability lies between
//! `q * idealistic` (a non-reproducible repeat never replicates) and
//! `idealistic` (it replicates just as often).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Curve;
use crate::posterior::{range_probability, RangeSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationAssessment {
    pub idealistic: f64,
    pub reproducibility_q: f64,
    pub realistic_lower: f64,
    pub realistic_upper: f64,
    /// `realistic_lower / idealistic`
    pub ir_index_lower: f64,
    /// `ir_index_lower` rounded to two decimals.
    pub ir_index_display: String,
}

impl ReplicationAssessment {
    pub fn new(idealistic: f64, q: f64) -> Result<Self> {
        let (realistic_lower, realistic_upper) = realistic_bounds(idealistic, q)?;
        let ir_index_lower = if idealistic > 0.0 {
            ir_index(realistic_lower, idealistic)?
        } else {
            // nothing to lose: no replication either way
            1.0
        };
        Ok(Self {
            idealistic,
            reproducibility_q: q,
            realistic_lower,
            realistic_upper,
            ir_index_lower,
            ir_index_display: format!("{ir_index_lower:.2}"),
        })
    }
}

/// Posterior mass on `range` under perfect reproducibility.
pub fn idealistic_replication(dist: &Curve, range: &RangeSpec) -> Result<f64> {
    range_probability(dist, range)
}

/// `(q * idealistic, idealistic)`.
pub fn realistic_bounds(idealistic: f64, q: f64) -> Result<(f64, f64)> {
    for (name, v) in [("idealistic probability", idealistic), ("q", q)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!(
                "{name} must lie in [0, 1], got {v}"
            )));
        }
    }
    Ok((q * idealistic, idealistic))
}

/// Realistic-to-idealistic ratio, clamped to `[0, 1]`.
pub fn ir_index(realistic: f64, idealistic: f64) -> Result<f64> {
    if !(idealistic > 0.0 && idealistic <= 1.0) {
        return Err(Error::invalid(format!(
            "idealistic probability must lie in (0, 1], got {idealistic}"
        )));
    }
    if !(0.0..=1.0).contains(&realistic) {
        return Err(Error::invalid(format!(
            "realistic probability must lie in [0, 1], got {realistic}"
        )));
    }
    if realistic > idealistic + 1e-12 {
        return Err(Error::InconsistentInputs(format!(
            "realistic probability {realistic} exceeds idealistic {idealistic}"
        )));
    }
    Ok((realistic / idealistic).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, Observation};
    use crate::posterior::{posterior, replication_interval};

    #[test]
    fn worked_bounds() {
        let (lo, hi) = realistic_bounds(0.95, 0.9).unwrap();
        assert_eq!(lo, 0.9 * 0.95);
        assert!((lo - 0.855).abs() < 1e-15);
        assert_eq!(hi, 0.95);
        assert_eq!(realistic_bounds(0.7, 1.0).unwrap(), (0.7, 0.7));
        assert_eq!(realistic_bounds(0.7, 0.0).unwrap(), (0.0, 0.7));
        assert!(realistic_bounds(1.1, 0.5).is_err());
        assert!(realistic_bounds(0.5, -0.5).is_err());
    }

    #[test]
    fn worked_ir_index() {
        let v = ir_index(0.47, 0.95).unwrap();
        assert!((v - 0.4947).abs() < 1e-4);
        assert_eq!(format!("{v:.2}"), "0.49");
        assert_eq!(ir_index(0.6, 0.6).unwrap(), 1.0);
        assert!((ir_index(0.855, 0.95).unwrap() - 0.9).abs() < 1e-12);
        assert!(matches!(ir_index(0.1, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            ir_index(0.9, 0.5),
            Err(Error::InconsistentInputs(_))
        ));
    }

    #[test]
    fn assessment_fields() {
        let a = ReplicationAssessment::new(0.95, 0.9).unwrap();
        assert!((a.realistic_lower - 0.855).abs() < 1e-15);
        assert_eq!(a.realistic_upper, 0.95);
        assert!((a.ir_index_lower - 0.9).abs() < 1e-12);
        assert_eq!(a.ir_index_display, "0.90");
        let zero = ReplicationAssessment::new(0.0, 0.5).unwrap();
        assert_eq!(zero.realistic_lower, 0.0);
    }

    #[test]
    fn idealistic_probabilities() {
        let d = posterior(
            &Observation::new(50, 99).unwrap(),
            &make_grid(10001).unwrap(),
        )
        .unwrap();
        let v =
            idealistic_replication(&d, &RangeSpec::new(0.45, 1.0, false, true).unwrap()).unwrap();
        assert!((v - 0.88).abs() < 0.02);
        assert!((idealistic_replication(&d, &RangeSpec::full()).unwrap() - 1.0).abs() < 1e-12);
        let interval = replication_interval(&d, 0.95).unwrap();
        let covered = idealistic_replication(&d, &interval).unwrap();
        let largest = d.values().iter().copied().fold(0.0, f64::max);
        assert!(
            covered >= 0.95 && covered <= 0.95 + 2.0 * largest,
            "{covered}"
        );
    }
}
