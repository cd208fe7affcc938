//! Data behind the comparison figures, as plain CSV tables.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::combine::multiply_normalize;
use crate::error::{Error, Result};
use crate::grid::{Observation, ParameterGrid};
use crate::likelihood::{binomial_pmf, gaussian_likelihood_curve, likelihood_curve, GaussianModel};
use crate::posterior::normalize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    /// Normalised likelihood of 50/99 on 101 points against the binomial
    /// distribution of outcomes at 50/99.
    Fig2,
    /// 22/46 as a prior, 28/53 as the likelihood and their posterior on
    /// 10001 points.
    Fig3,
    /// Normalised likelihood of 50/99 against the Gaussian sampling
    /// distribution around a null of 0.404, on 10001 points.
    Fig4,
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(FigureId::Fig2),
            "fig3" => Ok(FigureId::Fig3),
            "fig4" => Ok(FigureId::Fig4),
            other => Err(Error::invalid(format!(
                "unknown figure {other:?}; expected fig2, fig3 or fig4"
            ))),
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureDataset {
    pub figure: FigureId,
    pub columns: Vec<String>,
    /// Each row starts with `p`, then one value per series.
    pub rows: Vec<Vec<f64>>,
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

impl FigureDataset {
    pub fn validate(&self) -> Result<()> {
        if self.columns.first().map(String::as_str) != Some("p") {
            return Err(Error::invalid("first column must be p"));
        }
        let mut prev = f64::NEG_INFINITY;
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(Error::invalid(format!(
                    "row {i} has {} values for {} columns",
                    row.len(),
                    self.columns.len()
                )));
            }
            if row[0].is_nan() || row[0] <= prev {
                return Err(Error::invalid(format!(
                    "row {i}: p is not strictly increasing"
                )));
            }
            prev = row[0];
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{}", format_float(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(figure: FigureId, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::invalid("figure CSV is empty"))?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        let rows = lines
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, line)| {
                line.split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::invalid(format!("row {}: bad number {v:?}", i + 1)))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let dataset = Self {
            figure,
            columns,
            rows,
        };
        dataset.validate()?;
        Ok(dataset)
    }
}

fn from_columns(
    figure: FigureId,
    grid: &ParameterGrid,
    series: Vec<(&str, Vec<f64>)>,
) -> FigureDataset {
    let mut columns = vec!["p".to_string()];
    columns.extend(series.iter().map(|(name, _)| name.to_string()));
    let rows = grid
        .values()
        .enumerate()
        .map(|(i, p)| {
            let mut row = Vec::with_capacity(columns.len());
            row.push(p);
            row.extend(series.iter().map(|(_, values)| values[i]));
            row
        })
        .collect();
    FigureDataset {
        figure,
        columns,
        rows,
    }
}

/// Binomial distribution of outcomes `k / n` at success probability
/// `at`, read at proportion `x` by linear interpolation between outcomes.
fn binomial_outcomes_at(n: u64, at: f64, x: f64) -> Result<f64> {
    let pos = (x * n as f64).clamp(0.0, n as f64);
    let k = (pos.floor() as u64).min(n.saturating_sub(1));
    let t = pos - k as f64;
    let lo = binomial_pmf(k, n, at)?;
    let hi = if k < n {
        binomial_pmf(k + 1, n, at)?
    } else {
        lo
    };
    Ok(lo * (1.0 - t) + hi * t)
}

pub fn build_figure(figure: FigureId) -> Result<FigureDataset> {
    let obs = |r, n| Observation::new(r, n);
    match figure {
        FigureId::Fig2 => {
            let grid = ParameterGrid::new(101)?;
            let o = obs(50, 99)?;
            let posterior = normalize(&likelihood_curve(&o, &grid))?.into_values();
            let binomial = grid
                .values()
                .map(|p| binomial_outcomes_at(99, o.proportion(), p))
                .collect::<Result<Vec<_>>>()?;
            Ok(from_columns(
                figure,
                &grid,
                vec![
                    ("normalized_likelihood_50_99", posterior),
                    ("binomial_pmf_k_over_99", binomial),
                ],
            ))
        }
        FigureId::Fig3 => {
            let grid = ParameterGrid::new(10001)?;
            let prior = normalize(&likelihood_curve(&obs(22, 46)?, &grid))?;
            let second = likelihood_curve(&obs(28, 53)?, &grid);
            let posterior = multiply_normalize(&prior, &second)?;
            Ok(from_columns(
                figure,
                &grid,
                vec![
                    ("prior_22_46", prior.into_values()),
                    (
                        "normalized_likelihood_28_53",
                        normalize(&second)?.into_values(),
                    ),
                    ("posterior", posterior.into_values()),
                ],
            ))
        }
        FigureId::Fig4 => {
            let grid = ParameterGrid::new(10001)?;
            let posterior = normalize(&likelihood_curve(&obs(50, 99)?, &grid))?;
            let null = GaussianModel::proportion(0.404, 0.404, 99)?;
            let gaussian = normalize(&gaussian_likelihood_curve(&null, &grid))?;
            Ok(from_columns(
                figure,
                &grid,
                vec![
                    (
                        "normalized_binomial_likelihood_50_99",
                        posterior.into_values(),
                    ),
                    ("gaussian_null_40_4", gaussian.into_values()),
                ],
            ))
        }
    }
}

/// Builds a figure dataset and writes it as CSV to `path`.
pub fn emit_figure(figure: FigureId, path: &Path) -> Result<FigureDataset> {
    let dataset = build_figure(figure)?;
    std::fs::write(path, dataset.to_csv()).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(dataset)
}
