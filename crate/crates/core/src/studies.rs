//! Study files: one `label,successes,trials` triple per line.
//!
//! Blank lines and lines starting with `#` are skipped; surrounding
//! whitespace on each field is ignored.

use std::path::Path;

use crate::combine::StudyRecord;
use crate::error::{Error, Result};
use crate::grid::Observation;

pub fn parse_studies(text: &str, source: &str) -> Result<Vec<StudyRecord>> {
    let mut studies = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            file: source.to_string(),
            line: i + 1,
            message,
        };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [label, successes, trials] = fields[..] else {
            return Err(err(format!(
                "expected label,successes,trials but found {} field(s)",
                fields.len()
            )));
        };
        let count = |name: &str, s: &str| {
            s.parse::<u64>()
                .map_err(|_| err(format!("{name} must be a nonnegative integer, got {s:?}")))
        };
        let obs = Observation::new(count("successes", successes)?, count("trials", trials)?)
            .map_err(|e| err(e.to_string()))?;
        studies.push(StudyRecord::new(label, obs).map_err(|e| err(e.to_string()))?);
    }
    if studies.is_empty() {
        return Err(Error::Parse {
            file: source.to_string(),
            line: 0,
            message: "no studies found".into(),
        });
    }
    Ok(studies)
}

pub fn read_studies(path: &Path) -> Result<Vec<StudyRecord>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_studies(&text, &path.display().to_string())
}
