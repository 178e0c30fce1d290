//! Reading samples from plain-text or single-column CSV files.

use crate::distributions::Sample;
use crate::error::{AgofError, Result};
use serde::Serialize;
use std::path::Path;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CleaningOptions {
    pub drop_nonfinite: bool,
    pub drop_nonpositive: bool,
}

/// What happened while reading an input file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct InputStats {
    pub path: String,
    pub header: Option<String>,
    pub n_read: usize,
    pub dropped_nonfinite: usize,
    pub dropped_nonpositive: usize,
    pub n_used: usize,
}

fn is_missing(token: &str) -> bool {
    matches!(token.to_ascii_lowercase().as_str(), "" | "na" | "nan" | "null" | "none" | "-nan")
}

/// Parses one observation per line. A non-numeric first line is taken as a
/// header; any later non-numeric line is an error carrying its line number.
pub fn parse_sample(text: &str, source: &str, opts: CleaningOptions) -> Result<(Sample, InputStats)> {
    let mut stats = InputStats {
        path: source.to_string(),
        ..InputStats::default()
    };
    let mut data = Vec::new();
    let mut seen_content = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.contains(',') {
            return Err(AgofError::Input(format!(
                "{source}:{line_no}: expected a single column, found '{line}'"
            )));
        }
        let token = line.trim_matches('"').trim();
        let first = !seen_content;
        seen_content = true;
        let value = if is_missing(token) {
            f64::NAN
        } else {
            match token.parse::<f64>() {
                Ok(v) => v,
                Err(_) if first => {
                    stats.header = Some(token.to_string());
                    continue;
                }
                Err(_) => {
                    return Err(AgofError::Input(format!("{source}:{line_no}: malformed datum '{token}'")));
                }
            }
        };
        stats.n_read += 1;
        if !value.is_finite() {
            if opts.drop_nonfinite {
                stats.dropped_nonfinite += 1;
                continue;
            }
            return Err(AgofError::Input(format!(
                "{source}:{line_no}: non-finite or missing value '{token}' (use --drop-nonfinite)"
            )));
        }
        if opts.drop_nonpositive && value <= 0.0 {
            stats.dropped_nonpositive += 1;
            continue;
        }
        data.push(value);
    }
    if data.is_empty() {
        return Err(AgofError::Input(format!("{source}: no usable observations")));
    }
    stats.n_used = data.len();
    Ok((Sample::new(data, source)?, stats))
}

pub fn read_sample(path: &Path, opts: CleaningOptions) -> Result<(Sample, InputStats)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AgofError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_sample(&text, &path.display().to_string(), opts)
}
