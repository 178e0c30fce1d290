//! Bootstrap replicates of the fitted-model distance.
//!
//! Replicate `b` resamples the data with replacement, refits the family on the
//! resample and records `||F_n* - G(theta_n*)||_p`. All randomness for
//! replicate `b` comes from the stream `(seed, b)`, so the sorted norms do not
//! depend on the number of worker threads.

use crate::distributions::{fit_mle_with_em, EmConfig, FamilyId, FittedModel, Sample};
use crate::error::{AgofError, Result};
use crate::metric::{empirical_model_distance, DistanceConfig};
use crate::rng;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailurePolicy {
    /// Redraw a failed replicate once from a fresh sub-stream, then skip it.
    RetryOnceThenSkip,
    /// Propagate the first failure (lowest replicate index).
    Abort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
    pub failure_policy: FailurePolicy,
    pub max_skip_fraction: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            b: 2000,
            seed: 0,
            failure_policy: FailurePolicy::RetryOnceThenSkip,
            max_skip_fraction: 0.01,
        }
    }
}

impl BootstrapConfig {
    pub fn new(b: usize, seed: u64) -> Self {
        BootstrapConfig {
            b,
            seed,
            ..BootstrapConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.b < 2 {
            return Err(AgofError::Config(format!("B must be >= 2, got {}", self.b)));
        }
        if !(self.max_skip_fraction >= 0.0 && self.max_skip_fraction < 0.05) {
            return Err(AgofError::Config(format!(
                "max_skip_fraction must lie in [0, 0.05), got {}",
                self.max_skip_fraction
            )));
        }
        Ok(())
    }
}

/// Sorted replicate norms and their spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    /// Replicate norms, ascending.
    pub norms: Vec<f64>,
    /// Sample standard deviation (denominator `B_eff - 1`) of the norms.
    pub sigma_boot: f64,
    pub n_skipped: usize,
    pub seed: u64,
}

impl BootstrapSummary {
    pub fn from_norms(mut norms: Vec<f64>, n_skipped: usize, seed: u64) -> Result<Self> {
        if norms.len() < 2 {
            return Err(AgofError::BootstrapDegeneracy {
                skipped: n_skipped,
                requested: norms.len() + n_skipped,
                limit: 0.0,
            });
        }
        norms.sort_by(f64::total_cmp);
        let m = norms.len() as f64;
        let mean = norms.iter().sum::<f64>() / m;
        let var = norms.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
        Ok(BootstrapSummary {
            norms,
            sigma_boot: var.sqrt(),
            n_skipped,
            seed,
        })
    }

    /// Number of replicates that produced a norm.
    pub fn b_eff(&self) -> usize {
        self.norms.len()
    }

    /// Lower empirical `alpha`-quantile: the order statistic `ceil(alpha * B_eff)`.
    pub fn quantile(&self, alpha: f64) -> f64 {
        let b = self.norms.len();
        // Guard against products like 0.05 * 500 landing a hair above an integer.
        let pos = (alpha * b as f64 - 1e-9).ceil().clamp(1.0, b as f64) as usize;
        self.norms[pos - 1]
    }

    /// Writes the norms as a single-column CSV.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let io = |e: csv::Error| AgofError::Input(format!("writing bootstrap CSV: {e}"));
        wtr.write_record(["norm"]).map_err(io)?;
        for v in &self.norms {
            wtr.write_record([format!("{v}")]).map_err(io)?;
        }
        wtr.flush().map_err(|e| AgofError::Input(format!("writing bootstrap CSV: {e}")))?;
        Ok(())
    }
}

/// Draws the bootstrap resample for stream `index`. The input is sorted, so
/// expanding multiplicities in index order yields a sorted resample.
pub(crate) fn resample_sorted(x: &[f64], seed: u64, index: u64) -> Vec<f64> {
    let n = x.len();
    let mut rng = rng::stream(seed, rng::domain::RESAMPLE, index);
    let mut counts = vec![0u32; n];
    for _ in 0..n {
        counts[rng.random_range(0..n)] += 1;
    }
    let mut out = Vec::with_capacity(n);
    for (xi, &c) in x.iter().zip(&counts) {
        out.extend(std::iter::repeat_n(*xi, c as usize));
    }
    out
}

fn replicate_norm(
    sample: &Sample,
    family: FamilyId,
    dist: &DistanceConfig,
    em: &EmConfig,
    seed: u64,
    b: usize,
    attempt: u64,
) -> Result<f64> {
    let index = ((b as u64) << 1) | attempt;
    let resample = Sample::from_sorted(resample_sorted(sample.data(), seed, index), "bootstrap");
    let em = EmConfig {
        seed: rng::derive_seed(seed, rng::domain::REPLICATE_EM, index),
        ..em.clone()
    };
    let params = fit_mle_with_em(family, &resample, &em)?;
    let model = FittedModel::new(family, params)?;
    Ok(empirical_model_distance(&resample, &model, dist)?.value)
}

/// Runs `cfg.b` replicates with the default distance settings for `p`.
pub fn run_bootstrap(
    sample: &Sample,
    family: FamilyId,
    p: f64,
    cfg: &BootstrapConfig,
    em_cfg: &EmConfig,
) -> Result<BootstrapSummary> {
    run_bootstrap_with(sample, family, &DistanceConfig::new(p)?, cfg, em_cfg)
}

pub fn run_bootstrap_with(
    sample: &Sample,
    family: FamilyId,
    dist: &DistanceConfig,
    cfg: &BootstrapConfig,
    em_cfg: &EmConfig,
) -> Result<BootstrapSummary> {
    cfg.validate()?;
    dist.validate()?;
    em_cfg.validate()?;
    fit_mle_with_em(family, sample, em_cfg)?;

    let outcomes: Vec<Result<f64>> = (0..cfg.b)
        .into_par_iter()
        .map(|b| {
            let first = replicate_norm(sample, family, dist, em_cfg, cfg.seed, b, 0);
            match (first, cfg.failure_policy) {
                (Err(_), FailurePolicy::RetryOnceThenSkip) => replicate_norm(sample, family, dist, em_cfg, cfg.seed, b, 1),
                (r, _) => r,
            }
        })
        .collect();

    let mut norms = Vec::with_capacity(cfg.b);
    let mut skipped = 0;
    for outcome in outcomes {
        match outcome {
            Ok(v) => norms.push(v),
            Err(e) if cfg.failure_policy == FailurePolicy::Abort => return Err(e),
            Err(_) => skipped += 1,
        }
    }
    if skipped as f64 > cfg.max_skip_fraction * cfg.b as f64 {
        return Err(AgofError::BootstrapDegeneracy {
            skipped,
            requested: cfg.b,
            limit: cfg.max_skip_fraction,
        });
    }
    BootstrapSummary::from_norms(norms, skipped, cfg.seed)
}
