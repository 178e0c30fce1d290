//! Monte Carlo power and size studies.
//!
//! Each run draws a fresh sample from the true distribution, performs one
//! bootstrap and records the minimum margin of every requested method. Since
//! both rules reject exactly when `epsilon > min_margin`, one bootstrap per
//! run serves the whole epsilon grid and every empirical power curve is
//! nondecreasing in epsilon by construction.

use crate::bootstrap::BootstrapConfig;
use crate::decision::{validate_alpha, Assessment, Method};
use crate::distributions::{EmConfig, FamilyId, FittedModel};
use crate::error::{AgofError, Result};
use crate::rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerStudyConfig {
    pub true_dist: FittedModel,
    pub family: FamilyId,
    pub p: f64,
    pub n: usize,
    pub alpha: f64,
    pub methods: Vec<Method>,
    pub epsilon_grid: Vec<f64>,
    pub runs: usize,
    #[serde(rename = "B")]
    pub b: usize,
    pub seed: u64,
    #[serde(default)]
    pub em: EmConfig,
}

impl PowerStudyConfig {
    pub fn validate(&self) -> Result<()> {
        self.validate_common()?;
        if self.epsilon_grid.is_empty() {
            return Err(AgofError::Config("epsilon grid is empty".into()));
        }
        if self.epsilon_grid.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(AgofError::Config("epsilon grid values must be finite and > 0".into()));
        }
        if self.epsilon_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AgofError::Config("epsilon grid must be strictly ascending".into()));
        }
        Ok(())
    }

    fn validate_common(&self) -> Result<()> {
        crate::metric::validate_p(self.p)?;
        validate_alpha(self.alpha)?;
        if self.runs == 0 || self.n == 0 {
            return Err(AgofError::Config("runs and n must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(AgofError::Config("at least one method is required".into()));
        }
        self.bootstrap_config(0).validate()?;
        self.em.validate()
    }

    fn bootstrap_config(&self, seed: u64) -> BootstrapConfig {
        BootstrapConfig::new(self.b, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerRow {
    pub epsilon: f64,
    pub rejection_proportion: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodCurve {
    pub method: Method,
    pub rows: Vec<PowerRow>,
    /// Minimum margin of each completed run, in run order.
    pub margins: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub curves: Vec<MethodCurve>,
    pub runs_completed: usize,
    pub runs_skipped: usize,
    pub config: PowerStudyConfig,
}

impl PowerCurve {
    pub fn curve(&self, method: Method) -> Option<&MethodCurve> {
        self.curves.iter().find(|c| c.method == method)
    }

    /// One row per (method, epsilon).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let io = |e: csv::Error| AgofError::Input(format!("writing power CSV: {e}"));
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "method",
            "epsilon",
            "rejection_proportion",
            "std_error",
            "runs",
            "B",
            "n",
            "p",
            "alpha",
            "seed",
        ])
        .map_err(io)?;
        let c = &self.config;
        for curve in &self.curves {
            for row in &curve.rows {
                wtr.write_record([
                    curve.method.to_string(),
                    row.epsilon.to_string(),
                    row.rejection_proportion.to_string(),
                    row.std_error.to_string(),
                    self.runs_completed.to_string(),
                    c.b.to_string(),
                    c.n.to_string(),
                    c.p.to_string(),
                    c.alpha.to_string(),
                    c.seed.to_string(),
                ])
                .map_err(io)?;
            }
        }
        wtr.flush().map_err(|e| AgofError::Input(format!("writing power CSV: {e}")))?;
        Ok(())
    }
}

/// Proportion of margins strictly below `epsilon` and its binomial standard error.
pub fn rejection_rate(margins: &[f64], epsilon: f64) -> (f64, f64) {
    let runs = margins.len() as f64;
    let hits = margins.iter().filter(|&&m| epsilon > m).count() as f64;
    let prop = hits / runs;
    (prop, (prop * (1.0 - prop) / runs).sqrt())
}

/// Minimum margins per method (outer index follows `cfg.methods`) and the skip count.
fn collect_margins(cfg: &PowerStudyConfig) -> Result<(Vec<Vec<f64>>, usize)> {
    let per_run: Vec<Option<Vec<f64>>> = (0..cfg.runs)
        .into_par_iter()
        .map(|r| {
            let r = r as u64;
            let sample_seed = rng::derive_seed(cfg.seed, rng::domain::MC_SAMPLE, r);
            let boot_seed = rng::derive_seed(cfg.seed, rng::domain::MC_BOOT, r);
            let sample = cfg.true_dist.draw_sample(cfg.n, sample_seed).ok()?;
            let em = EmConfig {
                seed: boot_seed,
                ..cfg.em.clone()
            };
            let a = Assessment::run(&sample, cfg.family, cfg.p, &cfg.bootstrap_config(boot_seed), &em).ok()?;
            cfg.methods.iter().map(|&m| a.min_margin(cfg.alpha, m).ok()).collect()
        })
        .collect();

    let skipped = per_run.iter().filter(|r| r.is_none()).count();
    if skipped == cfg.runs {
        return Err(AgofError::BootstrapDegeneracy {
            skipped,
            requested: cfg.runs,
            limit: 1.0,
        });
    }
    let mut margins = vec![Vec::with_capacity(cfg.runs - skipped); cfg.methods.len()];
    for run in per_run.into_iter().flatten() {
        for (slot, m) in margins.iter_mut().zip(run) {
            slot.push(m);
        }
    }
    Ok((margins, skipped))
}

/// Empirical power of each method over the epsilon grid.
pub fn power_curve(cfg: &PowerStudyConfig) -> Result<PowerCurve> {
    cfg.validate()?;
    let (margins, skipped) = collect_margins(cfg)?;
    let curves = cfg
        .methods
        .iter()
        .zip(margins)
        .map(|(&method, margins)| MethodCurve {
            method,
            rows: cfg
                .epsilon_grid
                .iter()
                .map(|&epsilon| {
                    let (rejection_proportion, std_error) = rejection_rate(&margins, epsilon);
                    PowerRow {
                        epsilon,
                        rejection_proportion,
                        std_error,
                    }
                })
                .collect(),
            margins,
        })
        .collect();
    Ok(PowerCurve {
        curves,
        runs_completed: cfg.runs - skipped,
        runs_skipped: skipped,
        config: cfg.clone(),
    })
}

/// Rejection proportion (and standard error) of the first method in
/// `cfg.methods` at a single margin, typically the true distance.
pub fn size_calibration(cfg: &PowerStudyConfig, epsilon_true: f64) -> Result<(f64, f64)> {
    cfg.validate_common()?;
    if !(epsilon_true >= 0.0 && epsilon_true.is_finite()) {
        return Err(AgofError::Config(format!("epsilon_true must be finite and >= 0, got {epsilon_true}")));
    }
    let single = PowerStudyConfig {
        methods: vec![cfg.methods[0]],
        ..cfg.clone()
    };
    let (margins, _) = collect_margins(&single)?;
    Ok(rejection_rate(&margins[0], epsilon_true))
}
