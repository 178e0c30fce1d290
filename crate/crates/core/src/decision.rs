//! The AGoF decision and its derived quantities.
//!
//! `H0: ||F - G(theta_F)||_p >= epsilon` is rejected in favour of the model
//! being within `epsilon` of the truth when
//!
//! * Bootstrap 1: `2 * obs - q_alpha < epsilon`, `q_alpha` the bootstrap
//!   `alpha`-quantile of the replicate norms;
//! * Bootstrap 2: `obs - sigma_boot * z_alpha < epsilon`.
//!
//! `z_alpha` is the *lower* standard normal quantile (`z_0.05 = -1.6449`), so
//! the Bootstrap 2 threshold sits above the observed norm. Reading it as the
//! upper quantile would invert the test.
//!
//! Both rules are linear in `epsilon`, so the minimum certifiable margin is the
//! flip point itself and `reject_h0 == (epsilon > min_margin)` holds exactly.

use crate::bootstrap::{run_bootstrap_with, BootstrapConfig, BootstrapSummary};
use crate::distributions::special::std_normal_quantile;
use crate::distributions::{fit_mle_with_em, EmConfig, FamilyId, FittedModel, Params, Sample};
use crate::error::{AgofError, Result};
use crate::metric::{dirac_distance, empirical_model_distance, DistanceConfig, DistanceResult};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Emitted for every `p = 1` Bootstrap 2 run: the normal limit behind the rule
/// requires the set where the true and fitted cdfs coincide to be Lebesgue-null.
pub const CONTACT_SET_CAVEAT: &str = "CONTACT_SET_CAVEAT";
/// Heuristic: with `p = 1` an extreme observation (beyond 20 fitted standard
/// deviations) hints that the integrability condition on the tails may fail.
pub const HEAVY_TAIL_HEURISTIC: &str = "HEAVY_TAIL_HEURISTIC";
pub const BOOTSTRAP_SKIPPED: &str = "BOOTSTRAP_SKIPPED_REPLICATES";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Bootstrap1,
    Bootstrap2,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "bootstrap1" | "1" => Ok(Method::Bootstrap1),
            "bootstrap2" | "2" => Ok(Method::Bootstrap2),
            other => Err(AgofError::Input(format!("unknown method '{other}'"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Bootstrap1 => "bootstrap1",
            Method::Bootstrap2 => "bootstrap2",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    pub p: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub method: Method,
    pub bootstrap: BootstrapConfig,
    pub em: EmConfig,
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        crate::metric::validate_p(self.p)?;
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(AgofError::Config(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        validate_alpha(self.alpha)?;
        self.bootstrap.validate()?;
        self.em.validate()
    }
}

pub(crate) fn validate_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 0.5 {
        Ok(())
    } else {
        Err(AgofError::Config(format!("alpha must lie in (0, 0.5), got {alpha}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// `H1`: the model is within `epsilon`.
    Agof,
    /// Swapped hypotheses: `H1`: the model is farther than `epsilon`.
    Dual,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub kind: TestKind,
    pub family: FamilyId,
    pub n: usize,
    pub model: FittedModel,
    pub theta_hat: Params,
    pub obs_norm: f64,
    pub obs_norm_error_bound: f64,
    pub boot: BootstrapSummary,
    #[serde(rename = "reject_H0")]
    pub reject_h0: bool,
    /// Smallest margin at which the AGoF null is rejected.
    pub min_margin: f64,
    /// Dual test only: the dual null is rejected iff `epsilon` is below this.
    pub dual_threshold: Option<f64>,
    pub improvement: f64,
    pub improvement_raw: f64,
    pub dirac_distance: f64,
    pub warnings: Vec<String>,
    pub config: TestConfig,
    pub engine_version: String,
}

/// The fitted model, observed norm and bootstrap for one sample; everything
/// the decision rules need, computed once.
#[derive(Debug, Clone)]
pub struct Assessment {
    pub model: FittedModel,
    pub obs: DistanceResult,
    pub boot: BootstrapSummary,
}

impl Assessment {
    pub fn run(sample: &Sample, family: FamilyId, p: f64, boot: &BootstrapConfig, em: &EmConfig) -> Result<Self> {
        let dist = DistanceConfig::new(p)?;
        let params = fit_mle_with_em(family, sample, em)?;
        let model = FittedModel::new(family, params)?;
        let obs = empirical_model_distance(sample, &model, &dist)?;
        let boot = run_bootstrap_with(sample, family, &dist, boot, em)?;
        Ok(Assessment { model, obs, boot })
    }

    pub fn min_margin(&self, alpha: f64, method: Method) -> Result<f64> {
        min_margin(self.obs.value, &self.boot, alpha, method)
    }
}

/// Flip point of the AGoF rule: `H0` is rejected exactly when `epsilon > min_margin`.
pub fn min_margin(obs_norm: f64, boot: &BootstrapSummary, alpha: f64, method: Method) -> Result<f64> {
    validate_alpha(alpha)?;
    Ok(match method {
        Method::Bootstrap1 => 2.0 * obs_norm - boot.quantile(alpha),
        Method::Bootstrap2 => obs_norm - boot.sigma_boot * std_normal_quantile(alpha),
    })
}

/// Flip point of the dual rule: the dual null is rejected exactly when `epsilon < threshold`.
pub fn dual_threshold(obs_norm: f64, boot: &BootstrapSummary, alpha: f64, method: Method) -> Result<f64> {
    validate_alpha(alpha)?;
    Ok(match method {
        Method::Bootstrap1 => 2.0 * obs_norm - boot.quantile(1.0 - alpha),
        Method::Bootstrap2 => obs_norm - boot.sigma_boot * std_normal_quantile(1.0 - alpha),
    })
}

/// `1 - margin / ||F_n - delta_mean||_p`, raw and clamped to `[0, 1]`.
pub fn improvement_coefficient(min_margin_value: f64, sample: &Sample, p: f64) -> Result<(f64, f64)> {
    let baseline = dirac_distance(sample, sample.mean(), p)?.value;
    improvement_from_baseline(min_margin_value, baseline)
}

pub fn improvement_from_baseline(min_margin_value: f64, baseline: f64) -> Result<(f64, f64)> {
    if !(baseline > 0.0) {
        return Err(AgofError::DegenerateData(
            "constant-model distance is zero; the sample needs two distinct values".into(),
        ));
    }
    let raw = 1.0 - min_margin_value / baseline;
    Ok((raw, raw.clamp(0.0, 1.0)))
}

fn warnings(sample: &Sample, model: &FittedModel, boot: &BootstrapSummary, cfg: &TestConfig) -> Vec<String> {
    let mut w = Vec::new();
    if cfg.p == 1.0 && cfg.method == Method::Bootstrap2 {
        w.push(CONTACT_SET_CAVEAT.to_string());
    }
    if cfg.p == 1.0 {
        let sd = model.variance().sqrt();
        if sd > 0.0 && (sample.max() - model.mean()) / sd > 20.0 {
            w.push(HEAVY_TAIL_HEURISTIC.to_string());
        }
    }
    if boot.n_skipped > 0 {
        w.push(BOOTSTRAP_SKIPPED.to_string());
    }
    w
}

fn build_report(sample: &Sample, family: FamilyId, cfg: &TestConfig, kind: TestKind) -> Result<TestReport> {
    cfg.validate()?;
    let a = Assessment::run(sample, family, cfg.p, &cfg.bootstrap, &cfg.em)?;
    let margin = a.min_margin(cfg.alpha, cfg.method)?;
    let baseline = dirac_distance(sample, sample.mean(), cfg.p)?.value;
    let (improvement_raw, improvement) = improvement_from_baseline(margin, baseline)?;
    let (reject_h0, dual) = match kind {
        TestKind::Agof => (cfg.epsilon > margin, None),
        TestKind::Dual => {
            let t = dual_threshold(a.obs.value, &a.boot, cfg.alpha, cfg.method)?;
            (t > cfg.epsilon, Some(t))
        }
    };
    Ok(TestReport {
        kind,
        family,
        n: sample.len(),
        theta_hat: a.model.params().clone(),
        warnings: warnings(sample, &a.model, &a.boot, cfg),
        model: a.model,
        obs_norm: a.obs.value,
        obs_norm_error_bound: a.obs.abs_error_bound,
        boot: a.boot,
        reject_h0,
        min_margin: margin,
        dual_threshold: dual,
        improvement,
        improvement_raw,
        dirac_distance: baseline,
        config: cfg.clone(),
        engine_version: crate::ENGINE_VERSION.to_string(),
    })
}

/// Runs the AGoF test of `family` on `sample`.
pub fn agof_test(sample: &Sample, family: FamilyId, cfg: &TestConfig) -> Result<TestReport> {
    build_report(sample, family, cfg, TestKind::Agof)
}

/// Runs the dual test (rejection means the model deviates by more than `epsilon`).
pub fn dual_test(sample: &Sample, family: FamilyId, cfg: &TestConfig) -> Result<TestReport> {
    build_report(sample, family, cfg, TestKind::Dual)
}
