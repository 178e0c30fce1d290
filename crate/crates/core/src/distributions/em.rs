//! Expectation-maximization for univariate Gaussian mixtures.

use super::special::std_normal_ln_pdf;
use super::{log_sum_exp, Params, Sample};
use crate::error::{AgofError, Result};
use crate::rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Weights below this are clamped so every component keeps a positive weight.
const MIN_WEIGHT: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once the relative log-likelihood improvement falls below this.
    pub rel_tol: f64,
    /// Component variances are floored at this multiple of the sample variance.
    pub variance_floor_factor: f64,
    pub seed: u64,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            restarts: 10,
            max_iter: 500,
            rel_tol: 1e-8,
            variance_floor_factor: 1e-6,
            seed: 0,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iter == 0 {
            return Err(AgofError::Config("EM restarts and max_iter must be >= 1".into()));
        }
        if !(self.rel_tol > 0.0) || !(self.variance_floor_factor > 0.0) {
            return Err(AgofError::Config(
                "EM rel_tol and variance_floor_factor must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Full result of a multi-restart EM run.
#[derive(Debug, Clone)]
pub struct EmFit {
    /// Canonical parameters (components sorted by ascending mean).
    pub params: Params,
    pub log_likelihood: f64,
    /// Index of the winning restart.
    pub restart: usize,
    /// Log-likelihood after each iteration, one trace per restart.
    pub traces: Vec<Vec<f64>>,
    /// Restarts that ended with every component on the variance floor.
    pub floored_restarts: usize,
}

struct RestartResult {
    weights: Vec<f64>,
    means: Vec<f64>,
    vars: Vec<f64>,
    ll: f64,
    trace: Vec<f64>,
    all_floored: bool,
}

/// Best-of-restarts EM fit of a `k`-component Gaussian mixture.
pub fn em_fit_mixture(sample: &Sample, k: usize, cfg: &EmConfig) -> Result<Params> {
    em_fit_mixture_detailed(sample, k, cfg).map(|f| f.params)
}

pub fn em_fit_mixture_detailed(sample: &Sample, k: usize, cfg: &EmConfig) -> Result<EmFit> {
    cfg.validate()?;
    if k == 0 {
        return Err(AgofError::Domain("mixture needs k >= 1".into()));
    }
    if sample.len() < 2 * k {
        return Err(AgofError::InsufficientData { needed: 2 * k, got: sample.len() });
    }
    let var = sample.variance();
    if !(var > 0.0) {
        return Err(AgofError::DegenerateData("zero sample variance".into()));
    }

    let results: Vec<RestartResult> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(sample, k, cfg, var, r))
        .collect();

    let floored_restarts = results.iter().filter(|r| r.all_floored).count();
    if floored_restarts == results.len() {
        return Err(AgofError::DegenerateFit(format!(
            "all {} restarts collapsed onto the variance floor",
            results.len()
        )));
    }

    // Highest log-likelihood wins; ties go to the lowest restart index.
    let (best_idx, best) = results
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.all_floored)
        .fold(None::<(usize, &RestartResult)>, |acc, (i, r)| match acc {
            Some((_, b)) if b.ll >= r.ll => acc,
            _ => Some((i, r)),
        })
        .expect("at least one restart survives");

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| best.means[a].total_cmp(&best.means[b]));
    let mut values = Vec::with_capacity(3 * k);
    values.extend(order.iter().map(|&j| best.weights[j]));
    values.extend(order.iter().map(|&j| best.means[j]));
    values.extend(order.iter().map(|&j| best.vars[j].sqrt()));
    // Renormalize once more so the sum is 1 to rounding after reordering.
    let total: f64 = values[..k].iter().sum();
    values[..k].iter_mut().for_each(|w| *w /= total);

    Ok(EmFit {
        params: Params::new(values),
        log_likelihood: best.ll,
        restart: best_idx,
        traces: results.into_iter().map(|r| r.trace).collect(),
        floored_restarts,
    })
}

fn empirical_quantile(sorted: &[f64], u: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * u;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// E-step: fills `resp` (row-major n x k) and returns the log-likelihood.
fn e_step(x: &[f64], weights: &[f64], means: &[f64], vars: &[f64], resp: &mut [f64]) -> f64 {
    let k = weights.len();
    let ln_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let sds: Vec<f64> = vars.iter().map(|v| v.sqrt()).collect();
    let ln_sd: Vec<f64> = sds.iter().map(|s| s.ln()).collect();
    let mut ll = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        let row = &mut resp[i * k..(i + 1) * k];
        for j in 0..k {
            row[j] = ln_w[j] + std_normal_ln_pdf((xi - means[j]) / sds[j]) - ln_sd[j];
        }
        let lse = log_sum_exp(row);
        for r in row.iter_mut() {
            *r = (*r - lse).exp();
        }
        ll += lse;
    }
    ll
}

fn run_restart(sample: &Sample, k: usize, cfg: &EmConfig, sample_var: f64, restart: usize) -> RestartResult {
    let x = sample.data();
    let n = x.len();
    let sd = sample_var.sqrt();
    let floor = cfg.variance_floor_factor * sample_var;
    let mut rng = rng::stream(cfg.seed, rng::domain::EM_INIT, restart as u64);

    let mut weights = vec![1.0 / k as f64; k];
    let mut means: Vec<f64> = (1..=k)
        .map(|j| {
            let z: f64 = StandardNormal.sample(&mut rng);
            empirical_quantile(x, j as f64 / (k + 1) as f64) + 0.1 * sd * z
        })
        .collect();
    let mut vars = vec![sample_var; k];
    let mut resp = vec![0.0; n * k];

    let mut ll = e_step(x, &weights, &means, &vars, &mut resp);
    let mut trace = vec![ll];
    let mut all_floored = false;

    for _ in 0..cfg.max_iter {
        all_floored = true;
        for j in 0..k {
            let nj: f64 = (0..n).map(|i| resp[i * k + j]).sum();
            if nj <= MIN_WEIGHT * n as f64 || !nj.is_finite() {
                // Empty component: keep its location and shape, drop its weight.
                weights[j] = MIN_WEIGHT;
                all_floored &= vars[j] <= floor;
                continue;
            }
            weights[j] = nj / n as f64;
            let mj = (0..n).map(|i| resp[i * k + j] * x[i]).sum::<f64>() / nj;
            let vj = (0..n).map(|i| resp[i * k + j] * (x[i] - mj) * (x[i] - mj)).sum::<f64>() / nj;
            means[j] = mj;
            if vj <= floor {
                vars[j] = floor;
            } else {
                vars[j] = vj;
                all_floored = false;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w = (*w / total).max(MIN_WEIGHT));

        let new_ll = e_step(x, &weights, &means, &vars, &mut resp);
        trace.push(new_ll);
        let improvement = new_ll - ll;
        ll = new_ll;
        if improvement <= cfg.rel_tol * ll.abs() {
            break;
        }
    }

    RestartResult {
        weights,
        means,
        vars,
        ll,
        trace,
        all_floored,
    }
}
