//! Parametric families: evaluation, simulation and maximum-likelihood fitting.
//!
//! Parameter layouts (the order of [`Params::values`]):
//!
//! | family                | layout                                  |
//! |-----------------------|-----------------------------------------|
//! | `exponential`         | `theta` (scale, mean)                   |
//! | `normal`              | `mu, sigma`                             |
//! | `weibull`             | `shape, scale`                          |
//! | `gaussian_mixture(k)` | `w_1..w_k, mu_1..mu_k, sigma_1..sigma_k` |
//! | `dirac`               | `mu`                                    |

mod em;
mod fit;
mod json;
pub mod special;

pub use em::{em_fit_mixture, em_fit_mixture_detailed, EmConfig, EmFit};
pub use fit::{fit_mle, fit_mle_with_em};
pub use json::ModelJson;

use crate::error::{AgofError, Result};
use crate::rng;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use special::{solve_increasing, std_normal_cdf, std_normal_ln_pdf, std_normal_quantile, std_normal_sf};
use statrs::function::gamma::{gamma, gamma_ur};
use std::fmt;

/// Tolerance on the mixture weight sum.
const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Identifies a parametric family. Serialized as its display string, e.g.
/// `"normal"` or `"gaussian_mixture(2)"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyId {
    Exponential,
    Normal,
    Weibull,
    GaussianMixture { k: usize },
    Dirac,
}

impl FamilyId {
    pub fn gaussian_mixture(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(AgofError::Domain("gaussian_mixture needs k >= 1".into()));
        }
        Ok(FamilyId::GaussianMixture { k })
    }

    /// Number of entries in the parameter vector.
    pub fn n_params(&self) -> usize {
        match *self {
            FamilyId::Exponential | FamilyId::Dirac => 1,
            FamilyId::Normal | FamilyId::Weibull => 2,
            FamilyId::GaussianMixture { k } => 3 * k,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilyId::Exponential => "exponential",
            FamilyId::Normal => "normal",
            FamilyId::Weibull => "weibull",
            FamilyId::GaussianMixture { .. } => "gaussian_mixture",
            FamilyId::Dirac => "dirac",
        }
    }

    /// Parses `exponential`, `normal`, `weibull`, `dirac`, `gaussian_mixture`
    /// (with `k` supplied separately) or `gaussian_mixture(3)`.
    pub fn parse(name: &str, k: Option<usize>) -> Result<Self> {
        let name = name.trim();
        if let Some(rest) = name.strip_prefix("gaussian_mixture(") {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| AgofError::Input(format!("bad family '{name}'")))?;
            let k: usize = inner
                .parse()
                .map_err(|_| AgofError::Input(format!("bad mixture arity in '{name}'")))?;
            return FamilyId::gaussian_mixture(k);
        }
        match name {
            "exponential" => Ok(FamilyId::Exponential),
            "normal" => Ok(FamilyId::Normal),
            "weibull" => Ok(FamilyId::Weibull),
            "dirac" => Ok(FamilyId::Dirac),
            "gaussian_mixture" | "mixture" => FamilyId::gaussian_mixture(k.unwrap_or(1)),
            other => Err(AgofError::Input(format!("unknown family '{other}'"))),
        }
    }
}

impl std::str::FromStr for FamilyId {
    type Err = AgofError;

    fn from_str(s: &str) -> Result<Self> {
        FamilyId::parse(s, None)
    }
}

impl Serialize for FamilyId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FamilyId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyId::GaussianMixture { k } => write!(f, "gaussian_mixture({k})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Raw parameter vector; see the module docs for the per-family layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Params {
    pub values: Vec<f64>,
}

impl Params {
    pub fn new(values: Vec<f64>) -> Self {
        Params { values }
    }

    /// Checks the layout and positivity constraints for `family`.
    pub fn validate(&self, family: FamilyId) -> Result<()> {
        let v = &self.values;
        if v.len() != family.n_params() {
            return Err(AgofError::Domain(format!(
                "{family} expects {} parameters, got {}",
                family.n_params(),
                v.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(AgofError::Domain(format!("{family} parameters must be finite")));
        }
        let positive = |x: f64, what: &str| {
            if x > 0.0 {
                Ok(())
            } else {
                Err(AgofError::Domain(format!("{family}: {what} must be > 0, got {x}")))
            }
        };
        match family {
            FamilyId::Exponential => positive(v[0], "theta"),
            FamilyId::Normal => positive(v[1], "sigma"),
            FamilyId::Weibull => {
                positive(v[0], "shape")?;
                positive(v[1], "scale")
            }
            FamilyId::GaussianMixture { k } => {
                for &w in &v[..k] {
                    positive(w, "weight")?;
                }
                for &s in &v[2 * k..] {
                    positive(s, "sd")?;
                }
                let total: f64 = v[..k].iter().sum();
                if (total - 1.0).abs() > WEIGHT_SUM_TOL {
                    return Err(AgofError::Domain(format!("mixture weights sum to {total}, not 1")));
                }
                Ok(())
            }
            FamilyId::Dirac => Ok(()),
        }
    }
}

/// Sorted, finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    data: Vec<f64>,
    provenance: String,
}

impl Sample {
    pub fn new(mut data: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if data.is_empty() {
            return Err(AgofError::InsufficientData { needed: 1, got: 0 });
        }
        if let Some(bad) = data.iter().find(|x| !x.is_finite()) {
            return Err(AgofError::Domain(format!("sample contains non-finite value {bad}")));
        }
        data.sort_by(f64::total_cmp);
        Ok(Sample {
            data,
            provenance: provenance.into(),
        })
    }

    /// Builds a sample from data already sorted ascending and finite.
    pub(crate) fn from_sorted(data: Vec<f64>, provenance: impl Into<String>) -> Self {
        debug_assert!(!data.is_empty());
        debug_assert!(data.windows(2).all(|w| w[0] <= w[1]));
        Sample {
            data,
            provenance: provenance.into(),
        }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn min(&self) -> f64 {
        self.data[0]
    }

    pub fn max(&self) -> f64 {
        self.data[self.data.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Variance with denominator `n`.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.data.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / self.data.len() as f64
    }

    pub fn distinct_count(&self) -> usize {
        1 + self.data.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Returns a copy with every observation mapped through `f` (must be increasing).
    pub fn map_increasing(&self, f: impl Fn(f64) -> f64) -> Result<Sample> {
        Sample::new(self.data.iter().map(|&x| f(x)).collect(), self.provenance.clone())
    }
}

/// A family together with a validated parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    family: FamilyId,
    params: Params,
}

impl FittedModel {
    pub fn new(family: FamilyId, params: Params) -> Result<Self> {
        params.validate(family)?;
        Ok(FittedModel { family, params })
    }

    pub fn exponential(theta: f64) -> Result<Self> {
        Self::new(FamilyId::Exponential, Params::new(vec![theta]))
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(FamilyId::Normal, Params::new(vec![mu, sigma]))
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Self::new(FamilyId::Weibull, Params::new(vec![shape, scale]))
    }

    pub fn dirac(mu: f64) -> Result<Self> {
        Self::new(FamilyId::Dirac, Params::new(vec![mu]))
    }

    pub fn gaussian_mixture(weights: &[f64], means: &[f64], sds: &[f64]) -> Result<Self> {
        let k = weights.len();
        if means.len() != k || sds.len() != k {
            return Err(AgofError::Domain("mixture weights, means and sds differ in length".into()));
        }
        let mut v = Vec::with_capacity(3 * k);
        v.extend_from_slice(weights);
        v.extend_from_slice(means);
        v.extend_from_slice(sds);
        Self::new(FamilyId::gaussian_mixture(k)?, Params::new(v))
    }

    pub fn family(&self) -> FamilyId {
        self.family
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn is_continuous(&self) -> bool {
        self.family != FamilyId::Dirac
    }

    fn mixture_parts(&self) -> (&[f64], &[f64], &[f64]) {
        let v = &self.params.values;
        let k = v.len() / 3;
        (&v[..k], &v[k..2 * k], &v[2 * k..])
    }

    /// Distribution function at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let v = &self.params.values;
        match self.family {
            FamilyId::Exponential => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / v[0]).exp_m1()
                }
            }
            FamilyId::Normal => std_normal_cdf((x - v[0]) / v[1]),
            FamilyId::Weibull => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-(x / v[1]).powf(v[0])).exp_m1()
                }
            }
            FamilyId::GaussianMixture { .. } => {
                let (w, m, s) = self.mixture_parts();
                w.iter()
                    .zip(m)
                    .zip(s)
                    .map(|((w, m), s)| w * std_normal_cdf((x - m) / s))
                    .sum::<f64>()
                    .min(1.0)
            }
            FamilyId::Dirac => {
                if x >= v[0] {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Survival function `1 - cdf(x)`, evaluated without cancellation in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        let v = &self.params.values;
        match self.family {
            FamilyId::Exponential => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-x / v[0]).exp()
                }
            }
            FamilyId::Normal => std_normal_sf((x - v[0]) / v[1]),
            FamilyId::Weibull => {
                if x <= 0.0 {
                    1.0
                } else {
                    (-(x / v[1]).powf(v[0])).exp()
                }
            }
            FamilyId::GaussianMixture { .. } => {
                let (w, m, s) = self.mixture_parts();
                w.iter()
                    .zip(m)
                    .zip(s)
                    .map(|((w, m), s)| w * std_normal_sf((x - m) / s))
                    .sum::<f64>()
                    .min(1.0)
            }
            FamilyId::Dirac => 1.0 - self.cdf(x),
        }
    }

    /// Log density; `-inf` outside the support. Not defined for `dirac`.
    pub fn ln_pdf(&self, x: f64) -> Result<f64> {
        let v = &self.params.values;
        Ok(match self.family {
            FamilyId::Exponential => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -v[0].ln() - x / v[0]
                }
            }
            FamilyId::Normal => std_normal_ln_pdf((x - v[0]) / v[1]) - v[1].ln(),
            FamilyId::Weibull => {
                let (k, lambda) = (v[0], v[1]);
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else if x == 0.0 {
                    match k.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Greater) => f64::NEG_INFINITY,
                        Some(std::cmp::Ordering::Equal) => -lambda.ln(),
                        _ => f64::INFINITY,
                    }
                } else {
                    let t = x / lambda;
                    (k / lambda).ln() + (k - 1.0) * t.ln() - t.powf(k)
                }
            }
            FamilyId::GaussianMixture { .. } => {
                let (w, m, s) = self.mixture_parts();
                let terms: Vec<f64> = w
                    .iter()
                    .zip(m)
                    .zip(s)
                    .map(|((w, m), s)| w.ln() + std_normal_ln_pdf((x - m) / s) - s.ln())
                    .collect();
                log_sum_exp(&terms)
            }
            FamilyId::Dirac => {
                return Err(AgofError::Unsupported("dirac has no density".into()));
            }
        })
    }

    /// Generalized inverse of the cdf at `u` in (0, 1).
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(AgofError::Domain(format!("quantile level {u} outside (0, 1)")));
        }
        let v = &self.params.values;
        Ok(match self.family {
            FamilyId::Exponential => -v[0] * (-u).ln_1p(),
            FamilyId::Normal => v[0] + v[1] * std_normal_quantile(u),
            FamilyId::Weibull => v[1] * (-(-u).ln_1p()).powf(1.0 / v[0]),
            FamilyId::GaussianMixture { .. } => {
                let (_, m, s) = self.mixture_parts();
                let z = std_normal_quantile(u);
                let (lo, hi) = bracket(m, s, z);
                solve_increasing(|x| self.cdf(x), u, lo, hi, 1e-15)
            }
            FamilyId::Dirac => v[0],
        })
    }

    /// Inverse survival function: the `x` with `sf(x) = u`, accurate for small `u`.
    pub fn isf(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(AgofError::Domain(format!("survival level {u} outside (0, 1)")));
        }
        let v = &self.params.values;
        Ok(match self.family {
            FamilyId::Exponential => -v[0] * u.ln(),
            FamilyId::Normal => v[0] - v[1] * std_normal_quantile(u),
            FamilyId::Weibull => v[1] * (-u.ln()).powf(1.0 / v[0]),
            FamilyId::GaussianMixture { .. } => {
                let (_, m, s) = self.mixture_parts();
                let z = -std_normal_quantile(u);
                let (lo, hi) = bracket(m, s, z);
                solve_increasing(|x| -self.sf(x), -u, lo, hi, 1e-15 * u)
            }
            FamilyId::Dirac => v[0],
        })
    }

    /// Lower end of the support (`-inf` for unbounded families).
    pub fn support_lower(&self) -> f64 {
        match self.family {
            FamilyId::Exponential | FamilyId::Weibull => 0.0,
            FamilyId::Normal | FamilyId::GaussianMixture { .. } => f64::NEG_INFINITY,
            FamilyId::Dirac => self.params.values[0],
        }
    }

    pub fn mean(&self) -> f64 {
        let v = &self.params.values;
        match self.family {
            FamilyId::Exponential => v[0],
            FamilyId::Normal | FamilyId::Dirac => v[0],
            FamilyId::Weibull => v[1] * gamma(1.0 + 1.0 / v[0]),
            FamilyId::GaussianMixture { .. } => {
                let (w, m, _) = self.mixture_parts();
                w.iter().zip(m).map(|(w, m)| w * m).sum()
            }
        }
    }

    pub fn variance(&self) -> f64 {
        let v = &self.params.values;
        match self.family {
            FamilyId::Exponential => v[0] * v[0],
            FamilyId::Normal => v[1] * v[1],
            FamilyId::Weibull => {
                let g1 = gamma(1.0 + 1.0 / v[0]);
                v[1] * v[1] * (gamma(1.0 + 2.0 / v[0]) - g1 * g1)
            }
            FamilyId::GaussianMixture { .. } => {
                let (w, m, s) = self.mixture_parts();
                let mean = self.mean();
                w.iter()
                    .zip(m)
                    .zip(s)
                    .map(|((w, m), s)| w * (s * s + (m - mean) * (m - mean)))
                    .sum()
            }
            FamilyId::Dirac => 0.0,
        }
    }

    /// `E[(q - X)^+] = integral of cdf over (-inf, q]`.
    pub fn lower_partial_moment(&self, q: f64) -> f64 {
        let v = &self.params.values;
        match self.family {
            FamilyId::Exponential => {
                if q <= 0.0 {
                    0.0
                } else {
                    q + v[0] * (-q / v[0]).exp_m1()
                }
            }
            FamilyId::Normal => normal_lower_pm(q, v[0], v[1]),
            FamilyId::Weibull => {
                if q <= 0.0 {
                    0.0
                } else {
                    (q - self.mean() + self.upper_partial_moment(q)).max(0.0)
                }
            }
            FamilyId::GaussianMixture { .. } => {
                let (w, m, s) = self.mixture_parts();
                w.iter().zip(m).zip(s).map(|((w, m), s)| w * normal_lower_pm(q, *m, *s)).sum()
            }
            FamilyId::Dirac => (q - v[0]).max(0.0),
        }
    }

    /// `E[(X - q)^+] = integral of the survival function over [q, inf)`.
    pub fn upper_partial_moment(&self, q: f64) -> f64 {
        let v = &self.params.values;
        match self.family {
            FamilyId::Exponential => {
                if q <= 0.0 {
                    v[0] - q
                } else {
                    v[0] * (-q / v[0]).exp()
                }
            }
            FamilyId::Normal => normal_lower_pm(-q, -v[0], v[1]),
            FamilyId::Weibull => {
                let (k, lambda) = (v[0], v[1]);
                if q <= 0.0 {
                    self.mean() - q
                } else {
                    let a = 1.0 / k;
                    lambda * a * gamma(a) * gamma_ur(a, (q / lambda).powf(k))
                }
            }
            FamilyId::GaussianMixture { .. } => {
                let (w, m, s) = self.mixture_parts();
                w.iter().zip(m).zip(s).map(|((w, m), s)| w * normal_lower_pm(-q, -m, *s)).sum()
            }
            FamilyId::Dirac => (v[0] - q).max(0.0),
        }
    }

    /// Draws `n` i.i.d. observations, deterministic in `(self, n, seed)`.
    pub fn draw_sample(&self, n: usize, seed: u64) -> Result<Sample> {
        if n == 0 {
            return Err(AgofError::Domain("sample size must be >= 1".into()));
        }
        let mut rng = rng::stream(seed, rng::domain::DRAW, 0);
        let mut data: Vec<f64> = (0..n).map(|_| self.draw_one(&mut rng)).collect();
        data.sort_by(f64::total_cmp);
        Ok(Sample::from_sorted(data, format!("draw:{}:n={n}:seed={seed}", self)))
    }

    pub(crate) fn draw_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = &self.params.values;
        match self.family {
            FamilyId::Exponential => v[0] * <Exp1 as Distribution<f64>>::sample(&Exp1, rng),
            FamilyId::Normal => v[0] + v[1] * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng),
            FamilyId::Weibull => {
                let e: f64 = Exp1.sample(rng);
                v[1] * e.powf(1.0 / v[0])
            }
            FamilyId::GaussianMixture { k } => {
                let (w, m, s) = self.mixture_parts();
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut j = k - 1;
                for (i, wi) in w.iter().enumerate() {
                    acc += wi;
                    if u < acc {
                        j = i;
                        break;
                    }
                }
                let z: f64 = StandardNormal.sample(rng);
                m[j] + s[j] * z
            }
            FamilyId::Dirac => v[0],
        }
    }
}

impl fmt::Display for FittedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vals: Vec<String> = self.params.values.iter().map(|x| format!("{x}")).collect();
        write!(f, "{}:{}", self.family.name(), vals.join(","))
    }
}

fn normal_lower_pm(q: f64, mu: f64, sigma: f64) -> f64 {
    let z = (q - mu) / sigma;
    (sigma * (special::std_normal_pdf(z) + z * std_normal_cdf(z))).max(0.0)
}

/// Bracket for a mixture quantile: the mixture cdf lies between the smallest
/// and largest component cdf, so the component quantiles bound the root.
fn bracket(means: &[f64], sds: &[f64], z: f64) -> (f64, f64) {
    let qs = means.iter().zip(sds).map(|(m, s)| m + s * z);
    let lo = qs.clone().fold(f64::INFINITY, f64::min);
    let hi = qs.fold(f64::NEG_INFINITY, f64::max);
    let pad = 1e-12 * (lo.abs() + hi.abs() + 1.0);
    (lo - pad, hi + pad)
}

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `sum_i ln g(x_i)`; `-inf` when any observation lies outside the support.
pub fn log_likelihood(model: &FittedModel, sample: &Sample) -> Result<f64> {
    if !model.is_continuous() {
        return Err(AgofError::Unsupported("log-likelihood of a dirac model".into()));
    }
    let mut total = 0.0;
    for &x in sample.data() {
        let l = model.ln_pdf(x)?;
        if l == f64::NEG_INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        total += l;
    }
    Ok(total)
}

/// Maximum-likelihood projection of a known distribution onto `family`.
///
/// Only families whose score equations reduce to moment conditions are
/// supported: exponential (`theta = E X`), normal (mean and standard
/// deviation) and dirac (mean).
pub fn projection_params(true_dist: &FittedModel, family: FamilyId) -> Result<Params> {
    if true_dist.family() == family && matches!(family, FamilyId::Exponential | FamilyId::Normal | FamilyId::Dirac) {
        return Ok(true_dist.params().clone());
    }
    let mean = true_dist.mean();
    match family {
        FamilyId::Exponential => {
            if true_dist.support_lower() < 0.0 {
                return Err(AgofError::Domain(format!(
                    "{true_dist} puts mass on negative values; the exponential projection does not exist"
                )));
            }
            Ok(Params::new(vec![mean]))
        }
        FamilyId::Normal => {
            let var = true_dist.variance();
            if !(var > 0.0) {
                return Err(AgofError::DegenerateData(format!("{true_dist} has zero variance")));
            }
            Ok(Params::new(vec![mean, var.sqrt()]))
        }
        FamilyId::Dirac => Ok(Params::new(vec![mean])),
        FamilyId::Weibull | FamilyId::GaussianMixture { .. } => Err(AgofError::Unsupported(format!(
            "no closed-form projection onto {family}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_models() -> Vec<FittedModel> {
        vec![
            FittedModel::exponential(1.7).unwrap(),
            FittedModel::normal(-0.3, 2.1).unwrap(),
            FittedModel::weibull(2.0, 1.0).unwrap(),
            FittedModel::weibull(0.7, 3.0).unwrap(),
            FittedModel::gaussian_mixture(&[0.8, 0.2], &[0.0, 2.0], &[1.0, 2.0]).unwrap(),
            FittedModel::gaussian_mixture(&[0.3, 0.3, 0.4], &[-5.0, 0.0, 8.0], &[0.5, 1.0, 0.1]).unwrap(),
        ]
    }

    #[test]
    fn cdf_fixtures() {
        assert_eq!(FittedModel::exponential(1.0).unwrap().cdf(0.0), 0.0);
        assert_eq!(FittedModel::normal(0.0, 1.0).unwrap().cdf(0.0), 0.5);
        let w = FittedModel::weibull(2.0, 1.0).unwrap().cdf(1.0);
        assert!((w - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((w - 0.632_121).abs() < 1e-6);
        let d = FittedModel::dirac(1.5).unwrap();
        assert_eq!(d.cdf(1.5), 1.0);
        assert_eq!(d.cdf(1.4999), 0.0);
    }

    #[test]
    fn quantile_fixtures() {
        let e = FittedModel::exponential(1.0).unwrap();
        assert!((e.quantile(1.0 - (-1.0f64).exp()).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(FittedModel::normal(0.0, 1.0).unwrap().quantile(0.5).unwrap(), 0.0);
        for m in all_models() {
            assert!(matches!(m.quantile(1.2), Err(AgofError::Domain(_))));
            assert!(matches!(m.quantile(0.0), Err(AgofError::Domain(_))));
        }
        assert_eq!(FittedModel::dirac(3.0).unwrap().quantile(0.3).unwrap(), 3.0);
    }

    #[test]
    fn quantile_cdf_round_trip_on_grid() {
        for m in all_models() {
            for i in 1..=999 {
                let u = i as f64 / 1000.0;
                let x = m.quantile(u).unwrap();
                assert!((m.cdf(x) - u).abs() < 1e-10, "{m} u={u}");
                let y = m.isf(u).unwrap();
                assert!((m.sf(y) - u).abs() < 1e-10, "{m} isf u={u}");
            }
            let x = m.isf(1e-10).unwrap();
            assert!((m.sf(x) - 1e-10).abs() < 1e-16, "{m}");
        }
    }

    #[test]
    fn partial_moments_match_quadrature() {
        use crate::quadrature::{gauss_legendre_adaptive, QuadOptions};
        let opts = QuadOptions { rel_tol: 1e-12, abs_tol: 1e-14, max_subdivisions: 100_000 };
        for m in all_models() {
            for &u in &[0.01, 0.3, 0.9] {
                let q = m.quantile(u).unwrap();
                let lo = if m.support_lower().is_finite() { m.support_lower() } else { m.quantile(1e-16).unwrap() };
                let hi = m.isf(1e-16).unwrap();
                let lower = gauss_legendre_adaptive(|t| m.cdf(t), lo, q, &opts).unwrap();
                let upper = gauss_legendre_adaptive(|t| m.sf(t), q, hi, &opts).unwrap();
                assert!((lower.value - m.lower_partial_moment(q)).abs() < 1e-8, "{m} lower u={u}");
                assert!((upper.value - m.upper_partial_moment(q)).abs() < 1e-8, "{m} upper u={u}");
            }
        }
    }

    #[test]
    fn draw_is_deterministic_and_rejects_zero() {
        let m = FittedModel::gaussian_mixture(&[0.8, 0.2], &[0.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(m.draw_sample(100, 9).unwrap(), m.draw_sample(100, 9).unwrap());
        assert_ne!(m.draw_sample(100, 9).unwrap(), m.draw_sample(100, 10).unwrap());
        assert!(matches!(m.draw_sample(0, 9), Err(AgofError::Domain(_))));
    }

    #[test]
    fn weibull_draws_pass_ks_band() {
        // One-sample Kolmogorov statistic against the analytic cdf; the
        // 1.95/sqrt(n) band holds with probability about 0.999 per seed.
        let m = FittedModel::weibull(2.0, 1.0).unwrap();
        let n = 100_000;
        let mut passes = 0;
        for seed in 0..5 {
            let s = m.draw_sample(n, seed).unwrap();
            let mut d: f64 = 0.0;
            for (i, &x) in s.data().iter().enumerate() {
                let f = m.cdf(x);
                d = d.max((f - i as f64 / n as f64).abs()).max(((i + 1) as f64 / n as f64 - f).abs());
            }
            if d < 1.95 / (n as f64).sqrt() {
                passes += 1;
            }
        }
        assert!(passes >= 4, "only {passes}/5 seeds inside the KS band");
    }

    #[test]
    fn log_likelihood_fixtures() {
        let n = FittedModel::normal(0.0, 1.0).unwrap();
        let s = Sample::new(vec![0.0], "t").unwrap();
        assert!((log_likelihood(&n, &s).unwrap() + 0.918_938_533_204_672_7).abs() < 1e-12);
        let e = FittedModel::exponential(1.0).unwrap();
        let s = Sample::new(vec![0.5, 1.5], "t").unwrap();
        assert!((log_likelihood(&e, &s).unwrap() + 2.0).abs() < 1e-15);
        let s = Sample::new(vec![-1.0], "t").unwrap();
        assert_eq!(log_likelihood(&e, &s).unwrap(), f64::NEG_INFINITY);
        let d = FittedModel::dirac(0.0).unwrap();
        assert!(matches!(log_likelihood(&d, &s), Err(AgofError::Unsupported(_))));
    }

    #[test]
    fn projection_fixtures() {
        let w = FittedModel::weibull(2.0, 1.0).unwrap();
        let p = projection_params(&w, FamilyId::Exponential).unwrap();
        assert!((p.values[0] - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-12);
        assert!((p.values[0] - 0.886_227).abs() < 1e-6);

        let mix = FittedModel::gaussian_mixture(&[0.8, 0.2], &[0.0, 2.0], &[1.0, 2.0]).unwrap();
        let p = projection_params(&mix, FamilyId::Normal).unwrap();
        assert!((p.values[0] - 0.4).abs() < 1e-12);
        assert!((p.values[1] - 2.24f64.sqrt()).abs() < 1e-12);
        assert!((p.values[1] - 1.496_663).abs() < 1e-6);

        let n = FittedModel::normal(3.0, 0.5).unwrap();
        assert_eq!(projection_params(&n, FamilyId::Normal).unwrap(), *n.params());
        assert!(matches!(projection_params(&n, FamilyId::Weibull), Err(AgofError::Unsupported(_))));
        assert!(matches!(
            projection_params(&n, FamilyId::GaussianMixture { k: 2 }),
            Err(AgofError::Unsupported(_))
        ));
        assert!(matches!(projection_params(&n, FamilyId::Exponential), Err(AgofError::Domain(_))));
        assert_eq!(projection_params(&mix, FamilyId::Dirac).unwrap().values, vec![0.4]);
    }

    #[test]
    fn params_validation() {
        assert!(FittedModel::exponential(0.0).is_err());
        assert!(FittedModel::normal(0.0, -1.0).is_err());
        assert!(FittedModel::gaussian_mixture(&[0.5, 0.4], &[0.0, 1.0], &[1.0, 1.0]).is_err());
        assert!(FittedModel::gaussian_mixture(&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]).is_err());
        assert!(FittedModel::new(FamilyId::Normal, Params::new(vec![1.0])).is_err());
        assert!(FamilyId::gaussian_mixture(0).is_err());
        assert_eq!(FamilyId::parse("gaussian_mixture(3)", None).unwrap(), FamilyId::GaussianMixture { k: 3 });
    }

    proptest! {
        #[test]
        fn cdf_is_monotone(xs in prop::collection::vec(-20.0f64..20.0, 2..50)) {
            let mut xs = xs;
            xs.sort_by(f64::total_cmp);
            for m in all_models() {
                for w in xs.windows(2) {
                    prop_assert!(m.cdf(w[0]) <= m.cdf(w[1]));
                }
                prop_assert!(xs.iter().all(|&x| (0.0..=1.0).contains(&m.cdf(x))));
            }
        }
    }
}
