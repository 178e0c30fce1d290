//! L^p distances between distribution functions.
//!
//! Three flavours are provided:
//!
//! * [`empirical_model_distance`]: `||F_n - G||_p` for a sample against a
//!   continuous model. The real line is cut at the sample points (where `F_n`
//!   jumps) and at the points where the model cdf crosses each step level, so
//!   every panel integrand is smooth.
//! * [`analytic_distance`]: `||F - G||_p` between two continuous models, with
//!   breakpoints on both quantile grids and at located sign changes of `F - G`.
//! * [`dirac_distance`]: `||F_n - 1{. >= mu}||_p`, an exact finite sum.
//!
//! Unbounded tails are truncated at the model quantiles `tail_u` and
//! `1 - tail_u`; the neglected mass is bounded through closed-form partial
//! first moments and reported in [`DistanceResult::abs_error_bound`].

use crate::distributions::{FamilyId, FittedModel, Sample};
use crate::error::{AgofError, Result};
use crate::quadrature::{integrate_panels, QuadOptions};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceConfig {
    pub p: f64,
    pub tail_u: f64,
    pub quad_rel_tol: f64,
    pub max_subdivisions: usize,
}

impl DistanceConfig {
    pub fn new(p: f64) -> Result<Self> {
        let cfg = DistanceConfig {
            p,
            ..DistanceConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        validate_p(self.p)?;
        if !(self.tail_u > 0.0 && self.tail_u < 0.01) {
            return Err(AgofError::Config(format!("tail_u must lie in (0, 0.01), got {}", self.tail_u)));
        }
        if !(self.quad_rel_tol > 0.0) || self.max_subdivisions == 0 {
            return Err(AgofError::Config("quad_rel_tol and max_subdivisions must be positive".into()));
        }
        Ok(())
    }

    fn quad_options(&self) -> QuadOptions {
        QuadOptions {
            rel_tol: self.quad_rel_tol,
            abs_tol: 0.0,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

impl Default for DistanceConfig {
    fn default() -> Self {
        DistanceConfig {
            p: 1.0,
            tail_u: 1e-10,
            quad_rel_tol: 1e-9,
            max_subdivisions: 1_000_000,
        }
    }
}

pub(crate) fn validate_p(p: f64) -> Result<()> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(AgofError::Config(format!("p must be finite and >= 1, got {p}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    pub value: f64,
    pub abs_error_bound: f64,
}

#[inline]
fn pow_abs(d: f64, p: f64) -> f64 {
    let d = d.abs();
    if p == 1.0 {
        d
    } else if p == 2.0 {
        d * d
    } else {
        d.powf(p)
    }
}

/// Converts `integral +- err` on `int |.|^p` into a value and a bound on the root.
fn finish(integral: f64, err: f64, p: f64) -> Result<DistanceResult> {
    let integral = integral.max(0.0);
    let value = integral.powf(1.0 / p);
    let down = value - (integral - err).max(0.0).powf(1.0 / p);
    let up = (integral + err).powf(1.0 / p) - value;
    let bound = down.max(up).max(0.0);
    if bound > 0.01 * value.max(1e-12) {
        return Err(AgofError::Precision { achieved: bound, value });
    }
    Ok(DistanceResult {
        value,
        abs_error_bound: bound,
    })
}

/// Integrand on one panel of the empirical-vs-model distance: `|c - G(t)|^p`,
/// evaluated through the survival function when `c` is in the upper half.
#[derive(Clone, Copy)]
struct StepLevel {
    level: f64,
    upper: f64,
}

impl StepLevel {
    fn new(count: usize, n: usize) -> Self {
        StepLevel {
            level: count as f64 / n as f64,
            upper: (n - count) as f64 / n as f64,
        }
    }

    #[inline]
    fn gap(&self, model: &FittedModel, t: f64) -> f64 {
        if self.level > 0.5 {
            model.sf(t) - self.upper
        } else {
            model.cdf(t) - self.level
        }
    }
}

/// Standardized offsets at which each normal component contributes a breakpoint.
const COMPONENT_OFFSETS: [f64; 13] = [-8.0, -4.0, -2.0, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];

/// Points around every normal component of `model`, sorted. A mixture
/// component can be far narrower than the gaps between sample points; without
/// these breaks a quadrature panel could step over it unnoticed.
fn component_breaks(model: &FittedModel) -> Vec<f64> {
    let v = &model.params().values;
    let components: Vec<(f64, f64)> = match model.family() {
        FamilyId::Normal => vec![(v[0], v[1])],
        FamilyId::GaussianMixture { k } => (0..k).map(|j| (v[k + j], v[2 * k + j])).collect(),
        _ => Vec::new(),
    };
    let mut out: Vec<f64> = components
        .iter()
        .flat_map(|&(mu, sd)| COMPONENT_OFFSETS.iter().map(move |z| mu + z * sd))
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Splits every panel at the points of `breaks` lying strictly inside it.
fn split_panels<T: Copy>(panels: &[(f64, f64)], tags: &[T], breaks: &[f64]) -> (Vec<(f64, f64)>, Vec<T>) {
    let mut out = Vec::with_capacity(panels.len() + breaks.len());
    let mut out_tags = Vec::with_capacity(panels.len() + breaks.len());
    for (&(a, b), &tag) in panels.iter().zip(tags) {
        let start = breaks.partition_point(|&t| t <= a);
        let mut lo = a;
        for &t in breaks[start..].iter().take_while(|&&t| t < b) {
            out.push((lo, t));
            out_tags.push(tag);
            lo = t;
        }
        out.push((lo, b));
        out_tags.push(tag);
    }
    (out, out_tags)
}

/// `||F_n - G||_p` for a sample against a continuous model.
pub fn empirical_model_distance(sample: &Sample, model: &FittedModel, cfg: &DistanceConfig) -> Result<DistanceResult> {
    cfg.validate()?;
    if !model.is_continuous() {
        return Err(AgofError::Unsupported("empirical_model_distance needs a continuous model; use dirac_distance".into()));
    }
    let p = cfg.p;
    let x = sample.data();
    let n = x.len();

    // Distinct values and the empirical cdf level to their right.
    let mut knots: Vec<(f64, usize)> = Vec::with_capacity(n);
    for (i, &xi) in x.iter().enumerate() {
        match knots.last_mut() {
            Some(last) if last.0 == xi => last.1 = i + 1,
            _ => knots.push((xi, i + 1)),
        }
    }

    let mut panels: Vec<(f64, f64)> = Vec::with_capacity(2 * knots.len() + 2);
    let mut levels: Vec<StepLevel> = Vec::with_capacity(2 * knots.len() + 2);
    let mut remainder = 0.0;

    let first = knots[0].0;
    let support_lo = model.support_lower();
    if support_lo.is_finite() {
        if first > support_lo {
            panels.push((support_lo, first));
            levels.push(StepLevel::new(0, n));
        }
    } else {
        let q = model.quantile(cfg.tail_u)?;
        let cut = if first > q {
            panels.push((q, first));
            levels.push(StepLevel::new(0, n));
            q
        } else {
            first
        };
        remainder += pow_abs(model.cdf(cut), p - 1.0) * model.lower_partial_moment(cut);
    }

    let mut g_prev = model.cdf(first);
    for w in knots.windows(2) {
        let (a, count) = w[0];
        let b = w[1].0;
        let g_next = model.cdf(b);
        let step = StepLevel::new(count, n);
        if g_prev < step.level && step.level < g_next {
            let t = model.quantile(step.level)?.clamp(a, b);
            if t > a && t < b {
                panels.push((a, t));
                levels.push(step);
                panels.push((t, b));
                levels.push(step);
            } else {
                panels.push((a, b));
                levels.push(step);
            }
        } else {
            panels.push((a, b));
            levels.push(step);
        }
        g_prev = g_next;
    }

    let last = knots[knots.len() - 1].0;
    let q = model.isf(cfg.tail_u)?;
    let cut = if last < q {
        panels.push((last, q));
        levels.push(StepLevel::new(n, n));
        q
    } else {
        last
    };
    remainder += pow_abs(model.sf(cut), p - 1.0) * model.upper_partial_moment(cut);

    let (panels, levels) = split_panels(&panels, &levels, &component_breaks(model));
    let quad = integrate_panels(|i, t| pow_abs(levels[i].gap(model, t), p), &panels, &cfg.quad_options());
    if !quad.converged {
        let value = quad.value.max(0.0).powf(1.0 / p);
        return Err(AgofError::Precision {
            achieved: quad.error + remainder,
            value,
        });
    }
    finish(quad.value, quad.error + remainder, p)
}

/// Difference `F(t) - G(t)`, through the survival functions in the upper tail.
#[inline]
fn cdf_gap(f: &FittedModel, g: &FittedModel, t: f64) -> f64 {
    let (a, b) = (f.cdf(t), g.cdf(t));
    if a > 0.5 && b > 0.5 {
        g.sf(t) - f.sf(t)
    } else {
        a - b
    }
}

/// Probability levels at which each model contributes a breakpoint.
fn grid_levels() -> Vec<f64> {
    let mut lv = vec![1e-8, 1e-6, 1e-4, 1e-3, 5e-3, 1e-2, 2e-2];
    lv.extend((1..64).map(|j| j as f64 / 64.0));
    lv
}

/// Locates a sign change of `d` in `[a, b]` by bisection.
fn bisect_root(d: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let da = d(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if !(m > a && m < b) {
            break;
        }
        let dm = d(m);
        if dm == 0.0 {
            return m;
        }
        if (dm < 0.0) == (da < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// `||F - G||_p` between two continuous models.
pub fn analytic_distance(f: &FittedModel, g: &FittedModel, cfg: &DistanceConfig) -> Result<DistanceResult> {
    cfg.validate()?;
    if !f.is_continuous() || !g.is_continuous() {
        return Err(AgofError::Unsupported("analytic_distance needs two continuous models".into()));
    }
    if f == g {
        return Ok(DistanceResult {
            value: 0.0,
            abs_error_bound: 0.0,
        });
    }
    let p = cfg.p;
    let lower_cut = |m: &FittedModel| -> Result<f64> {
        let s = m.support_lower();
        if s.is_finite() {
            Ok(s)
        } else {
            m.quantile(cfg.tail_u)
        }
    };
    let lo = lower_cut(f)?.min(lower_cut(g)?);
    let hi = f.isf(cfg.tail_u)?.max(g.isf(cfg.tail_u)?);

    // Below `lo` and above `hi` both cdfs are within tail_u of 0 (resp. 1), so
    // |F - G|^p <= m^(p-1) |F - G| <= m^(p-1) (F + G) with m the larger tail mass.
    let m_lo = f.cdf(lo).max(g.cdf(lo));
    let m_hi = f.sf(hi).max(g.sf(hi));
    let remainder = pow_abs(m_lo, p - 1.0) * (f.lower_partial_moment(lo) + g.lower_partial_moment(lo))
        + pow_abs(m_hi, p - 1.0) * (f.upper_partial_moment(hi) + g.upper_partial_moment(hi));

    let mut breaks = vec![lo, hi];
    for m in [f, g] {
        breaks.extend(component_breaks(m).into_iter().filter(|&q| q > lo && q < hi));
        for u in grid_levels() {
            for q in [m.quantile(u)?, m.isf(u)?] {
                if q > lo && q < hi {
                    breaks.push(q);
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let d = |t: f64| cdf_gap(f, g, t);
    let mut refined = Vec::with_capacity(breaks.len() * 2);
    const PROBES: usize = 16;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        refined.push(a);
        let mut prev_t = a;
        let mut prev_d = d(a);
        for j in 1..=PROBES {
            let t = if j == PROBES { b } else { a + (b - a) * j as f64 / PROBES as f64 };
            let dt = d(t);
            if (prev_d < 0.0 && dt > 0.0) || (prev_d > 0.0 && dt < 0.0) {
                let r = bisect_root(d, prev_t, t);
                if r > a && r < b {
                    refined.push(r);
                }
            }
            prev_t = t;
            prev_d = dt;
        }
    }
    refined.push(hi);
    refined.sort_by(f64::total_cmp);
    refined.dedup();

    let panels: Vec<(f64, f64)> = refined.windows(2).map(|w| (w[0], w[1])).collect();
    let quad = integrate_panels(|_, t| pow_abs(cdf_gap(f, g, t), p), &panels, &cfg.quad_options());
    if !quad.converged {
        return Err(AgofError::Precision {
            achieved: quad.error + remainder,
            value: quad.value.max(0.0).powf(1.0 / p),
        });
    }
    finish(quad.value, quad.error + remainder, p)
}

/// `||F_n - F_{delta_mu}||_p`: both functions are steps, so the integral is a finite sum.
pub fn dirac_distance(sample: &Sample, mu: f64, p: f64) -> Result<DistanceResult> {
    validate_p(p)?;
    if !mu.is_finite() {
        return Err(AgofError::Domain(format!("dirac location must be finite, got {mu}")));
    }
    let x = sample.data();
    let n = x.len();
    let mut points: Vec<f64> = Vec::with_capacity(n + 1);
    points.extend_from_slice(x);
    let pos = x.partition_point(|&v| v < mu);
    points.insert(pos, mu);

    let mut total = 0.0;
    let mut count = 0usize;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        // Empirical level on [a, b): number of observations <= a.
        while count < n && x[count] <= a {
            count += 1;
        }
        if b > a {
            let fn_level = count as f64 / n as f64;
            let dirac = if a >= mu { 1.0 } else { 0.0 };
            total += pow_abs(fn_level - dirac, p) * (b - a);
        }
    }
    Ok(DistanceResult {
        value: total.powf(1.0 / p),
        abs_error_bound: 0.0,
    })
}
