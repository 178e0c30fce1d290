#![allow(dead_code)]

use agof::{FittedModel, Sample};

/// Number of midpoint cells spread over the whole integration range.
const CELLS: usize = 400_000;
/// Minimum number of cells inside any single segment.
const MIN_CELLS: usize = 40;

fn midpoint_sum(lo: f64, hi: f64, cells: usize, f: impl Fn(f64) -> f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let h = (hi - lo) / cells as f64;
    (0..cells).map(|i| f(lo + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

fn range_of(model: &FittedModel, level: f64) -> (f64, f64) {
    let lo = if model.support_lower().is_finite() {
        model.support_lower()
    } else {
        model.quantile(level).unwrap()
    };
    (lo, model.isf(level).unwrap())
}

/// `(int |F_n - G|^p)^(1/p)` by a dense midpoint rule. Cells never straddle a
/// sample point, so the step function is constant on each cell.
pub fn brute_empirical(sample: &Sample, model: &FittedModel, p: f64) -> f64 {
    let x = sample.data();
    let n = x.len() as f64;
    let (qlo, qhi) = range_of(model, 1e-13);
    let lo = qlo.min(x[0]);
    let hi = qhi.max(x[x.len() - 1]);
    let width = hi - lo;
    let cells_for = |a: f64, b: f64| ((CELLS as f64 * (b - a) / width).ceil() as usize).max(MIN_CELLS);

    let mut knots = vec![lo];
    let mut levels = vec![0.0];
    let mut count = 0usize;
    let mut i = 0;
    while i < x.len() {
        let v = x[i];
        while i < x.len() && x[i] == v {
            i += 1;
            count += 1;
        }
        knots.push(v);
        levels.push(count as f64 / n);
    }
    knots.push(hi);

    let mut total = 0.0;
    for s in 0..knots.len() - 1 {
        let (a, b) = (knots[s], knots[s + 1]);
        let level = levels[s];
        total += midpoint_sum(a, b, cells_for(a, b), |t| (level - model.cdf(t)).abs().powf(p));
    }
    total.powf(1.0 / p)
}

/// `(int |F - G|^p)^(1/p)` for two analytic cdfs by a dense midpoint rule.
pub fn brute_analytic(f: &FittedModel, g: &FittedModel, p: f64) -> f64 {
    let (flo, fhi) = range_of(f, 1e-13);
    let (glo, ghi) = range_of(g, 1e-13);
    let (lo, hi) = (flo.min(glo), fhi.max(ghi));
    midpoint_sum(lo, hi, 2 * CELLS, |t| (f.cdf(t) - g.cdf(t)).abs().powf(p)).powf(1.0 / p)
}

pub fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: got {actual}, expected {expected} (tol {tol}, diff {:e})",
        (actual - expected).abs()
    );
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
