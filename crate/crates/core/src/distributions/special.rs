//! Standard normal helpers and a safeguarded monotone root finder.

use libm::erfc;
use statrs::function::erf::erfc_inv;
use std::f64::consts::{PI, SQRT_2};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[inline]
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

#[inline]
pub fn std_normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

#[inline]
pub fn std_normal_ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// Lower quantile of the standard normal; `u` must lie in (0, 1).
pub fn std_normal_quantile(u: f64) -> f64 {
    debug_assert!(u > 0.0 && u < 1.0);
    let mut z = -SQRT_2 * erfc_inv(2.0 * u);
    // One Newton polish against whichever tail keeps the residual well conditioned.
    let pdf = std_normal_pdf(z);
    if pdf > 0.0 {
        let resid = if u < 0.5 {
            std_normal_cdf(z) - u
        } else {
            (1.0 - u) - std_normal_sf(z)
        };
        z -= resid / pdf;
    }
    z
}

/// Finds `x` in `[lo, hi]` with `f(x) = target` for nondecreasing `f`, given
/// `f(lo) <= target <= f(hi)`. Illinois false position with a bisection
/// fallback; stops when the residual is below `ftol` or the bracket collapses.
pub fn solve_increasing<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64, ftol: f64) -> f64 {
    let mut flo = f(lo) - target;
    let mut fhi = f(hi) - target;
    if flo >= 0.0 {
        return lo;
    }
    if fhi <= 0.0 {
        return hi;
    }
    let mut side = 0i8;
    for iter in 0..400 {
        let width = hi - lo;
        if width <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) || width == 0.0 {
            break;
        }
        let mut x = if iter % 8 == 7 {
            0.5 * (lo + hi)
        } else {
            (lo * fhi - hi * flo) / (fhi - flo)
        };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x) - target;
        if fx.abs() <= ftol {
            return x;
        }
        if fx < 0.0 {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    if flo.abs() <= fhi.abs() {
        lo
    } else {
        hi
    }
}
