//! Adaptive Gauss–Legendre quadrature with interval bisection.
//!
//! The error of a piece is estimated by comparing the fixed-order rule on the
//! whole piece with the sum over its two halves.

use crate::error::{AgofError, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::LazyLock;

/// Number of Gauss–Legendre nodes per panel.
const ORDER: usize = 8;

static RULE: LazyLock<([f64; ORDER], [f64; ORDER])> = LazyLock::new(legendre_rule::<ORDER>);

/// Nodes and weights of the `N`-point Gauss–Legendre rule on [-1, 1].
fn legendre_rule<const N: usize>() -> ([f64; N], [f64; N]) {
    let mut nodes = [0.0; N];
    let mut weights = [0.0; N];
    let n = N as f64;
    for i in 0..N {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Three-term recurrence for P_N(x) and its derivative.
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=N {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let p = if N == 1 { x } else { p1 };
            let pm1 = if N == 1 { 1.0 } else { p0 };
            dp = n * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[inline]
fn rule<F: FnMut(usize, f64) -> f64>(f: &mut F, panel: usize, a: f64, b: f64) -> f64 {
    let (nodes, weights) = &*RULE;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(panel, mid + half * x);
    }
    acc * half
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Total number of bisections allowed across all panels.
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-9,
            abs_tol: 0.0,
            max_subdivisions: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// Sum of the pieces' error estimates.
    pub error: f64,
    pub subdivisions: usize,
    pub converged: bool,
}

/// Integrates `f` over `[a, b]`.
pub fn gauss_legendre_adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    let res = integrate_panels(|_, x| f(x), &[(a, b)], opts);
    if res.converged {
        Ok(res)
    } else {
        Err(AgofError::Precision { achieved: res.error, value: res.value })
    }
}

/// Integrates `f` over the union of `panels` (assumed non-overlapping).
/// The integrand receives the index of the panel being evaluated, so callers
/// can switch between piecewise definitions without searching.
///
/// Globally adaptive: the piece with the largest error estimate is bisected
/// until the summed estimate drops below `max(rel_tol * sum|I_piece|, abs_tol)`.
/// Pieces are summed in (panel, position) order at the end.
pub fn integrate_panels<F: FnMut(usize, f64) -> f64>(mut f: F, panels: &[(f64, f64)], opts: &QuadOptions) -> QuadResult {
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Piece> = Vec::new();
    let mut seq = 0u64;
    let push = |piece: Piece, heap: &mut BinaryHeap<Piece>, done: &mut Vec<Piece>| {
        if piece.err > 0.0 && piece.splittable() {
            heap.push(piece);
        } else {
            done.push(piece);
        }
    };
    for (idx, &(a, b)) in panels.iter().enumerate() {
        if b > a {
            let whole = rule(&mut f, idx, a, b);
            let piece = Piece::new(&mut f, idx, a, b, whole, seq);
            seq += 1;
            push(piece, &mut heap, &mut done);
        }
    }

    let totals = |heap: &BinaryHeap<Piece>, done: &[Piece]| {
        heap.iter().chain(done).fold((0.0, 0.0), |(e, m), p| (e + p.err, m + p.value.abs()))
    };
    let (mut error, mut magnitude) = totals(&heap, &done);
    let mut subdivisions = 0;
    let mut since_resum = 0;
    while error > (opts.rel_tol * magnitude).max(opts.abs_tol) && subdivisions < opts.max_subdivisions {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = Piece::new(&mut f, worst.panel, worst.lo, mid, worst.left, seq);
        let right = Piece::new(&mut f, worst.panel, mid, worst.hi, worst.right, seq + 1);
        seq += 2;
        subdivisions += 1;
        error += left.err + right.err - worst.err;
        magnitude += left.value.abs() + right.value.abs() - worst.value.abs();
        push(left, &mut heap, &mut done);
        push(right, &mut heap, &mut done);
        since_resum += 1;
        if since_resum == 256 {
            // Running sums drift once large errors have been replaced by tiny ones.
            (error, magnitude) = totals(&heap, &done);
            since_resum = 0;
        }
    }

    done.extend(heap);
    done.sort_by(|a, b| (a.panel, a.lo).partial_cmp(&(b.panel, b.lo)).expect("finite bounds"));
    let value = done.iter().map(|p| p.value).sum();
    let (error, magnitude) = done.iter().fold((0.0, 0.0), |(e, m), p| (e + p.err, m + f64::abs(p.value)));
    QuadResult {
        value,
        error,
        subdivisions,
        converged: error <= (opts.rel_tol * magnitude).max(opts.abs_tol),
    }
}

/// An interval with its rule value on each half.
struct Piece {
    panel: usize,
    lo: f64,
    hi: f64,
    left: f64,
    right: f64,
    value: f64,
    err: f64,
    seq: u64,
}

impl Piece {
    fn new<F: FnMut(usize, f64) -> f64>(f: &mut F, panel: usize, lo: f64, hi: f64, whole: f64, seq: u64) -> Self {
        let mid = 0.5 * (lo + hi);
        let left = rule(f, panel, lo, mid);
        let right = rule(f, panel, mid, hi);
        let value = left + right;
        Piece {
            panel,
            lo,
            hi,
            left,
            right,
            value,
            err: (value - whole).abs(),
            seq,
        }
    }

    fn splittable(&self) -> bool {
        let mid = 0.5 * (self.lo + self.hi);
        mid > self.lo && mid < self.hi && (self.hi - self.lo) > 8.0 * f64::EPSILON * mid.abs()
    }
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    // Largest error first; earlier pieces win ties.
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then(other.seq.cmp(&self.seq))
    }
}
