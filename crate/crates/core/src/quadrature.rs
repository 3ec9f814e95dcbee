//! Gauss-Legendre rules and composite integration split at kinks.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::function::EvaluableFunction;

pub const MAX_ORDER: usize = 64;

/// Default points per smooth segment.
pub const DEFAULT_ORDER: usize = 20;

/// A `q`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(q: usize) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&q) {
            return Err(Error::QuadratureOrder(q));
        }
        let mut nodes = vec![0.0; q];
        let mut weights = vec![0.0; q];
        // roots come in +- pairs; Newton on P_q from the Chebyshev-like guess
        for i in 0..q.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(q, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(q, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[q - 1 - i] = x;
            weights[i] = w;
            weights[q - 1 - i] = w;
        }
        if q % 2 == 1 {
            nodes[q / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Abscissae and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    /// Integral of `f` over `[a, b]` with a single application of the rule.
    /// Fails on the first non-finite integrand value.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> Result<f64> {
        let mut sum = 0.0;
        for (t, w) in self.mapped(a, b) {
            let v = f(t);
            if !v.is_finite() {
                return Err(Error::NonFinite(t));
            }
            sum += w * v;
        }
        Ok(sum)
    }

    /// Composite integral over `[a, b]` split at every point of `splits`
    /// inside `(a, b)`. `splits` need not be sorted; empty segments are skipped.
    pub fn integrate_composite(
        &self,
        a: f64,
        b: f64,
        splits: &[f64],
        mut f: impl FnMut(f64) -> f64,
    ) -> Result<f64> {
        if a > b {
            return Err(Error::ReversedInterval { a, b });
        }
        let mut total = 0.0;
        for (lo, hi) in segments(a, b, splits) {
            total += self.integrate(lo, hi, &mut f)?;
        }
        Ok(total)
    }
}

/// `P_q(x)` and `P_q'(x)` by the three-term recurrence.
fn legendre(q: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=q {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if q == 0 {
        return (1.0, 0.0);
    }
    let d = q as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Consecutive non-empty segments of `[a, b]` cut at `splits`.
pub fn segments(a: f64, b: f64, splits: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = splits.iter().copied().filter(|&c| c > a && c < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut lo = a;
    for c in cuts.into_iter().chain(std::iter::once(b)) {
        if c > lo {
            out.push((lo, c));
            lo = c;
        }
    }
    out
}

/// Integral of `g` over `[a, b]`, split at `g`'s kinks and `extra_splits`.
pub fn integrate_split(
    g: &EvaluableFunction,
    a: f64,
    b: f64,
    extra_splits: &[f64],
    rule: &GaussRule,
) -> Result<f64> {
    let mut splits = g.kinks().to_vec();
    splits.extend_from_slice(extra_splits);
    rule.integrate_composite(a, b, &splits, |t| g.eval(t))
}
