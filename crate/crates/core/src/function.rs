//! Pointwise-evaluable functions on `[0, 1]` with declared kink sets.
//!
//! A function carries its left-limit evaluator and, when it may jump at
//! breakpoints, a separate right-limit evaluator. Kinks are the points
//! where smoothness may fail; quadrature splits there.

use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;
use rayon::prelude::*;

use crate::meshspace::CollocationGrid;

type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Uniform sample points per mesh cell used by [`sup_norm`].
pub const SAMPLES_PER_CELL: usize = 50;

#[derive(Clone)]
pub struct EvaluableFunction {
    tag: Arc<str>,
    kinks: Arc<[f64]>,
    left: Eval,
    right: Option<Eval>,
}

impl fmt::Debug for EvaluableFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvaluableFunction")
            .field("tag", &self.tag)
            .field("kinks", &self.kinks.len())
            .field("one_sided", &self.right.is_some())
            .finish()
    }
}

impl EvaluableFunction {
    pub fn new(
        tag: impl Into<String>,
        kinks: Vec<f64>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            tag: Arc::from(tag.into()),
            kinks: Arc::from(normalize(kinks)),
            left: Arc::new(f),
            right: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const {c}"), vec![], move |_| c)
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Attaches a right-limit evaluator for functions that jump at kinks.
    pub fn with_right_limit(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.right = Some(Arc::new(f));
        self
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = Arc::from(tag.into());
        self
    }

    /// Adds points to the kink set.
    pub fn with_kinks(mut self, extra: &[f64]) -> Self {
        let mut all = self.kinks.to_vec();
        all.extend_from_slice(extra);
        self.kinks = Arc::from(normalize(all));
        self
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn kinks(&self) -> &[f64] {
        &self.kinks
    }

    pub fn is_one_sided(&self) -> bool {
        self.right.is_some()
    }

    /// Value at `s`; at a jump this is the left limit.
    pub fn eval(&self, s: f64) -> f64 {
        (self.left)(s)
    }

    /// Right limit at `s`; equals [`eval`](Self::eval) for functions without jumps.
    pub fn eval_right(&self, s: f64) -> f64 {
        match &self.right {
            Some(r) => r(s),
            None => (self.left)(s),
        }
    }

    /// `sum_i c_i f_i`, with the union of all kink sets.
    pub fn linear_combination(terms: &[(f64, &EvaluableFunction)]) -> Self {
        let coeffs: Vec<f64> = terms.iter().map(|(c, _)| *c).collect();
        let funcs: Vec<EvaluableFunction> = terms.iter().map(|(_, f)| (*f).clone()).collect();
        let kinks = funcs.iter().flat_map(|f| f.kinks.iter().copied()).collect();
        let tag = terms
            .iter()
            .map(|(c, f)| format!("{c}*({})", f.tag))
            .collect::<Vec<_>>()
            .join(" + ");
        let one_sided = funcs.iter().any(|f| f.right.is_some());
        let (c_l, f_l) = (coeffs.clone(), funcs.clone());
        let out = Self::new(tag, kinks, move |s| {
            c_l.iter().zip(&f_l).map(|(c, f)| c * f.eval(s)).sum()
        });
        if one_sided {
            out.with_right_limit(move |s| coeffs.iter().zip(&funcs).map(|(c, f)| c * f.eval_right(s)).sum())
        } else {
            out
        }
    }

    pub fn add(&self, other: &EvaluableFunction) -> Self {
        Self::linear_combination(&[(1.0, self), (1.0, other)])
    }

    pub fn sub(&self, other: &EvaluableFunction) -> Self {
        Self::linear_combination(&[(1.0, self), (-1.0, other)])
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::linear_combination(&[(c, self)])
    }

    /// Same function, with evaluations cached by abscissa. Clones share the
    /// cache; concurrent readers are safe.
    pub fn memoized(&self) -> Self {
        let left_cache: Arc<DashMap<u64, f64>> = Arc::new(DashMap::new());
        let inner = self.left.clone();
        let left: Eval = Arc::new(move |s: f64| {
            if let Some(v) = left_cache.get(&s.to_bits()) {
                return *v;
            }
            let v = inner(s);
            left_cache.insert(s.to_bits(), v);
            v
        });
        let right = self.right.clone().map(|inner| {
            let cache: Arc<DashMap<u64, f64>> = Arc::new(DashMap::new());
            Arc::new(move |s: f64| {
                if let Some(v) = cache.get(&s.to_bits()) {
                    return *v;
                }
                let v = inner(s);
                cache.insert(s.to_bits(), v);
                v
            }) as Eval
        });
        Self {
            tag: self.tag.clone(),
            kinks: self.kinks.clone(),
            left,
            right,
        }
    }
}

fn normalize(mut kinks: Vec<f64>) -> Vec<f64> {
    kinks.retain(|k| k.is_finite());
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    kinks
}

/// Points at which sup-norms are sampled: 50 uniform points per cell, all
/// breakpoints, all collocation nodes and the given kinks.
pub fn sample_points(grid: &CollocationGrid, kinks: &[f64]) -> Vec<f64> {
    let mesh = grid.mesh();
    let mut pts: Vec<f64> = (0..mesh.n())
        .flat_map(|j| {
            (0..SAMPLES_PER_CELL)
                .map(move |i| mesh.breakpoint(j) + mesh.h() * i as f64 / SAMPLES_PER_CELL as f64)
        })
        .chain(mesh.breakpoints())
        .chain(grid.nodes())
        .chain(kinks.iter().copied().filter(|k| (0.0..=1.0).contains(k)))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Sampled estimate of `sup |g|` on `[0, 1]`, including right limits at
/// interior breakpoints. NaN if any sample is NaN.
pub fn sup_norm(g: &EvaluableFunction, grid: &CollocationGrid) -> f64 {
    let pts = sample_points(grid, g.kinks());
    let interior = grid.mesh().interior_breakpoints();
    let mut samples: Vec<(f64, bool)> = pts.into_iter().map(|t| (t, false)).collect();
    if g.is_one_sided() {
        samples.extend(interior.iter().chain(g.kinks()).map(|&t| (t, true)));
    }
    samples
        .par_iter()
        .map(|&(t, right)| if right { g.eval_right(t) } else { g.eval(t) }.abs())
        .reduce(|| 0.0, nan_max)
}

/// Maximum of `|g|` over the given points.
pub fn max_abs_at(g: &EvaluableFunction, points: &[f64]) -> f64 {
    points
        .par_iter()
        .map(|&t| g.eval(t).abs())
        .reduce(|| 0.0, nan_max)
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// `count` uniformly spaced points `i / (count - 1)`.
pub fn uniform_points(count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![0.5],
        _ => (0..count).map(|i| i as f64 / (count - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn combinations_evaluate_pointwise() {
        let a = EvaluableFunction::new("t", vec![0.5], |t| t);
        let b = EvaluableFunction::new("t^2", vec![0.25, 0.5], |t| t * t);
        let c = EvaluableFunction::linear_combination(&[(2.0, &a), (-3.0, &b)]);
        assert!((c.eval(0.4) - (2.0 * 0.4 - 3.0 * 0.16)).abs() <= 1e-15);
        assert_eq!(c.kinks(), &[0.25, 0.5]);
        assert_eq!(a.sub(&a).eval(0.7), 0.0);
        assert_eq!(a.scale(4.0).eval(0.5), 2.0);
    }

    #[test]
    fn right_limits_propagate_through_combinations() {
        let step = EvaluableFunction::new("step", vec![0.5], |t| if t <= 0.5 { 0.0 } else { 1.0 })
            .with_right_limit(|t| if t < 0.5 { 0.0 } else { 1.0 });
        let smooth = EvaluableFunction::new("t", vec![], |t| t);
        let sum = step.add(&smooth);
        assert!(sum.is_one_sided());
        assert_eq!(sum.eval(0.5), 0.5);
        assert_eq!(sum.eval_right(0.5), 1.5);
        assert!(!smooth.is_one_sided());
    }

    #[test]
    fn memoization_is_invisible_and_caches() {
        let calls = Arc::new(AtomicUsize::new(0));
        let counter = calls.clone();
        let f = EvaluableFunction::new("counted", vec![], move |t| {
            counter.fetch_add(1, Ordering::SeqCst);
            (3.0 * t).cos()
        });
        let m = f.memoized();
        for _ in 0..3 {
            assert_eq!(m.eval(0.3), f.eval(0.3));
        }
        // one call from the memo, three from the unwrapped f
        assert_eq!(calls.load(Ordering::SeqCst), 4);
    }

    #[test]
    fn sup_norm_sees_peaks_and_jumps() {
        let grid = CollocationGrid::uniform(4, 1).unwrap();
        let bump = EvaluableFunction::new("bump", vec![], |t| (std::f64::consts::PI * t).sin());
        assert!((sup_norm(&bump, &grid) - 1.0).abs() < 1e-15);
        let jump = EvaluableFunction::new("jump", vec![0.5], |t| if t <= 0.5 { 0.0 } else { -2.0 })
            .with_right_limit(|t| if t < 0.5 { 0.0 } else { -2.0 });
        assert_eq!(sup_norm(&jump, &grid), 2.0);
        let nan = EvaluableFunction::new("nan", vec![], |t| if t > 0.9 { f64::NAN } else { 0.0 });
        assert!(sup_norm(&nan, &grid).is_nan());
    }

    #[test]
    fn sample_points_cover_cells_and_nodes() {
        let grid = CollocationGrid::uniform(2, 2).unwrap();
        let pts = sample_points(&grid, &[0.3]);
        assert_eq!(pts[0], 0.0);
        assert_eq!(*pts.last().unwrap(), 1.0);
        for node in grid.nodes() {
            assert!(pts.contains(&node));
        }
        assert!(pts.contains(&0.3));
        assert!(pts.len() > 2 * SAMPLES_PER_CELL);
    }
}
