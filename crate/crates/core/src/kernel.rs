//! Green's-function-type kernels: two smooth pieces meeting continuously on
//! the diagonal, `kappa1` on `t <= s` and `kappa2` on `s <= t`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function::uniform_points;
use crate::meshspace::UniformMesh;

type ValueFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type PartialFn = Arc<dyn Fn(usize, usize, f64, f64) -> f64 + Send + Sync>;

/// Finite-difference step for first-order partials when no analytic
/// evaluator exists. Higher orders use coarser steps.
pub const FD_STEP: f64 = 1e-5;

/// One smooth piece of a kernel, optionally with analytic partials
/// `D^{(j,k)} = d^{j+k} / ds^j dt^k`.
#[derive(Clone)]
pub struct KernelPiece {
    value: ValueFn,
    partial: Option<PartialFn>,
}

impl KernelPiece {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(f),
            partial: None,
        }
    }

    /// Analytic partials; `f(j, k, s, t)` must handle every `(j, k)` asked for.
    pub fn with_partials(
        mut self,
        f: impl Fn(usize, usize, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.partial = Some(Arc::new(f));
        self
    }

    #[inline]
    pub fn value(&self, s: f64, t: f64) -> f64 {
        (self.value)(s, t)
    }

    pub fn has_partials(&self) -> bool {
        self.partial.is_some()
    }

    pub fn analytic_partial(&self, j: usize, k: usize, s: f64, t: f64) -> Option<f64> {
        if j == 0 && k == 0 {
            return Some(self.value(s, t));
        }
        self.partial.as_ref().map(|p| p(j, k, s, t))
    }

    /// `D^{(j,k)}` at `(s, t)`: analytic when available, otherwise centered
    /// differences. The piece must be evaluable slightly outside its triangle.
    pub fn partial(&self, j: usize, k: usize, s: f64, t: f64) -> f64 {
        if let Some(v) = self.analytic_partial(j, k, s, t) {
            return v;
        }
        let step = match j + k {
            1 => FD_STEP,
            2 => 1e-4,
            _ => 1e-3,
        };
        centered(&|a, b| self.value(a, b), j, k, s, t, step)
    }
}

fn centered(f: &dyn Fn(f64, f64) -> f64, j: usize, k: usize, s: f64, t: f64, h: f64) -> f64 {
    if j > 0 {
        let inner = |a: f64, b: f64| centered(f, j - 1, k, a, b, h);
        return (inner(s + h, t) - inner(s - h, t)) / (2.0 * h);
    }
    if k > 0 {
        let inner = |a: f64, b: f64| centered(f, 0, k - 1, a, b, h);
        return (inner(s, t + h) - inner(s, t - h)) / (2.0 * h);
    }
    f(s, t)
}

#[derive(Clone)]
pub struct GreensKernel {
    name: String,
    lower: KernelPiece,
    upper: KernelPiece,
    alpha: Option<u32>,
}

impl fmt::Debug for GreensKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GreensKernel")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("analytic_partials", &self.has_analytic_partials())
            .finish()
    }
}

impl GreensKernel {
    /// `lower` is `kappa1` on `0 <= t <= s <= 1`, `upper` is `kappa2` on
    /// `0 <= s <= t <= 1`. `alpha` is the declared smoothness order of each
    /// piece (`None` for infinitely smooth); it is metadata only.
    pub fn new(
        name: impl Into<String>,
        lower: KernelPiece,
        upper: KernelPiece,
        alpha: Option<u32>,
    ) -> Self {
        Self {
            name: name.into(),
            lower,
            upper,
            alpha,
        }
    }

    /// Green's function of `-u'' = g`, `u(0) = u(1) = 0`.
    pub fn bvp_green() -> Self {
        let lower = KernelPiece::new(|s, t| t * (1.0 - s)).with_partials(|j, k, s, t| match (j, k) {
            (0, 0) => t * (1.0 - s),
            (1, 0) => -t,
            (0, 1) => 1.0 - s,
            (1, 1) => -1.0,
            _ => 0.0,
        });
        let upper = KernelPiece::new(|s, t| s * (1.0 - t)).with_partials(|j, k, s, t| match (j, k) {
            (0, 0) => s * (1.0 - t),
            (1, 0) => 1.0 - t,
            (0, 1) => -s,
            (1, 1) => -1.0,
            _ => 0.0,
        });
        Self::new("bvp_green", lower, upper, None)
    }

    /// The smooth rank-one kernel `kappa(s, t) = s`.
    pub fn rank_one() -> Self {
        let piece = || {
            KernelPiece::new(|s, _| s).with_partials(|j, k, s, _| match (j, k) {
                (0, 0) => s,
                (1, 0) => 1.0,
                _ => 0.0,
            })
        };
        Self::new("rank_one", piece(), piece(), None)
    }

    /// `exp(-|s - t|)`.
    pub fn abs_exp() -> Self {
        let lower = KernelPiece::new(|s, t| (t - s).exp())
            .with_partials(|j, _, s, t| if j % 2 == 0 { 1.0 } else { -1.0 } * (t - s).exp());
        let upper = KernelPiece::new(|s, t| (s - t).exp())
            .with_partials(|_, k, s, t| if k % 2 == 0 { 1.0 } else { -1.0 } * (s - t).exp());
        Self::new("abs_exp", lower, upper, None)
    }

    pub fn constant(c: f64) -> Self {
        let piece = move || {
            KernelPiece::new(move |_, _| c).with_partials(move |j, k, _, _| if j + k == 0 { c } else { 0.0 })
        };
        Self::new(format!("constant {c}"), piece(), piece(), None)
    }

    /// The zero kernel: collocation becomes interpolation of `f`, the other methods return `f`.
    pub fn zero() -> Self {
        Self::constant(0.0).renamed("zero")
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alpha(&self) -> Option<u32> {
        self.alpha
    }

    pub fn lower(&self) -> &KernelPiece {
        &self.lower
    }

    pub fn upper(&self) -> &KernelPiece {
        &self.upper
    }

    /// Whether both pieces provide analytic partial evaluators.
    pub fn has_analytic_partials(&self) -> bool {
        self.lower.has_partials() && self.upper.has_partials()
    }

    /// Piece responsible for `(s, t)`.
    #[inline]
    pub fn piece(&self, s: f64, t: f64) -> &KernelPiece {
        if t <= s {
            &self.lower
        } else {
            &self.upper
        }
    }

    #[inline]
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        self.piece(s, t).value(s, t)
    }

    /// Largest `|kappa1(s, s) - kappa2(s, s)|` over 101 diagonal points.
    pub fn diagonal_gap(&self) -> f64 {
        uniform_points(101)
            .into_iter()
            .map(|s| (self.lower.value(s, s) - self.upper.value(s, s)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|kappa_i|` sampled on each closed triangle; infinite if any
    /// sample is not finite.
    pub fn sampled_max(&self, density: usize) -> f64 {
        let pts = uniform_points(density.max(2));
        let mut max = 0.0_f64;
        for (a, &s) in pts.iter().enumerate() {
            for (b, &t) in pts.iter().enumerate() {
                let v = if b <= a { self.lower.value(s, t) } else { self.upper.value(s, t) };
                if !v.is_finite() {
                    return f64::INFINITY;
                }
                max = max.max(v.abs());
            }
        }
        max
    }
}

/// Sampled kernel derivative bounds. Sampling bounds the true suprema from
/// below.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessBounds {
    /// `max_{j,k <= 2} sup |D^{(j,k)} kappa_i|` over each piece's triangle.
    pub c1: f64,
    /// Per-cell maximum of `|D^{(1,0)} kappa_i|` near the diagonal.
    pub m1: f64,
    /// Per-cell maximum of `|D^{(2,0)} kappa_i|` near the diagonal.
    pub m2: f64,
}

/// Samples `C1`, `M1`, `M2` on `density x density` grids per triangle.
pub fn sample_bounds(kernel: &GreensKernel, mesh: &UniformMesh, density: usize) -> SmoothnessBounds {
    let unit = uniform_points(density.max(2));
    let mut c1 = 0.0_f64;
    for (a, &s) in unit.iter().enumerate() {
        for (b, &t) in unit.iter().enumerate() {
            for j in 0..=2 {
                for k in 0..=2 {
                    if b <= a {
                        c1 = c1.max(kernel.lower.partial(j, k, s, t).abs());
                    }
                    if a <= b {
                        c1 = c1.max(kernel.upper.partial(j, k, s, t).abs());
                    }
                }
            }
        }
    }
    let (mut m1, mut m2) = (0.0_f64, 0.0_f64);
    let h = mesh.h();
    for cell in 0..mesh.n() {
        let base = mesh.breakpoint(cell);
        for (a, u) in unit.iter().enumerate() {
            for (b, v) in unit.iter().enumerate() {
                let (s, t) = (base + h * u, base + h * v);
                if b <= a {
                    m1 = m1.max(kernel.lower.partial(1, 0, s, t).abs());
                    m2 = m2.max(kernel.lower.partial(2, 0, s, t).abs());
                }
                if a <= b {
                    m1 = m1.max(kernel.upper.partial(1, 0, s, t).abs());
                    m2 = m2.max(kernel.upper.partial(2, 0, s, t).abs());
                }
            }
        }
    }
    SmoothnessBounds { c1, m1, m2 }
}

/// Catalog of built-in kernels.
pub fn builtin_kernels() -> Vec<GreensKernel> {
    vec![
        GreensKernel::bvp_green(),
        GreensKernel::rank_one(),
        GreensKernel::abs_exp(),
        GreensKernel::zero(),
        // K 1 = 1, so x - Kx = f is singular
        GreensKernel::constant(1.0).renamed("unit"),
    ]
}

pub fn kernel_by_name(name: &str) -> Result<GreensKernel> {
    builtin_kernels()
        .into_iter()
        .find(|k| k.name() == name)
        .ok_or_else(|| Error::UnknownKernel(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn catalog_values() {
        let g = kernel_by_name("bvp_green").unwrap();
        assert_abs_diff_eq!(g.eval(0.75, 0.25), 0.0625);
        for s in uniform_points(11) {
            assert_abs_diff_eq!(g.lower().value(s, s), s * (1.0 - s), epsilon = 1e-16);
            assert_abs_diff_eq!(g.upper().value(s, s), s * (1.0 - s), epsilon = 1e-16);
        }
        assert_eq!(kernel_by_name("abs_exp").unwrap().eval(0.5, 0.5), 1.0);
        assert!(matches!(kernel_by_name("nope"), Err(Error::UnknownKernel(_))));
    }

    #[test]
    fn builtins_are_diagonal_continuous_and_bounded() {
        for k in builtin_kernels() {
            assert!(k.diagonal_gap() <= 1e-12, "{}", k.name());
            assert!(k.sampled_max(21).is_finite());
            assert!(k.has_analytic_partials());
        }
    }

    #[test]
    fn bvp_green_bounds_reach_one() {
        let mesh = UniformMesh::new(8).unwrap();
        let b = sample_bounds(&GreensKernel::bvp_green(), &mesh, 11);
        assert!(b.c1 >= 1.0);
        assert!(b.m1 >= 0.0 && b.m2 == 0.0);
    }

    #[test]
    fn constant_and_rank_one_bounds() {
        let mesh = UniformMesh::new(4).unwrap();
        let b = sample_bounds(&GreensKernel::constant(2.5), &mesh, 7);
        assert_eq!((b.m1, b.m2), (0.0, 0.0));
        assert_eq!(b.c1, 2.5);
        let b = sample_bounds(&GreensKernel::rank_one(), &mesh, 7);
        assert_eq!((b.m1, b.m2), (1.0, 0.0));
    }

    #[test]
    fn finite_differences_match_analytic_partials() {
        let exact = GreensKernel::abs_exp();
        let fd = GreensKernel::new(
            "abs_exp_fd",
            KernelPiece::new(|s, t| (t - s).exp()),
            KernelPiece::new(|s, t| (s - t).exp()),
            None,
        );
        assert!(!fd.has_analytic_partials());
        for (j, k) in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
            let a = exact.lower().partial(j, k, 0.7, 0.3);
            let b = fd.lower().partial(j, k, 0.7, 0.3);
            assert_abs_diff_eq!(a, b, epsilon = 1e-5);
        }
        let mesh = UniformMesh::new(4).unwrap();
        let (be, bf) = (sample_bounds(&exact, &mesh, 6), sample_bounds(&fd, &mesh, 6));
        assert_abs_diff_eq!(be.c1, bf.c1, epsilon = 1e-3);
        assert_abs_diff_eq!(be.m1, bf.m1, epsilon = 1e-6);
    }
}
