//! Uniform partitions of `[0, 1]`, collocation node layouts and piecewise
//! polynomials of degree `<= 2r` in local Lagrange form.
//!
//! Subinterval indices are 0-based throughout: cell `j` is
//! `[t_j, t_{j+1}]`, and node `(j, k)` sits at `t_j + h * offsets[k]`.
//! Global node ordering is lexicographic in `(j, k)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function::EvaluableFunction;

/// Distance below which a point is treated as sitting on a breakpoint.
const BREAKPOINT_SNAP: f64 = 1e-14;

/// The partition `0 = t_0 < t_1 < ... < t_n = 1` with `t_j = j / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformMesh {
    n: usize,
    h: f64,
}

impl UniformMesh {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMesh);
        }
        Ok(Self {
            n,
            h: 1.0 / n as f64,
        })
    }

    /// Number of subintervals.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Mesh width `1 / n`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn breakpoint(&self, j: usize) -> f64 {
        debug_assert!(j <= self.n);
        j as f64 / self.n as f64
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        (0..=self.n).map(|j| self.breakpoint(j)).collect()
    }

    /// Interior breakpoints `t_1..t_{n-1}`.
    pub fn interior_breakpoints(&self) -> Vec<f64> {
        (1..self.n).map(|j| self.breakpoint(j)).collect()
    }

    /// Cell containing `t`. Interior breakpoints belong to the cell on
    /// their left, so evaluation of discontinuous elements uses left limits.
    pub fn locate(&self, t: f64) -> usize {
        let scaled = t * self.n as f64;
        let nearest = scaled.round();
        if (scaled - nearest).abs() <= BREAKPOINT_SNAP * self.n as f64 {
            let k = nearest as isize;
            return (k - 1).clamp(0, self.n as isize - 1) as usize;
        }
        (scaled.floor() as isize).clamp(0, self.n as isize - 1) as usize
    }

    /// Like [`locate`](Self::locate) but interior breakpoints belong to the
    /// cell on their right (right limits).
    pub fn locate_right(&self, t: f64) -> usize {
        let scaled = t * self.n as f64;
        let nearest = scaled.round();
        if (scaled - nearest).abs() <= BREAKPOINT_SNAP * self.n as f64 {
            return (nearest as isize).clamp(0, self.n as isize - 1) as usize;
        }
        (scaled.floor() as isize).clamp(0, self.n as isize - 1) as usize
    }
}

/// `2r + 1` interpolation nodes in each cell of a uniform mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationGrid {
    mesh: UniformMesh,
    r: usize,
    offsets: Vec<f64>,
    // Lagrange denominators prod_{m != k} (offsets[k] - offsets[m]).
    denominators: Vec<f64>,
}

impl CollocationGrid {
    /// Builds the grid. Without explicit offsets the nodes are equidistant,
    /// `k / (2r)` for `r >= 1`, and the left endpoint for `r = 0`.
    pub fn new(mesh: UniformMesh, r: usize, offsets: Option<Vec<f64>>) -> Result<Self> {
        let count = 2 * r + 1;
        let offsets = match offsets {
            Some(o) => o,
            None if r == 0 => vec![0.0],
            None => (0..count).map(|k| k as f64 / (2 * r) as f64).collect(),
        };
        if offsets.len() != count {
            return Err(Error::OffsetCount {
                expected: count,
                got: offsets.len(),
            });
        }
        let in_range = offsets
            .iter()
            .all(|z| z.is_finite() && (0.0..=1.0).contains(z));
        let increasing = offsets.windows(2).all(|w| w[0] < w[1]);
        if !in_range || !increasing {
            return Err(Error::InvalidOffsets(offsets));
        }
        let denominators = (0..count)
            .map(|k| {
                (0..count)
                    .filter(|&m| m != k)
                    .map(|m| offsets[k] - offsets[m])
                    .product()
            })
            .collect();
        Ok(Self {
            mesh,
            r,
            offsets,
            denominators,
        })
    }

    /// Equidistant default nodes on a fresh mesh with `n` cells.
    pub fn uniform(n: usize, r: usize) -> Result<Self> {
        Self::new(UniformMesh::new(n)?, r, None)
    }

    pub fn mesh(&self) -> &UniformMesh {
        &self.mesh
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Nodes per cell, `2r + 1`.
    pub fn local_dim(&self) -> usize {
        self.offsets.len()
    }

    /// Dimension `n (2r + 1)` of the piecewise polynomial space.
    pub fn dim(&self) -> usize {
        self.mesh.n() * self.local_dim()
    }

    pub fn node(&self, j: usize, k: usize) -> f64 {
        // exact at both cell ends
        (j as f64 + self.offsets[k]) / self.mesh.n() as f64
    }

    /// All nodes in lexicographic `(j, k)` order.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.mesh.n())
            .flat_map(|j| (0..self.local_dim()).map(move |k| (j, k)))
            .map(|(j, k)| self.node(j, k))
            .collect()
    }

    /// Nodes of one cell.
    pub fn cell_nodes(&self, j: usize) -> Vec<f64> {
        (0..self.local_dim()).map(|k| self.node(j, k)).collect()
    }

    /// Sorted node positions with shared cell endpoints merged.
    pub fn distinct_nodes(&self) -> Vec<f64> {
        let mut nodes = self.nodes();
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|a, b| (*a - *b).abs() <= BREAKPOINT_SNAP);
        nodes
    }

    /// Local Lagrange basis function `k` at local coordinate `xi`.
    pub fn basis(&self, k: usize, xi: f64) -> f64 {
        let num: f64 = self
            .offsets
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != k)
            .map(|(_, z)| xi - z)
            .product();
        num / self.denominators[k]
    }

    /// Fills `out` with every local basis function at `xi`.
    pub fn basis_all(&self, xi: f64, out: &mut [f64]) {
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.basis(k, xi);
        }
    }

    /// Cell containing `t` (left-limit convention) and the local coordinate.
    pub fn local(&self, t: f64) -> (usize, f64) {
        let j = self.mesh.locate(t);
        (j, (t - self.mesh.breakpoint(j)) * self.mesh.n() as f64)
    }

    fn local_right(&self, t: f64) -> (usize, f64) {
        let j = self.mesh.locate_right(t);
        (j, (t - self.mesh.breakpoint(j)) * self.mesh.n() as f64)
    }

    /// Whether node `k` sits on the left end of its cell. Such nodes read
    /// discontinuous functions through their right limit.
    pub fn is_left_end(&self, k: usize) -> bool {
        self.offsets[k] == 0.0
    }

    /// Value of `x` at node `(j, k)`, taken from inside cell `j`.
    pub fn sample(&self, x: &EvaluableFunction, j: usize, k: usize) -> f64 {
        let t = self.node(j, k);
        if self.is_left_end(k) {
            x.eval_right(t)
        } else {
            x.eval(t)
        }
    }
}

/// An element of the piecewise polynomial space, stored by its values at
/// the collocation nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    grid: Arc<CollocationGrid>,
    values: Vec<f64>,
}

impl PiecewisePolynomial {
    pub fn new(grid: Arc<CollocationGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.dim() {
            return Err(Error::DimensionMismatch);
        }
        Ok(Self { grid, values })
    }

    /// Interpolant of `f` at the nodes.
    pub fn interpolate(grid: Arc<CollocationGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<CollocationGrid> {
        &self.grid
    }

    /// Nodal values in lexicographic order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.grid.local_dim() + k]
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfDomain(t));
        }
        Ok(self.eval_unchecked(t))
    }

    /// Evaluation without the domain check; points outside `[0, 1]` use the
    /// polynomial of the nearest end cell.
    pub fn eval_unchecked(&self, t: f64) -> f64 {
        let (j, xi) = self.grid.local(t);
        self.eval_in_cell(j, xi)
    }

    /// Right limit at `t`; differs from [`eval`](Self::eval) only at
    /// interior breakpoints.
    pub fn eval_right(&self, t: f64) -> f64 {
        let (j, xi) = self.grid.local_right(t);
        self.eval_in_cell(j, xi)
    }

    fn eval_in_cell(&self, j: usize, xi: f64) -> f64 {
        let p = self.grid.local_dim();
        let coeffs = &self.values[j * p..(j + 1) * p];
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * self.grid.basis(k, xi))
            .sum()
    }

    /// Wraps the polynomial as a function whose kinks are the mesh breakpoints.
    pub fn to_function(&self) -> EvaluableFunction {
        let left = Arc::new(self.clone());
        let right = left.clone();
        EvaluableFunction::new(
            "piecewise polynomial",
            self.grid.mesh().interior_breakpoints(),
            move |t| left.eval_unchecked(t),
        )
        .with_right_limit(move |t| right.eval_right(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mesh_breakpoints() {
        let m = UniformMesh::new(4).unwrap();
        assert_eq!(m.breakpoints(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let m = UniformMesh::new(1).unwrap();
        assert_eq!(m.breakpoints(), vec![0.0, 1.0]);
        assert_eq!(m.h(), 1.0);
        let m = UniformMesh::new(3).unwrap();
        assert_abs_diff_eq!(m.h(), 1.0 / 3.0);
        assert_abs_diff_eq!(m.breakpoint(2), 2.0 / 3.0);
        assert_eq!(UniformMesh::new(0), Err(Error::EmptyMesh));
    }

    #[test]
    fn locate_uses_left_cell_at_breakpoints() {
        let m = UniformMesh::new(10).unwrap();
        assert_eq!(m.locate(0.0), 0);
        assert_eq!(m.locate(0.3), 2);
        assert_eq!(m.locate(0.30001), 3);
        assert_eq!(m.locate(1.0), 9);
        assert_eq!(m.locate(0.05), 0);
    }

    #[test]
    fn default_nodes() {
        let g = CollocationGrid::uniform(2, 1).unwrap();
        assert_eq!(g.cell_nodes(0), vec![0.0, 0.25, 0.5]);
        let g = CollocationGrid::uniform(1, 2).unwrap();
        assert_eq!(g.nodes(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = CollocationGrid::uniform(3, 0).unwrap();
        assert_eq!(g.offsets(), &[0.0]);
        assert_eq!(g.dim(), 3);
    }

    #[test]
    fn one_third_offset_nodes() {
        let g = CollocationGrid::new(UniformMesh::new(2).unwrap(), 0, Some(vec![1.0 / 3.0])).unwrap();
        let nodes = g.nodes();
        assert_abs_diff_eq!(nodes[0], 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(nodes[1], 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_offsets() {
        let mesh = UniformMesh::new(2).unwrap();
        assert!(matches!(
            CollocationGrid::new(mesh.clone(), 1, Some(vec![0.0, 1.0])),
            Err(Error::OffsetCount { expected: 3, got: 2 })
        ));
        assert!(matches!(
            CollocationGrid::new(mesh.clone(), 1, Some(vec![0.0, 0.5, 0.5])),
            Err(Error::InvalidOffsets(_))
        ));
        assert!(matches!(
            CollocationGrid::new(mesh, 0, Some(vec![1.5])),
            Err(Error::InvalidOffsets(_))
        ));
    }

    #[test]
    fn nodes_stay_in_their_cells() {
        for r in 0..=3 {
            let g = CollocationGrid::uniform(7, r).unwrap();
            for j in 0..7 {
                for t in g.cell_nodes(j) {
                    assert!(g.mesh().breakpoint(j) <= t && t <= g.mesh().breakpoint(j + 1));
                }
            }
        }
    }

    #[test]
    fn lagrange_cardinality() {
        for r in 0..=3 {
            let g = CollocationGrid::uniform(1, r).unwrap();
            for k in 0..g.local_dim() {
                for (m, &z) in g.offsets().iter().enumerate() {
                    let expected = if m == k { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(g.basis(k, z), expected, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn reproduces_linear_and_constants() {
        let g = Arc::new(CollocationGrid::uniform(4, 1).unwrap());
        let p = PiecewisePolynomial::interpolate(g.clone(), |t| t);
        assert_abs_diff_eq!(p.eval(0.3).unwrap(), 0.3, epsilon = 1e-15);
        let ones = PiecewisePolynomial::interpolate(g, |_| 1.0);
        for i in 0..=20 {
            assert_abs_diff_eq!(ones.eval(i as f64 / 20.0).unwrap(), 1.0, epsilon = 1e-14);
        }
        assert_eq!(ones.eval(1.5), Err(Error::OutOfDomain(1.5)));
    }

    #[test]
    fn cubic_matches_three_point_lagrange() {
        let g = Arc::new(CollocationGrid::uniform(2, 1).unwrap());
        let p = PiecewisePolynomial::interpolate(g, |t| t * t * t);
        // explicit Lagrange form through 0, 0.25, 0.5
        let (x0, x1, x2) = (0.0_f64, 0.25_f64, 0.5_f64);
        let f = |x: f64| x * x * x;
        let t = 0.1;
        let oracle = f(x0) * (t - x1) * (t - x2) / ((x0 - x1) * (x0 - x2))
            + f(x1) * (t - x0) * (t - x2) / ((x1 - x0) * (x1 - x2))
            + f(x2) * (t - x0) * (t - x1) / ((x2 - x0) * (x2 - x1));
        assert_abs_diff_eq!(p.eval(t).unwrap(), oracle, epsilon = 1e-15);
    }

    #[test]
    fn global_polynomials_are_exact() {
        for r in 0..=3 {
            let deg = 2 * r as i32;
            let q = |t: f64| (0..=deg).map(|i| (i as f64 + 1.0) * t.powi(i)).sum::<f64>();
            let g = Arc::new(CollocationGrid::uniform(5, r).unwrap());
            let p = PiecewisePolynomial::interpolate(g, q);
            for i in 0..=100 {
                let t = i as f64 / 100.0;
                assert_abs_diff_eq!(p.eval(t).unwrap(), q(t), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn node_sampling_returns_nodal_value() {
        for (r, offsets) in [(2, None), (0, None), (0, Some(vec![1.0 / 3.0]))] {
            let g = Arc::new(CollocationGrid::new(UniformMesh::new(3).unwrap(), r, offsets).unwrap());
            // distinct values per cell, so the element jumps at breakpoints
            let values: Vec<f64> = (0..g.dim()).map(|i| (i as f64 * 1.7).sin()).collect();
            let p = PiecewisePolynomial::new(g.clone(), values).unwrap();
            let f = p.to_function();
            for j in 0..3 {
                for k in 0..g.local_dim() {
                    assert_abs_diff_eq!(g.sample(&f, j, k), p.value(j, k), epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn one_sided_limits_at_breakpoints() {
        let g = Arc::new(CollocationGrid::uniform(2, 0).unwrap());
        let p = PiecewisePolynomial::new(g, vec![1.0, 2.0]).unwrap();
        assert_eq!(p.eval(0.5).unwrap(), 1.0);
        assert_eq!(p.eval_right(0.5), 2.0);
        assert_eq!(p.eval(1.0).unwrap(), 2.0);
        assert_eq!(p.eval_right(1.0), 2.0);
    }
}
