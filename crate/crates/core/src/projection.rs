//! Interpolatory projection onto the piecewise polynomial space, projection
//! residuals, composed residual operators and divided-difference probes of
//! `Kx` on a single cell.

use std::sync::Arc;

use rayon::prelude::*;

use crate::divdiff::{divided_difference, divided_difference_values};
use crate::error::{Error, Result};
use crate::function::{sup_norm, EvaluableFunction};
use crate::meshspace::{CollocationGrid, PiecewisePolynomial};
use crate::operator::IntegralOperator;

/// Relative radius (in units of `h`) of the node neighbourhoods excluded from
/// the distinct-node probe.
pub const NODE_EXCLUSION: f64 = 1e-6;

/// Relative shift (in units of `h`) used when the repeated-node probe is
/// asked for a point that coincides with a node.
pub const CONFLUENT_SHIFT: f64 = 1e-5;

/// Interior probe points per cell for the sampled suprema.
pub const PROBE_POINTS_PER_CELL: usize = 25;

/// `P_n x`: the element of the piecewise polynomial space matching `x` at every node.
pub fn project(grid: &Arc<CollocationGrid>, x: &EvaluableFunction) -> PiecewisePolynomial {
    let p = grid.local_dim();
    let values = (0..grid.dim()).map(|i| grid.sample(x, i / p, i % p)).collect();
    PiecewisePolynomial::new(grid.clone(), values).expect("dimension matches grid")
}

/// `(I - P_n) x`, jumping at the mesh breakpoints.
pub fn residual(grid: &Arc<CollocationGrid>, x: &EvaluableFunction) -> EvaluableFunction {
    let px = project(grid, x).to_function();
    x.sub(&px)
        .with_kinks(&grid.mesh().breakpoints())
        .with_tag(format!("(I-P)({})", x.tag()))
}

/// `||K (I - P_n) x||`, sampled.
pub fn residual_norm_k(op: &IntegralOperator, grid: &Arc<CollocationGrid>, x: &EvaluableFunction) -> f64 {
    let r = residual(grid, x).memoized();
    sup_norm(&op.image(&r), grid)
}

/// `||(I - P_n) K (I - P_n) x||`, sampled.
pub fn residual_norm_pkp(op: &IntegralOperator, grid: &Arc<CollocationGrid>, x: &EvaluableFunction) -> f64 {
    let r = residual(grid, x).memoized();
    let w = op.image(&r).memoized();
    sup_norm(&residual(grid, &w), grid)
}

/// `||K (I - P_n) K (I - P_n) x||`, sampled.
pub fn residual_norm_kpk(op: &IntegralOperator, grid: &Arc<CollocationGrid>, x: &EvaluableFunction) -> f64 {
    let r = residual(grid, x).memoized();
    let w = op.image(&r).memoized();
    let v = residual(grid, &w).memoized();
    sup_norm(&op.image(&v), grid)
}

fn check_cell(grid: &CollocationGrid, j: usize, s: f64) -> Result<()> {
    let mesh = grid.mesh();
    if j >= mesh.n() {
        return Err(Error::SubintervalIndex { j, n: mesh.n() });
    }
    let (lo, hi) = (mesh.breakpoint(j), mesh.breakpoint(j + 1));
    if s < lo || s > hi {
        return Err(Error::OutsideSubinterval { s, j });
    }
    Ok(())
}

fn near_node(grid: &CollocationGrid, j: usize, s: f64) -> Option<usize> {
    let eps = grid.mesh().h() * NODE_EXCLUSION;
    (0..grid.local_dim()).find(|&k| (grid.node(j, k) - s).abs() <= eps)
}

/// `[tau_j^0, ..., tau_j^{2r}, s] Kx` for `s` in cell `j` (0-based) away
/// from the cell's nodes.
pub fn divided_diff_k(
    op: &IntegralOperator,
    grid: &CollocationGrid,
    x: &EvaluableFunction,
    j: usize,
    s: f64,
) -> Result<f64> {
    check_cell(grid, j, s)?;
    if near_node(grid, j, s).is_some() {
        return Err(Error::NodeCoincidence { s });
    }
    let mut points = grid.cell_nodes(j);
    points.push(s);
    let values = points
        .iter()
        .map(|&p| op.apply(x, p))
        .collect::<Result<Vec<_>>>()?;
    divided_difference_values(&points, &values)
}

/// `[tau_j^0, ..., tau_j^{2r}, s, s] Kx`, using `(Kx)'(s)` for the doubled
/// point. When `s` sits on a node the value is taken at `s` shifted by
/// `CONFLUENT_SHIFT * h` into the cell, approximating the triple point.
pub fn divided_diff_k_repeated(
    op: &IntegralOperator,
    grid: &CollocationGrid,
    x: &EvaluableFunction,
    j: usize,
    s: f64,
) -> Result<f64> {
    divided_diff_k_repeated_shifted(op, grid, x, j, s, CONFLUENT_SHIFT)
}

/// [`divided_diff_k_repeated`] with an explicit relative shift.
pub fn divided_diff_k_repeated_shifted(
    op: &IntegralOperator,
    grid: &CollocationGrid,
    x: &EvaluableFunction,
    j: usize,
    s: f64,
    shift: f64,
) -> Result<f64> {
    check_cell(grid, j, s)?;
    if !op.kernel().has_analytic_partials() {
        return Err(Error::MissingKernelDerivative(op.kernel().name().to_string()));
    }
    let h = grid.mesh().h();
    let s = match near_node(grid, j, s) {
        Some(_) if s + shift * h <= grid.mesh().breakpoint(j + 1) => s + shift * h,
        Some(_) => s - shift * h,
        None => s,
    };
    let nodes = grid.cell_nodes(j);
    let node_values = nodes
        .iter()
        .map(|&p| op.apply(x, p))
        .collect::<Result<Vec<_>>>()?;
    let ks = op.apply(x, s)?;
    let dks = op.apply_ds(x, s)?;
    let mut points = nodes.clone();
    points.extend([s, s]);
    divided_difference(&points, |p, k| {
        if p == s {
            return match k {
                0 => Some(ks),
                1 => Some(dks),
                _ => None,
            };
        }
        let i = nodes.iter().position(|&q| q == p)?;
        (k == 0).then_some(node_values[i])
    })
}

/// Interior probe points of cell `j`: `t_j + h i / 26`, `i = 1..=25`.
pub fn probe_points(grid: &CollocationGrid, j: usize) -> Vec<f64> {
    let mesh = grid.mesh();
    let m = PROBE_POINTS_PER_CELL;
    (1..=m)
        .map(|i| mesh.breakpoint(j) + mesh.h() * i as f64 / (m + 1) as f64)
        .collect()
}

/// Sampled `sup_s |[tau_j^0..tau_j^{2r}, s] Kx|` over all cells; points
/// within the exclusion radius of a node are skipped.
pub fn divided_diff_k_sup(op: &IntegralOperator, grid: &CollocationGrid, x: &EvaluableFunction) -> Result<f64> {
    let kx = op.image(x).memoized();
    let cells: Vec<usize> = (0..grid.mesh().n()).collect();
    let per_cell = cells
        .par_iter()
        .map(|&j| {
            let mut points = grid.cell_nodes(j);
            let values: Vec<f64> = points.iter().map(|&p| kx.eval(p)).collect();
            let mut best = 0.0_f64;
            for s in probe_points(grid, j) {
                if near_node(grid, j, s).is_some() {
                    continue;
                }
                points.push(s);
                let mut vals = values.clone();
                vals.push(kx.eval(s));
                best = best.max(divided_difference_values(&points, &vals)?.abs());
                points.pop();
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_cell.into_iter().fold(0.0, f64::max))
}

/// Sampled `sup_s |[tau_j^0..tau_j^{2r}, s, s] Kx|` over all cells, with the
/// same node exclusion as [`divided_diff_k_sup`]: the shifted confluent
/// limit loses digits like `1 / shift^{2r+1}`.
pub fn divided_diff_k_repeated_sup(
    op: &IntegralOperator,
    grid: &CollocationGrid,
    x: &EvaluableFunction,
) -> Result<f64> {
    let x = x.clone().memoized();
    let cells: Vec<usize> = (0..grid.mesh().n()).collect();
    let per_cell = cells
        .par_iter()
        .map(|&j| {
            probe_points(grid, j)
                .into_iter()
                .filter(|&s| near_node(grid, j, s).is_none())
                .map(|s| divided_diff_k_repeated(op, grid, &x, j, s).map(f64::abs))
                .try_fold(0.0_f64, |acc, v| v.map(|v| acc.max(v)))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(per_cell.into_iter().fold(0.0, f64::max))
}
