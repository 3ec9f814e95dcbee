//! The rank-one example on which iterated collocation does not
//! superconverge: `kappa = s`, one node per cell at offset 1/3, `x = 4s`.

use std::sync::Arc;

use anyhow::Result;
use fredholm_core::projection::{residual, residual_norm_k};
use fredholm_core::solvers::{iterate, solve_collocation};
use fredholm_core::{sup_norm, CollocationGrid, GreensKernel, IntegralOperator, UniformMesh};
use serde::Serialize;

use crate::catalog::solution_by_name;
use crate::study::manufactured_problem;

pub const VALUE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleRow {
    pub n: usize,
    /// `||(I - P_n) x||`, expected `8 / (3n)`.
    pub interpolation_error: f64,
    /// `||K (I - P_n) x||`, expected `2 / (3n)`.
    pub smoothed_error: f64,
    pub ratio: f64,
    /// `||x - x^S|| / ||x - x^C||` from actually solving `x - Kx = 2s`.
    pub solver_ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub rows: Vec<CounterexampleRow>,
    pub min_ratio: f64,
    pub pass: bool,
}

pub fn run_counterexample(n_list: &[usize]) -> Result<CounterexampleReport> {
    let kernel = Arc::new(GreensKernel::rank_one());
    let op = IntegralOperator::new(kernel.clone());
    let phi = solution_by_name("linear4").expect("catalog entry");
    let problem = manufactured_problem(kernel, phi.clone(), op.rule().clone());
    let mut rows = Vec::new();
    for &n in n_list {
        let grid = Arc::new(CollocationGrid::new(UniformMesh::new(n)?, 0, Some(vec![1.0 / 3.0]))?);
        let interpolation_error = sup_norm(&residual(&grid, &phi), &grid);
        let smoothed_error = residual_norm_k(&op, &grid, &phi);
        let ratio = smoothed_error / interpolation_error;

        let col = solve_collocation(&problem, &grid)?;
        let it = iterate(&problem, &col)?;
        let solver_ratio = sup_norm(&phi.sub(&it.solution), &grid) / sup_norm(&phi.sub(&col.solution), &grid);

        let nf = n as f64;
        let pass = (smoothed_error - 2.0 / (3.0 * nf)).abs() <= VALUE_TOLERANCE
            && (interpolation_error - 8.0 / (3.0 * nf)).abs() <= VALUE_TOLERANCE
            && ratio >= 0.25 - VALUE_TOLERANCE;
        rows.push(CounterexampleRow {
            n,
            interpolation_error,
            smoothed_error,
            ratio,
            solver_ratio,
            pass,
        });
    }
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let pass = rows.iter().all(|r| r.pass);
    Ok(CounterexampleReport { rows, min_ratio, pass })
}
