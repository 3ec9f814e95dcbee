//! Manufactured-solution convergence studies.

use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{Context, Result};
use fredholm_core::solvers::{iterate, iterate_modified, solve_collocation, solve_modified};
use fredholm_core::{sup_norm, EvaluableFunction, FredholmProblem, GaussRule, GreensKernel, IntegralOperator, Method};
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::solution_by_name;
use crate::config::StudyConfig;
use crate::eoc::{pairwise, tail_slope, Eoc, ERROR_FLOOR};

/// Accepted deviation of a fitted slope from its target order.
pub const ORDER_TOLERANCE: f64 = 0.3;

/// `f = phi - K phi`, evaluated on demand and cached, with `phi` attached.
pub fn manufactured_problem(kernel: Arc<GreensKernel>, phi: EvaluableFunction, rule: Arc<GaussRule>) -> FredholmProblem {
    let op = IntegralOperator::with_rule(kernel.clone(), rule.clone());
    let f = phi.sub(&op.image(&phi)).with_tag(format!("{0} - K {0}", phi.tag())).memoized();
    FredholmProblem::new(kernel, f).with_rule(rule).with_exact_solution(phi)
}

/// Expected order of `method` with `2r + 1` equally spaced nodes.
pub fn target_order(method: Method, r: usize) -> f64 {
    let r = r as f64;
    match method {
        Method::Collocation => 2.0 * r + 1.0,
        Method::Iterated => 2.0 * r + 2.0,
        Method::Modified if r >= 1.0 => 2.0 * r + 2.0,
        Method::Modified => 3.0,
        Method::IteratedModified if r >= 1.0 => 2.0 * r + 3.0,
        Method::IteratedModified => 4.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    pub n: usize,
    pub h: f64,
    pub sup_error: Option<f64>,
    pub eoc: Option<Eoc>,
    pub condition: Option<f64>,
    pub dimension: usize,
    pub kernel_evaluations: u64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodReport {
    pub method: String,
    pub target_order: f64,
    pub rows: Vec<StudyRow>,
    /// Least-squares slope over the tail; `None` when errors sit at the floor.
    pub tail_slope: Option<f64>,
    pub pass: bool,
}

impl MethodReport {
    pub fn errors(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.sup_error).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub config: StudyConfig,
    /// `max |phi - K phi - f|` over 101 points.
    pub manufactured_residual: f64,
    pub methods: Vec<MethodReport>,
}

impl ConvergenceReport {
    pub fn method(&self, m: Method) -> Option<&MethodReport> {
        self.methods.iter().find(|r| r.method == m.name())
    }

    pub fn pass(&self) -> bool {
        self.methods.iter().all(|m| m.pass)
    }
}

struct Cell {
    sup_error: Result<f64, String>,
    condition: f64,
    dimension: usize,
    kernel_evaluations: u64,
}

fn solve_at(problem: &FredholmProblem, config: &StudyConfig, n: usize) -> Result<BTreeMap<Method, Cell>> {
    let grid = config.grid(n)?;
    let phi = problem.exact_solution().expect("manufactured").clone();
    let want = |m: Method| config.methods.contains(&m);
    let mut out = BTreeMap::new();
    let mut record = |m: Method, res: &fredholm_core::Result<fredholm_core::SolveResult>| {
        let cell = match res {
            Ok(r) => Cell {
                sup_error: Ok(sup_norm(&phi.sub(&r.solution), &grid)),
                condition: r.condition,
                dimension: r.stats.dimension,
                kernel_evaluations: r.stats.kernel_evaluations,
            },
            Err(e) => Cell {
                sup_error: Err(e.to_string()),
                condition: f64::NAN,
                dimension: grid.dim(),
                kernel_evaluations: 0,
            },
        };
        out.insert(m, cell);
    };
    if want(Method::Collocation) || want(Method::Iterated) {
        let col = solve_collocation(problem, &grid);
        if want(Method::Collocation) {
            record(Method::Collocation, &col);
        }
        if want(Method::Iterated) {
            record(Method::Iterated, &col.and_then(|c| iterate(problem, &c)));
        }
    }
    if want(Method::Modified) || want(Method::IteratedModified) {
        let md = solve_modified(problem, &grid);
        if want(Method::Modified) {
            record(Method::Modified, &md);
        }
        if want(Method::IteratedModified) {
            record(Method::IteratedModified, &md.and_then(|m| iterate_modified(problem, &m)));
        }
    }
    Ok(out)
}

/// Solves every requested method at every `n`; solver failures are
/// recorded in their row and the study continues.
pub fn run_study(config: &StudyConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let phi = solution_by_name(&config.solution).context("unknown solution")?;
    let problem = manufactured_problem(config.kernel()?, phi, config.rule()?);
    let manufactured_residual = problem.exact_residual().unwrap_or(f64::NAN);

    let cells: Vec<BTreeMap<Method, Cell>> = config
        .n_list
        .par_iter()
        .map(|&n| solve_at(&problem, config, n))
        .collect::<Result<_>>()?;

    let mut methods: Vec<Method> = config.methods.clone();
    methods.sort();
    methods.dedup();
    let methods = methods
        .into_iter()
        .map(|m| {
            let mut rows: Vec<StudyRow> = config
                .n_list
                .iter()
                .zip(&cells)
                .map(|(&n, c)| {
                    let cell = &c[&m];
                    StudyRow {
                        n,
                        h: 1.0 / n as f64,
                        sup_error: cell.sup_error.clone().ok(),
                        eoc: None,
                        condition: cell.sup_error.is_ok().then_some(cell.condition),
                        dimension: cell.dimension,
                        kernel_evaluations: cell.kernel_evaluations,
                        failure: cell.sup_error.clone().err(),
                    }
                })
                .collect();
            let errors: Vec<Option<f64>> = rows.iter().map(|r| r.sup_error).collect();
            for (row, e) in rows.iter_mut().zip(pairwise(&config.n_list, &errors)) {
                row.eoc = e;
            }
            let target = target_order(m, config.r);
            let slope = tail_slope(&config.n_list, &errors);
            let pass = match slope {
                Some(p) => (p - target).abs() <= ORDER_TOLERANCE,
                None => errors.iter().all(|e| e.is_some_and(|e| e < ERROR_FLOOR)),
            };
            MethodReport {
                method: m.name().to_string(),
                target_order: target,
                rows,
                tail_slope: slope,
                pass,
            }
        })
        .collect();

    Ok(ConvergenceReport {
        config: config.clone(),
        manufactured_residual,
        methods,
    })
}
