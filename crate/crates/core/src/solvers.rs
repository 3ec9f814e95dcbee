//! Collocation, iterated collocation, modified collocation and iterated
//! modified collocation for `x - Kx = f`.
//!
//! All four reduce to dense nodal systems of dimension `d = n (2r + 1)`
//! written in the global piecewise Lagrange basis `L_j`:
//!
//! * collocation solves `c - A c = f(tau)` with `A[i][j] = (K L_j)(tau_i)`;
//! * modified collocation solves for `u = P_n phi` in
//!   `(I - A - B) u = P_n f + P_n K (I - P_n) f`, where
//!   `B[i][j] = (K (I - P_n) K L_j)(tau_i)`, and reconstructs
//!   `phi = u + (I - P_n) f + (I - P_n) K u`;
//! * the iterated variants apply `phi -> K phi + f` lazily.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::{uniform_points, EvaluableFunction};
use crate::kernel::GreensKernel;
use crate::linalg::LinearSystem;
use crate::meshspace::{CollocationGrid, PiecewisePolynomial};
use crate::operator::IntegralOperator;
use crate::projection::project;
use crate::quadrature::{segments, GaussRule, DEFAULT_ORDER};

/// Condition estimates above this are reported as method failure.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Bound on `|phi - K_n^M phi - f|` at 101 points for a modified solution.
pub const MODIFIED_RESIDUAL_LIMIT: f64 = 1e-8;

/// Relative bound on `||A c - b||` for an accepted nodal solve.
pub const SOLVE_RESIDUAL_LIMIT: f64 = 1e-10;

/// `x - Kx = f` with an optional known solution.
#[derive(Debug, Clone)]
pub struct FredholmProblem {
    kernel: Arc<GreensKernel>,
    rhs: EvaluableFunction,
    exact: Option<EvaluableFunction>,
    rule: Arc<GaussRule>,
}

impl FredholmProblem {
    pub fn new(kernel: Arc<GreensKernel>, rhs: EvaluableFunction) -> Self {
        Self {
            kernel,
            rhs,
            exact: None,
            rule: Arc::new(GaussRule::new(DEFAULT_ORDER).expect("default order is valid")),
        }
    }

    pub fn with_exact_solution(mut self, phi: EvaluableFunction) -> Self {
        self.exact = Some(phi);
        self
    }

    pub fn with_rule(mut self, rule: Arc<GaussRule>) -> Self {
        self.rule = rule;
        self
    }

    pub fn kernel(&self) -> &Arc<GreensKernel> {
        &self.kernel
    }

    pub fn rhs(&self) -> &EvaluableFunction {
        &self.rhs
    }

    pub fn exact_solution(&self) -> Option<&EvaluableFunction> {
        self.exact.as_ref()
    }

    pub fn rule(&self) -> &Arc<GaussRule> {
        &self.rule
    }

    pub fn operator(&self) -> IntegralOperator {
        IntegralOperator::with_rule(self.kernel.clone(), self.rule.clone())
    }

    /// `max |phi - K phi - f|` over 101 uniform points, if `phi` is known.
    pub fn exact_residual(&self) -> Option<f64> {
        let phi = self.exact.as_ref()?;
        let op = self.operator();
        Some(
            uniform_points(101)
                .into_iter()
                .map(|s| (phi.eval(s) - op.apply(phi, s).unwrap_or(f64::NAN) - self.rhs.eval(s)).abs())
                .fold(0.0, nan_max),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Collocation,
    Iterated,
    Modified,
    IteratedModified,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Collocation,
        Method::Iterated,
        Method::Modified,
        Method::IteratedModified,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Collocation => "collocation",
            Method::Iterated => "iterated",
            Method::Modified => "modified",
            Method::IteratedModified => "iterated_modified",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AssemblyStats {
    pub dimension: usize,
    /// Kernel evaluations spent assembling the nodal system.
    pub kernel_evaluations: u64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub method: Method,
    pub solution: EvaluableFunction,
    /// The collocation solution, or `P_n` of the modified solution.
    pub nodal: PiecewisePolynomial,
    pub condition: f64,
    pub stats: AssemblyStats,
}

/// `int_{cell} kappa(s, t) L_k(t) dt` for each local basis function, split
/// at `s` when it lies inside the cell. Returns the kernel evaluations used.
fn cell_moments(
    kernel: &GreensKernel,
    rule: &GaussRule,
    grid: &CollocationGrid,
    s: f64,
    cell: usize,
    out: &mut [f64],
) -> u64 {
    let mesh = grid.mesh();
    let (lo, hi) = (mesh.breakpoint(cell), mesh.breakpoint(cell + 1));
    out.iter_mut().for_each(|v| *v = 0.0);
    let mut basis = vec![0.0; out.len()];
    let mut evals = 0;
    for (a, b) in segments(lo, hi, &[s]) {
        let piece = if b <= s { kernel.lower() } else { kernel.upper() };
        for (t, w) in rule.mapped(a, b) {
            let kw = w * piece.value(s, t);
            grid.basis_all((t - lo) * mesh.n() as f64, &mut basis);
            for (o, l) in out.iter_mut().zip(&basis) {
                *o += kw * l;
            }
            evals += 1;
        }
    }
    evals
}

/// Row `((K L_j)(s))_j` over the whole basis.
fn basis_images(kernel: &GreensKernel, rule: &GaussRule, grid: &CollocationGrid, s: f64, row: &mut [f64]) -> u64 {
    let p = grid.local_dim();
    (0..grid.mesh().n())
        .map(|cell| cell_moments(kernel, rule, grid, s, cell, &mut row[cell * p..(cell + 1) * p]))
        .sum()
}

/// `A[i][j] = (K L_j)(tau_i)`.
fn collocation_matrix(kernel: &GreensKernel, rule: &GaussRule, grid: &CollocationGrid) -> (Vec<f64>, u64) {
    let d = grid.dim();
    let nodes = grid.nodes();
    let mut a = vec![0.0; d * d];
    let evals: u64 = a
        .par_chunks_mut(d)
        .zip(nodes.par_iter())
        .map(|(row, &tau)| basis_images(kernel, rule, grid, tau, row))
        .sum();
    (a, evals)
}

fn check_solution(system: &LinearSystem) -> Result<(Vec<f64>, f64)> {
    let sol = system.solve()?;
    if sol.condition > CONDITION_LIMIT || !sol.condition.is_finite() {
        return Err(Error::IllConditioned(sol.condition));
    }
    let bmax = system.rhs().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if sol.residual > SOLVE_RESIDUAL_LIMIT * (1.0 + bmax) {
        return Err(Error::IllConditioned(sol.condition));
    }
    Ok((sol.coefficients, sol.condition))
}

fn nodal_values(grid: &CollocationGrid, x: &EvaluableFunction) -> Vec<f64> {
    let p = grid.local_dim();
    (0..grid.dim()).map(|i| grid.sample(x, i / p, i % p)).collect()
}

/// `phi_n^C - P_n K phi_n^C = P_n f`.
pub fn solve_collocation(problem: &FredholmProblem, grid: &Arc<CollocationGrid>) -> Result<SolveResult> {
    let d = grid.dim();
    let (a, evals) = collocation_matrix(&problem.kernel, &problem.rule, grid);
    let mut m: Vec<f64> = a.iter().map(|v| -v).collect();
    for i in 0..d {
        m[i * d + i] += 1.0;
    }
    let rhs = nodal_values(grid, &problem.rhs);
    let (c, condition) = check_solution(&LinearSystem::new(m, rhs)?)?;
    let nodal = PiecewisePolynomial::new(grid.clone(), c)?;
    Ok(SolveResult {
        method: Method::Collocation,
        solution: nodal.to_function().with_tag("collocation"),
        nodal,
        condition,
        stats: AssemblyStats {
            dimension: d,
            kernel_evaluations: evals,
        },
    })
}

/// `phi_n^S = K phi_n^C + f`.
pub fn iterate(problem: &FredholmProblem, result: &SolveResult) -> Result<SolveResult> {
    if result.method != Method::Collocation {
        return Err(Error::WrongMethod {
            expected: Method::Collocation.name(),
            got: result.method.name(),
        });
    }
    let k_phi = problem.operator().image(&result.solution);
    Ok(SolveResult {
        method: Method::Iterated,
        solution: k_phi.add(&problem.rhs).with_tag("iterated"),
        ..result.clone()
    })
}

/// Composite Gauss abscissae on `[0, 1]` cut at every breakpoint and node,
/// shared by all outer integrals whose diagonal point is a node.
struct OuterGrid {
    points: Vec<f64>,
    weights: Vec<f64>,
    cells: Vec<usize>,
    basis: Vec<f64>,
}

impl OuterGrid {
    fn new(grid: &CollocationGrid, rule: &GaussRule) -> Self {
        let mesh = grid.mesh();
        let p = grid.local_dim();
        let mut cuts = mesh.breakpoints();
        cuts.extend(grid.distinct_nodes());
        let mut out = Self {
            points: vec![],
            weights: vec![],
            cells: vec![],
            basis: vec![],
        };
        let mut local = vec![0.0; p];
        for (a, b) in segments(0.0, 1.0, &cuts) {
            for (t, w) in rule.mapped(a, b) {
                let (cell, xi) = grid.local(t);
                grid.basis_all(xi, &mut local);
                out.points.push(t);
                out.weights.push(w);
                out.cells.push(cell);
                out.basis.extend_from_slice(&local);
            }
        }
        out
    }

    fn len(&self) -> usize {
        self.points.len()
    }

    /// `(P_n x)(t_q)` for every abscissa, from nodal values of `x`.
    fn interpolate(&self, p: usize, nodal: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|q| {
                let c = self.cells[q];
                (0..p).map(|k| nodal[c * p + k] * self.basis[q * p + k]).sum()
            })
            .collect()
    }
}

/// Everything produced while reducing the modified method to nodal form.
struct ModifiedAssembly {
    /// `A` (row-major `d x d`).
    a: Vec<f64>,
    /// `w_q kappa(tau_i, t_q)`, row-major `d x m`.
    outer: Vec<f64>,
    grid: OuterGrid,
    system: LinearSystem,
    f_nodes: Vec<f64>,
    evals: u64,
}

fn assemble_modified(problem: &FredholmProblem, grid: &CollocationGrid) -> Result<ModifiedAssembly> {
    let kernel = &problem.kernel;
    let rule = &problem.rule;
    let d = grid.dim();
    let p = grid.local_dim();
    let nodes = grid.nodes();
    let (a, a_evals) = collocation_matrix(kernel, rule, grid);
    let og = OuterGrid::new(grid, rule);
    let m = og.len();

    let mut outer = vec![0.0; d * m];
    outer.par_chunks_mut(m).zip(nodes.par_iter()).for_each(|(row, &tau)| {
        for ((out, &t), &w) in row.iter_mut().zip(&og.points).zip(&og.weights) {
            let piece = if t <= tau { kernel.lower() } else { kernel.upper() };
            *out = w * piece.value(tau, t);
        }
    });

    // v_j(t_q) = (K L_j)(t_q) - (P_n K L_j)(t_q); nodal values of K L_j are A's column j
    let mut v = vec![0.0; m * d];
    let v_evals: u64 = v
        .par_chunks_mut(d)
        .enumerate()
        .map(|(q, row)| {
            let evals = basis_images(kernel, rule, grid, og.points[q], row);
            let c = og.cells[q];
            for k in 0..p {
                let l = og.basis[q * p + k];
                let a_row = &a[(c * p + k) * d..(c * p + k + 1) * d];
                for (vj, aj) in row.iter_mut().zip(a_row) {
                    *vj -= l * aj;
                }
            }
            evals
        })
        .sum();

    // I - A - B with B = outer * v
    let mut matrix = vec![0.0; d * d];
    matrix.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
        let w = &outer[i * m..(i + 1) * m];
        for (q, &wq) in w.iter().enumerate() {
            if wq != 0.0 {
                for (r, vq) in row.iter_mut().zip(&v[q * d..(q + 1) * d]) {
                    *r += wq * vq;
                }
            }
        }
        for (r, aij) in row.iter_mut().zip(&a[i * d..(i + 1) * d]) {
            *r = -*r - aij;
        }
        row[i] += 1.0;
    });

    let f_nodes = nodal_values(grid, &problem.rhs);
    let f_outer: Vec<f64> = og.points.par_iter().map(|&t| problem.rhs.eval(t)).collect();
    let pf_outer = og.interpolate(p, &f_nodes);
    let g: Vec<f64> = f_outer.iter().zip(&pf_outer).map(|(f, pf)| f - pf).collect();
    let rhs: Vec<f64> = (0..d)
        .map(|i| f_nodes[i] + dot(&outer[i * m..(i + 1) * m], &g))
        .collect();

    Ok(ModifiedAssembly {
        a,
        outer,
        grid: og,
        system: LinearSystem::new(matrix, rhs)?,
        f_nodes,
        evals: a_evals + v_evals + (d * m) as u64,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(a: &[f64], d: usize, v: &[f64]) -> Vec<f64> {
    a.chunks_exact(d).map(|row| dot(row, v)).collect()
}

/// `(I - K_n^M) phi_n^M = f` with `K_n^M = P_n K + K P_n - P_n K P_n`.
pub fn solve_modified(problem: &FredholmProblem, grid: &Arc<CollocationGrid>) -> Result<SolveResult> {
    let asm = assemble_modified(problem, grid)?;
    let d = grid.dim();
    let (u, condition) = check_solution(&asm.system)?;

    let op = problem.operator();
    let u_pp = PiecewisePolynomial::new(grid.clone(), u.clone())?;
    let u_fn = u_pp.to_function();
    let pf = PiecewisePolynomial::new(grid.clone(), asm.f_nodes.clone())?.to_function();
    let pku = PiecewisePolynomial::new(grid.clone(), mat_vec(&asm.a, d, &u))?.to_function();
    let ku = op.image(&u_fn);
    let phi = EvaluableFunction::linear_combination(&[
        (1.0, &u_fn),
        (1.0, &problem.rhs),
        (-1.0, &pf),
        (1.0, &ku),
        (-1.0, &pku),
    ])
    .with_tag("modified")
    .memoized();

    let residual = modified_equation_residual(problem, grid, &asm, &phi)?;
    // NaN fails too
    if residual.is_nan() || residual > MODIFIED_RESIDUAL_LIMIT {
        return Err(Error::ReconstructionResidual(residual));
    }

    Ok(SolveResult {
        method: Method::Modified,
        solution: phi,
        nodal: u_pp,
        condition,
        stats: AssemblyStats {
            dimension: d,
            kernel_evaluations: asm.evals,
        },
    })
}

/// `max |phi - K_n^M phi - f|` over 101 uniform points, with every operator
/// applied to the reconstructed `phi` directly.
fn modified_equation_residual(
    problem: &FredholmProblem,
    grid: &Arc<CollocationGrid>,
    asm: &ModifiedAssembly,
    phi: &EvaluableFunction,
) -> Result<f64> {
    let d = grid.dim();
    let m = asm.grid.len();
    let op = problem.operator();

    let p_phi = project(grid, phi);
    let phi_outer: Vec<f64> = asm.grid.points.par_iter().map(|&t| phi.eval(t)).collect();
    let k_phi_nodes: Vec<f64> = (0..d).map(|i| dot(&asm.outer[i * m..(i + 1) * m], &phi_outer)).collect();
    let pk_phi = PiecewisePolynomial::new(grid.clone(), k_phi_nodes)?.to_function();
    let p_phi_fn = p_phi.to_function();
    let kp_phi = op.image(&p_phi_fn);
    let pkp_phi = PiecewisePolynomial::new(grid.clone(), mat_vec(&asm.a, d, p_phi.values()))?.to_function();

    let worst = uniform_points(101)
        .into_par_iter()
        .map(|s| {
            let knm = pk_phi.eval(s) + kp_phi.eval(s) - pkp_phi.eval(s);
            (phi.eval(s) - knm - problem.rhs.eval(s)).abs()
        })
        .reduce(|| 0.0, nan_max);
    Ok(worst)
}

/// `tilde phi_n^M = K phi_n^M + f`.
pub fn iterate_modified(problem: &FredholmProblem, result: &SolveResult) -> Result<SolveResult> {
    if result.method != Method::Modified {
        return Err(Error::WrongMethod {
            expected: Method::Modified.name(),
            got: result.method.name(),
        });
    }
    let k_phi = problem.operator().image(&result.solution);
    Ok(SolveResult {
        method: Method::IteratedModified,
        solution: k_phi.add(&problem.rhs).with_tag("iterated_modified"),
        ..result.clone()
    })
}

/// Runs `method`, solving the underlying nodal system first for iterated variants.
pub fn solve(problem: &FredholmProblem, grid: &Arc<CollocationGrid>, method: Method) -> Result<SolveResult> {
    match method {
        Method::Collocation => solve_collocation(problem, grid),
        Method::Iterated => iterate(problem, &solve_collocation(problem, grid)?),
        Method::Modified => solve_modified(problem, grid),
        Method::IteratedModified => iterate_modified(problem, &solve_modified(problem, grid)?),
    }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}
