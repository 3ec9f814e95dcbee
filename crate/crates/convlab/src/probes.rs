//! Scaling probes: growth of the divided-difference quantities, decay of
//! the composed residual operators, and the halving of
//! `||K (I - P_n) K (I - P_n)||` under mesh refinement.

use anyhow::{Context, Result};
use fredholm_core::projection::{
    divided_diff_k_repeated_sup, divided_diff_k_sup, residual_norm_k, residual_norm_kpk, residual_norm_pkp,
};
use fredholm_core::{EvaluableFunction, IntegralOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::solution_by_name;
use crate::config::StudyConfig;
use crate::eoc::{least_squares_slope, tail_slope, ERROR_FLOOR};
use crate::study::ORDER_TOLERANCE;

/// Largest allowed increase of `h^{2r}` times a divided-difference sup.
pub const GROWTH_FACTOR: f64 = 3.0;

pub const HALVING_FUNCTIONS: usize = 10;
pub const HALVING_KNOTS: usize = 16;
pub const HALVING_N: [usize; 3] = [8, 16, 32];
pub const HALVING_RANGE: (f64, f64) = (0.3, 0.8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    /// Must decay like `h^target`.
    Decay,
    /// Must not grow faster than `h^target` (target negative).
    Growth,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSeries {
    pub name: String,
    pub kind: ProbeKind,
    pub target: f64,
    pub values: Vec<f64>,
    /// Decay: tail least-squares slope. Growth: slope over all points.
    pub slope: Option<f64>,
    /// Growth only: largest `h_b^{2r} v_b / (h_a^{2r} v_a)` over `a < b`.
    pub scaled_growth: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalvingProbe {
    pub n_list: Vec<usize>,
    /// Max over the random functions at each n.
    pub values: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Every ratio inside [`HALVING_RANGE`].
    pub pass: bool,
    /// Every ratio at most the upper end: no slower than `O(h)`.
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub config: StudyConfig,
    pub series: Vec<ProbeSeries>,
    pub halving: Option<HalvingProbe>,
}

impl ProbeReport {
    pub fn series(&self, name: &str) -> Option<&ProbeSeries> {
        self.series.iter().find(|s| s.name == name)
    }

    pub fn pass(&self) -> bool {
        self.series.iter().all(|s| s.pass) && self.halving.as_ref().is_none_or(|h| h.pass)
    }
}

/// Decay exponents of `K(I-P)`, `(I-P)K(I-P)` and `K(I-P)K(I-P)`.
pub fn decay_targets(r: usize) -> [f64; 3] {
    let r = r as f64;
    if r >= 1.0 {
        [2.0 * r + 2.0, 2.0 * r + 2.0, 2.0 * r + 3.0]
    } else {
        [2.0, 3.0, 4.0]
    }
}

fn decay(name: &str, target: f64, ns: &[usize], values: Vec<f64>) -> ProbeSeries {
    let errs: Vec<Option<f64>> = values.iter().map(|&v| Some(v)).collect();
    let slope = tail_slope(ns, &errs);
    let pass = match slope {
        Some(p) => (p - target).abs() <= ORDER_TOLERANCE,
        None => values.iter().all(|&v| v < ERROR_FLOOR),
    };
    ProbeSeries {
        name: name.to_string(),
        kind: ProbeKind::Decay,
        target,
        values,
        slope,
        scaled_growth: None,
        pass,
    }
}

fn growth(name: &str, r: usize, ns: &[usize], values: Vec<f64>) -> ProbeSeries {
    let target = -2.0 * r as f64;
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v >= ERROR_FLOOR)
        .map(|(&n, &v)| (-(n as f64).log2(), v.log2()))
        .collect();
    let slope = least_squares_slope(&pts);
    let scaled: Vec<f64> = ns
        .iter()
        .zip(&values)
        .map(|(&n, &v)| v * (n as f64).powi(-2 * r as i32))
        .collect();
    let mut worst = 0.0_f64;
    for a in 0..scaled.len() {
        for b in a + 1..scaled.len() {
            if scaled[a] >= ERROR_FLOOR {
                worst = worst.max(scaled[b] / scaled[a]);
            }
        }
    }
    let pass = slope.is_none_or(|p| p >= target - ORDER_TOLERANCE) && worst <= GROWTH_FACTOR;
    ProbeSeries {
        name: name.to_string(),
        kind: ProbeKind::Growth,
        target,
        values,
        slope,
        scaled_growth: Some(worst),
        pass,
    }
}

/// Unit-sup piecewise-linear function through random values at random knots.
pub fn random_probe_function(rng: &mut ChaCha8Rng, knots: usize) -> EvaluableFunction {
    let mut ts: Vec<f64> = (0..knots).map(|_| rng.gen_range(0.0..1.0)).collect();
    ts.push(0.0);
    ts.push(1.0);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut vs: Vec<f64> = ts.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    let peak = vs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    vs.iter_mut().for_each(|v| *v /= peak);
    let kinks = ts[1..ts.len() - 1].to_vec();
    EvaluableFunction::new("random", kinks, move |t| {
        let i = ts.partition_point(|&k| k <= t).clamp(1, ts.len() - 1);
        let (a, b) = (ts[i - 1], ts[i]);
        let w = (t - a) / (b - a);
        vs[i - 1] * (1.0 - w) + vs[i] * w
    })
}

/// Max over random unit-sup functions of `||K(I-P)K(I-P) x||` at each n.
pub fn run_halving_probe(config: &StudyConfig, op: &IntegralOperator) -> Result<HalvingProbe> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let fns: Vec<EvaluableFunction> = (0..HALVING_FUNCTIONS)
        .map(|_| random_probe_function(&mut rng, HALVING_KNOTS).memoized())
        .collect();
    let n_list = HALVING_N.to_vec();
    let values = n_list
        .iter()
        .map(|&n| {
            let grid = config.grid(n)?;
            Ok(fns
                .par_iter()
                .map(|x| residual_norm_kpk(op, &grid, x))
                .reduce(|| 0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    let ratios: Vec<f64> = values.windows(2).map(|w| w[1] / w[0]).collect();
    let pass = ratios.iter().all(|r| (HALVING_RANGE.0..=HALVING_RANGE.1).contains(r));
    let within_bound = ratios.iter().all(|&r| r <= HALVING_RANGE.1);
    Ok(HalvingProbe {
        n_list,
        values,
        ratios,
        pass,
        within_bound,
    })
}

/// Runs every probe on `config.solution` over `config.n_list`.
pub fn run_scaling_probes(config: &StudyConfig, with_halving: bool) -> Result<ProbeReport> {
    config.validate()?;
    let x = solution_by_name(&config.solution).context("unknown solution")?;
    let op = IntegralOperator::with_rule(config.kernel()?, config.rule()?);
    let ns = &config.n_list;

    let rows = ns
        .par_iter()
        .map(|&n| {
            let grid = config.grid(n)?;
            Ok([
                divided_diff_k_sup(&op, &grid, &x)?,
                divided_diff_k_repeated_sup(&op, &grid, &x)?,
                residual_norm_k(&op, &grid, &x),
                residual_norm_pkp(&op, &grid, &x),
                residual_norm_kpk(&op, &grid, &x),
            ])
        })
        .collect::<Result<Vec<[f64; 5]>>>()?;
    let col = |i: usize| rows.iter().map(|r| r[i]).collect::<Vec<f64>>();
    let [tk, tpkp, tkpk] = decay_targets(config.r);

    let series = vec![
        growth("divided_difference", config.r, ns, col(0)),
        growth("divided_difference_repeated", config.r, ns, col(1)),
        decay("residual_k", tk, ns, col(2)),
        decay("residual_pkp", tpkp, ns, col(3)),
        decay("residual_kpk", tkpk, ns, col(4)),
    ];
    let halving = if with_halving {
        Some(run_halving_probe(config, &op)?)
    } else {
        None
    };
    Ok(ProbeReport {
        config: config.clone(),
        series,
        halving,
    })
}
