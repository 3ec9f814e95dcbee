use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use convlab::catalog::solution_by_name;
use convlab::config::{Format, StudyConfig};
use convlab::counterexample::run_counterexample;
use convlab::probes::run_scaling_probes;
use convlab::report;
use convlab::study::{manufactured_problem, run_study};
use fredholm_core::{solvers, sup_norm};

#[derive(Parser)]
#[command(name = "convlab", version, about = "Convergence studies for collocation-type Fredholm solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one manufactured problem and print the sup-norm error per (method, n).
    Solve(Common),
    /// Full convergence study with empirical orders.
    Study(Common),
    /// Divided-difference growth and residual-operator decay probes.
    Probes {
        #[command(flatten)]
        common: Common,
        /// Also run the random-function halving probe.
        #[arg(long)]
        halving: bool,
    },
    /// The rank-one example without superconvergence.
    Counterexample(Common),
    /// Re-emit a stored JSON study report as CSV.
    Report {
        /// JSON report written by `study`.
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    solution: Option<String>,
    #[arg(long)]
    r: Option<usize>,
    /// Comma-separated, e.g. 4,8,16.
    #[arg(long)]
    n_list: Option<String>,
    /// Comma-separated method names.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    quad_order: Option<usize>,
    /// Comma-separated node offsets in [0, 1], 2r + 1 of them.
    #[arg(long)]
    offsets: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Common {
    fn config(&self) -> Result<StudyConfig> {
        let mut cfg = match &self.config {
            Some(path) => StudyConfig::from_file(path)?,
            None => StudyConfig::default(),
        };
        let text = [
            ("kernel", self.kernel.clone()),
            ("solution", self.solution.clone()),
            ("r", self.r.map(|v| v.to_string())),
            ("n_list", self.n_list.clone()),
            ("methods", self.methods.clone()),
            ("quad_order", self.quad_order.map(|v| v.to_string())),
            ("offsets", self.offsets.clone()),
            ("seed", self.seed.map(|v| v.to_string())),
        ];
        for (key, value) in text {
            if let Some(v) = value {
                cfg.set(key, &v).with_context(|| format!("--{}", key.replace('_', "-")))?;
            }
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(cfg: &StudyConfig, body: String) -> Result<()> {
    match &cfg.out {
        Some(path) => report::write(path, &body),
        None => Ok(()),
    }
}

fn solve(cfg: &StudyConfig) -> Result<bool> {
    let phi = solution_by_name(&cfg.solution).context("unknown solution")?;
    let problem = manufactured_problem(cfg.kernel()?, phi.clone(), cfg.rule()?);
    let mut ok = true;
    for &n in &cfg.n_list {
        let grid = cfg.grid(n)?;
        for &m in &cfg.methods {
            match solvers::solve(&problem, &grid, m) {
                Ok(res) => println!(
                    "{m:<18} n={n:<4} sup_error={:.6e} condition={:.3e}",
                    sup_norm(&phi.sub(&res.solution), &grid),
                    res.condition
                ),
                Err(e) => {
                    ok = false;
                    println!("{m:<18} n={n:<4} failed: {e}");
                }
            }
        }
    }
    Ok(ok)
}

fn study(cfg: &StudyConfig) -> Result<bool> {
    let rep = run_study(cfg)?;
    for m in &rep.methods {
        for row in &m.rows {
            let err = row.sup_error.map_or_else(|| "failed".to_string(), |e| format!("{e:.6e}"));
            let eoc = row.eoc.map_or_else(String::new, |e| e.to_string());
            println!("{:<18} n={:<4} sup_error={err:<13} eoc={eoc}", m.method, row.n);
        }
        let slope = m.tail_slope.map_or_else(|| "floor".to_string(), |s| format!("{s:.3}"));
        println!(
            "{:<18} tail slope {slope} (target {}) {}",
            m.method,
            m.target_order,
            if m.pass { "PASS" } else { "FAIL" }
        );
    }
    emit(cfg, report::render(&rep, cfg.format)?)?;
    Ok(rep.pass())
}

fn probes(cfg: &StudyConfig, halving: bool) -> Result<bool> {
    let rep = run_scaling_probes(cfg, halving)?;
    for s in &rep.series {
        let values: Vec<String> = s.values.iter().map(|v| format!("{v:.3e}")).collect();
        let slope = s.slope.map_or_else(|| "floor".to_string(), |p| format!("{p:.3}"));
        println!(
            "{:<28} [{}] slope {slope} target {} {}",
            s.name,
            values.join(" "),
            s.target,
            if s.pass { "PASS" } else { "FAIL" }
        );
    }
    if let Some(h) = &rep.halving {
        println!(
            "halving probe values {:?} ratios {:?} {}",
            h.values,
            h.ratios,
            if h.pass { "PASS" } else { "FAIL" }
        );
    }
    if cfg.out.is_some() {
        anyhow::ensure!(cfg.format == Format::Json, "probe reports are written as JSON only");
        emit(cfg, report::to_json(&rep)?)?;
    }
    Ok(rep.pass())
}

fn counterexample(common: &Common, cfg: &StudyConfig) -> Result<bool> {
    let ns = if common.n_list.is_some() || common.config.is_some() {
        cfg.n_list.clone()
    } else {
        vec![4, 8, 16]
    };
    let rep = run_counterexample(&ns)?;
    for row in &rep.rows {
        println!(
            "n={:<4} ||(I-P)x||={:.12} ||K(I-P)x||={:.12} ratio={:.12} solver ratio={:.6} {}",
            row.n,
            row.interpolation_error,
            row.smoothed_error,
            row.ratio,
            row.solver_ratio,
            if row.pass { "PASS" } else { "FAIL" }
        );
    }
    if cfg.out.is_some() {
        anyhow::ensure!(cfg.format == Format::Json, "counterexample reports are written as JSON only");
        emit(cfg, report::to_json(&rep)?)?;
    }
    Ok(rep.pass)
}

fn run() -> Result<bool> {
    match Cli::parse().command {
        Command::Solve(c) => solve(&c.config()?),
        Command::Study(c) => study(&c.config()?),
        Command::Probes { common, halving } => probes(&common.config()?, halving),
        Command::Counterexample(c) => counterexample(&c, &c.config()?),
        Command::Report { input, out } => {
            let text = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let value: serde_json::Value = serde_json::from_str(&text).context("parsing report")?;
            let csv = report::study_csv(&value)?;
            match out {
                Some(path) => report::write(&path, &csv)?,
                None => print!("{csv}"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
