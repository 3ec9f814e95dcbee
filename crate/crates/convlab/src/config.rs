//! Study configuration and its plain-text `key = value` file format.
//!
//! ```text
//! # comment
//! kernel = bvp_green
//! solution = sin_pi
//! r = 1
//! n_list = 4, 8, 16, 32, 64
//! methods = collocation, iterated, modified, iterated_modified
//! quad_order = 20
//! offsets = 0, 0.5, 1
//! seed = 7
//! out = study.json
//! format = json
//! ```

use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use fredholm_core::kernel::kernel_by_name;
use fredholm_core::{CollocationGrid, GaussRule, GreensKernel, Method, UniformMesh};
use serde::{Serialize, Serializer};

use crate::catalog::solution_by_name;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => bail!("unknown format '{s}' (expected csv or json)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub kernel: String,
    pub solution: String,
    pub r: usize,
    pub n_list: Vec<usize>,
    #[serde(serialize_with = "method_names")]
    pub methods: Vec<Method>,
    pub quad_order: usize,
    /// Node offsets in `[0, 1]`; `None` selects the default family.
    pub offsets: Option<Vec<f64>>,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
}

fn method_names<S: Serializer>(methods: &[Method], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(methods.iter().map(|m| m.name()))
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            kernel: "bvp_green".into(),
            solution: "sin_pi".into(),
            r: 1,
            n_list: vec![4, 8, 16, 32, 64],
            methods: Method::ALL.to_vec(),
            quad_order: 20,
            offsets: None,
            seed: 7,
            out: None,
            format: Format::Json,
        }
    }
}

fn list<T: FromStr>(value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<T>().map_err(|e| anyhow::anyhow!("'{v}': {e}")))
        .collect()
}

impl StudyConfig {
    /// Reads a config file on top of the defaults.
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected key = value", lineno + 1))?;
            cfg.set(key.trim(), value.trim())
                .with_context(|| format!("line {}", lineno + 1))?;
        }
        Ok(cfg)
    }

    /// Sets one field from its textual form; shared by the file reader and
    /// command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "kernel" => self.kernel = value.to_string(),
            "solution" => self.solution = value.to_string(),
            "r" => self.r = value.parse().context("r")?,
            "n_list" => self.n_list = list(value)?,
            "methods" => self.methods = list(value)?,
            "quad_order" => self.quad_order = value.parse().context("quad_order")?,
            "offsets" => self.offsets = Some(list(value)?),
            "seed" => self.seed = value.parse().context("seed")?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            _ => bail!("unknown key '{key}'"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.n_list.is_empty(), "n_list is empty");
        ensure!(self.n_list[0] >= 1, "n must be positive");
        for w in self.n_list.windows(2) {
            ensure!(
                w[1] > w[0] && w[1] % w[0] == 0,
                "n_list must increase with each entry a multiple of the previous ({} -> {})",
                w[0],
                w[1]
            );
        }
        ensure!(self.r <= 3, "r = {} exceeds 3", self.r);
        ensure!((5..=64).contains(&self.quad_order), "quad_order {} outside [5, 64]", self.quad_order);
        ensure!(!self.methods.is_empty(), "no methods selected");
        kernel_by_name(&self.kernel)?;
        ensure!(solution_by_name(&self.solution).is_some(), "unknown solution '{}'", self.solution);
        if let Some(off) = &self.offsets {
            CollocationGrid::new(UniformMesh::new(1)?, self.r, Some(off.clone()))?;
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<Arc<GreensKernel>> {
        Ok(Arc::new(kernel_by_name(&self.kernel)?))
    }

    pub fn rule(&self) -> Result<Arc<GaussRule>> {
        Ok(Arc::new(GaussRule::new(self.quad_order)?))
    }

    pub fn grid(&self, n: usize) -> Result<Arc<CollocationGrid>> {
        Ok(Arc::new(CollocationGrid::new(UniformMesh::new(n)?, self.r, self.offsets.clone())?))
    }
}
