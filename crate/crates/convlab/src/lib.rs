//! Convergence studies, scaling probes and reports built on `fredholm_core`.

pub mod catalog;
pub mod config;
pub mod counterexample;
pub mod eoc;
pub mod probes;
pub mod report;
pub mod study;
