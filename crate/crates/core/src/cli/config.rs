//! Flat run configuration shared by flags and TOML config files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable naming the directory for relative output paths.
pub const OUT_DIR_ENV: &str = "DYADIC_OUT_DIR";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Every value a run can take from a config file or a flag. Keys mirror the
/// long flag names; flags win over the file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub f: Option<f64>,
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[serde(rename = "F")]
    pub big_f: Option<f64>,
    pub beta: Option<f64>,
    pub tau: Option<f64>,
    pub z: Option<f64>,
    pub k: Option<usize>,
    pub j: Option<usize>,
    pub depth: Option<u32>,
    pub min_depth: Option<u32>,
    pub max_depth: Option<u32>,
    /// `"auto"` or a rank.
    pub rank: Option<String>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub betas: Option<Vec<f64>>,
    /// `binary`, `triadic`, `random` or `mixed`.
    pub tree: Option<String>,
    pub laws: Option<Vec<String>>,
    /// `p:q` pairs.
    pub pq: Option<Vec<String>>,
    pub inequalities: Option<Vec<String>>,
    pub ks: Option<Vec<usize>>,
    pub alphas: Option<Vec<f64>>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub summary_csv: Option<PathBuf>,
    pub tol: Option<f64>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident, $($field:ident),*) => {
        RunConfig { $($field: $top.$field.or($base.$field)),* }
    };
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Values from `top` where present, otherwise from `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        let base = self;
        overlay_fields!(
            base,
            top,
            p,
            q,
            f,
            a,
            big_f,
            beta,
            tau,
            z,
            k,
            j,
            depth,
            min_depth,
            max_depth,
            rank,
            seed,
            samples,
            betas,
            tree,
            laws,
            pq,
            inequalities,
            ks,
            alphas,
            format,
            out,
            svg,
            summary_csv,
            tol
        )
    }

    /// The value of a required numeric parameter, or a usage error naming
    /// its flag.
    pub fn require<T: Copy>(value: Option<T>, flag: &str) -> Result<T> {
        value.ok_or_else(|| Error::argument(format!("missing required parameter --{flag}")))
    }

    pub fn format(&self) -> OutputFormat {
        self.format.unwrap_or_default()
    }
}

/// Resolves a relative output path against `DYADIC_OUT_DIR` when it is set.
pub fn resolve_out_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Parses `p:q`.
pub fn parse_pq(s: &str) -> Result<(f64, f64)> {
    let bad = || Error::argument(format!("expected p:q, got '{s}'"));
    let (p, q) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        p.trim().parse().map_err(|_| bad())?,
        q.trim().parse().map_err(|_| bad())?,
    ))
}
