//! Run configuration: an optional TOML or JSON file overridden by flags.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{TreeSpec, DEFAULT_SIZE_CAP};
use crate::spectral::DEFAULT_RESIDUAL_TOL;

pub const DEFAULT_SEED: u64 = 20240611;

/// Contents of a config file. Every key is optional; `N`, `branching`,
/// `gamma0` and `gammaN` describe the tree.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub generations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branching: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma0: Option<f64>,
    #[serde(rename = "gammaN", default, skip_serializing_if = "Option::is_none")]
    pub gamma_n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size_cap: Option<usize>,
}

impl FileConfig {
    /// JSON when the extension is `.json`, TOML otherwise.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")))
    }

    pub fn parse(text: &str, json: bool) -> Result<Self> {
        if json {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
        }
    }

    /// The tree described by the file. A one-element `branching` is repeated
    /// `N` times.
    pub fn tree_spec(&self) -> Result<TreeSpec> {
        let mut branching = self
            .branching
            .clone()
            .ok_or_else(|| Error::Config("`branching` is required".into()))?;
        match self.generations {
            Some(n) if branching.len() == 1 && n > 1 => branching = vec![branching[0]; n],
            Some(n) if n != branching.len() => {
                return Err(Error::Config(format!(
                    "N = {n} but `branching` has {} entries",
                    branching.len()
                )))
            }
            _ => {}
        }
        let gamma0 = self
            .gamma0
            .ok_or_else(|| Error::Config("`gamma0` is required".into()))?;
        let gamma_n = self.gamma_n.unwrap_or(gamma0);
        TreeSpec::new(branching, gamma0, gamma_n).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tol_residual: Option<f64>,
    pub plot: Option<bool>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub config_path: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub tol_residual: f64,
    pub plot: bool,
    pub threads: Option<usize>,
    pub size_cap: usize,
    pub file: FileConfig,
}

impl RunConfig {
    pub fn resolve(subcommand: &str, config_path: Option<&Path>, flags: Overrides) -> Result<Self> {
        let file = match config_path {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let tol_residual = flags.tol_residual.or(file.tol_residual).unwrap_or(DEFAULT_RESIDUAL_TOL);
        if !(tol_residual > 0.0 && tol_residual.is_finite()) {
            return Err(Error::Config(format!(
                "tol-residual must be positive, got {tol_residual}"
            )));
        }
        if flags.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(Self {
            subcommand: subcommand.to_string(),
            config_path: config_path.map(Path::to_path_buf),
            out_dir: flags
                .out
                .or_else(|| file.out.clone())
                .unwrap_or_else(|| PathBuf::from("out")),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            tol_residual,
            plot: flags.plot.or(file.plot).unwrap_or(true),
            threads: flags.threads,
            size_cap: file.size_cap.unwrap_or(DEFAULT_SIZE_CAP),
            file,
        })
    }
}

/// Written as `manifest.json` next to every run's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a RunConfig,
    /// Subcommand arguments after defaults were applied.
    pub arguments: serde_json::Value,
    pub seed: u64,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
    pub passed: bool,
}

impl<'a> Manifest<'a> {
    pub fn new(config: &'a RunConfig, arguments: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config,
            arguments,
            seed: config.seed,
            outputs: Vec::new(),
            wall_time_s: 0.0,
            passed: true,
        }
    }

    pub fn write(&mut self, elapsed: Duration) -> Result<()> {
        self.wall_time_s = elapsed.as_secs_f64();
        let path = self.config.out_dir.join("manifest.json");
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}
