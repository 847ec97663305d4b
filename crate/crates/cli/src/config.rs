//! Layered settings: built-in defaults, then a preset, then a TOML file,
//! then command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::fail::CliError;

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub series: Option<String>,
    /// `name=value` pairs, e.g. `"a=2,b=1"`.
    pub params: Option<String>,
    pub n: Option<u64>,
    pub stages: Option<u64>,
    pub bound: Option<String>,
    pub epsilon: Option<f64>,
    pub mode: Option<String>,
    pub window: Option<usize>,
    pub mean_high: Option<f64>,
    pub mean_low: Option<f64>,
    pub chunk: Option<usize>,
    pub threads: Option<usize>,
    pub sequential: Option<bool>,
    pub mobius_table: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub bins: Option<usize>,
    pub rho: Option<String>,
    pub limit_mode: Option<String>,
    pub base: Option<String>,
    pub burn_in: Option<u64>,
    pub mass_floor: Option<f64>,
    pub grid: Option<String>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),* $(,)?) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Settings {
    /// Fields set in `top` win.
    pub fn overlay(mut self, top: &Settings) -> Settings {
        overlay!(self, top; series, params, n, stages, bound, epsilon, mode, window, mean_high,
            mean_low, chunk, threads, sequential, mobius_table, out, bins, rho, limit_mode, base,
            burn_in, mass_floor, grid);
        self
    }

    pub fn defaults() -> Settings {
        Settings {
            n: Some(10_000),
            stages: Some(1000),
            bins: Some(10),
            rho: Some("2".into()),
            limit_mode: Some("dp".into()),
            base: Some("uniform".into()),
            ..Settings::default()
        }
    }

    pub fn preset(name: &str) -> Result<Settings, CliError> {
        match name {
            "full-scale" => Ok(Settings {
                n: Some(1_000_000),
                stages: Some(100_000),
                ..Settings::default()
            }),
            "riemann" => Ok(Settings {
                series: Some("mobius_dirichlet".into()),
                n: Some(1_000_000),
                stages: Some(1000),
                ..Settings::default()
            }),
            "limits" => Ok(Settings {
                bins: Some(10),
                stages: Some(100_000),
                ..Settings::default()
            }),
            other => Err(CliError::usage(format!(
                "unknown preset '{other}' (expected full-scale, riemann or limits)"
            ))),
        }
    }

    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))
    }

    /// defaults < preset < file < flags.
    pub fn resolve(preset: Option<&str>, file: Option<&Path>, flags: &Settings) -> Result<Settings, CliError> {
        let mut s = Settings::defaults();
        if let Some(p) = preset {
            s = s.overlay(&Settings::preset(p)?);
        }
        if let Some(f) = file {
            s = s.overlay(&Settings::from_file(f)?);
        }
        Ok(s.overlay(flags))
    }
}
