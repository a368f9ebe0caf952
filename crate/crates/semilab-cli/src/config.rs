//! Run configuration: command-line flags merged over an optional JSON file.

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

/// Flags shared by every command. A `--config` file uses the same keys.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    /// Nonlinearity: `power:α`, `powersum:k:α,...`, `lichnerowicz:a:b:σ:c:τ` or JSON.
    #[arg(long = "f", global = true)]
    #[serde(default, deserialize_with = "text_or_json")]
    pub f: Option<String>,
    /// Space: `flat:n`, `appendix:N:α:K` or JSON.
    #[arg(long, global = true)]
    #[serde(default, deserialize_with = "text_or_json")]
    pub space: Option<String>,
    /// Effective dimension.
    #[arg(long = "N", global = true)]
    #[serde(rename = "N")]
    pub big_n: Option<f64>,
    /// Curvature lower bound `−K`; measured from the space when omitted.
    #[arg(long = "K", global = true)]
    #[serde(rename = "K")]
    pub k: Option<f64>,
    /// Inner ball radius.
    #[arg(long = "R", global = true)]
    #[serde(rename = "R")]
    pub big_r: Option<f64>,
    /// Theorem id such as `1.9` or `8`.
    #[arg(long, global = true)]
    pub theorem: Option<String>,
    /// Estimate kind for `verify`; the theorem's primary kind by default.
    #[arg(long, global = true)]
    pub kind: Option<String>,
    /// Exponent `α` (appendix family, weak-gradient hypothesis).
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Boundary value `u(2R)`.
    #[arg(long, global = true)]
    pub boundary: Option<f64>,
    /// Number of profiles in a boundary sweep.
    #[arg(long, global = true)]
    pub count: Option<usize>,
    /// Grid intervals on `[0, 2R]`.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Newton tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report destination; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV destination for plot data.
    #[arg(long, global = true)]
    pub emit_plot_data: Option<PathBuf>,
    /// JSON file with defaults for any of the flags above.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn text_or_json<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    let v = Option::<serde_json::Value>::deserialize(d)?;
    Ok(v.map(|v| match v {
        serde_json::Value::String(s) => s,
        other => other.to_string(),
    }))
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),*) => {
        $( if $dst.$field.is_none() { $dst.$field = $src.$field; } )*
    };
}

impl RunConfig {
    /// Fills unset flags from the `--config` file, if any.
    pub fn resolve(mut self) -> Result<Self, String> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let file: RunConfig =
            serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))?;
        overlay!(self, file; f, space, big_n, k, big_r, theorem, kind, alpha, boundary, count, grid, tol, seed, out, emit_plot_data);
        Ok(self)
    }

    /// The part of the configuration that determines the result.
    pub fn provenance(&self) -> Self {
        Self { out: None, emit_plot_data: None, config: None, ..self.clone() }
    }

    pub fn radius(&self) -> f64 {
        self.big_r.unwrap_or(1.0)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
