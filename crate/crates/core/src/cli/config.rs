use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::henon_map::generalized_dimension;
use crate::morse::{SymmetryMultiplicity, DEGENERACY_TOL};
use crate::radial_ode::{critical_exponent, IvpOptions};
use crate::spectral::{SpectralConfig, ORACLE_MAX_N};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    P,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub axis: SweepAxis,
    pub from: f64,
    pub to: f64,
    /// Number of equally spaced points including both ends; 0 gives an empty
    /// sweep.
    pub steps: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            axis: SweepAxis::P,
            from: 2.0,
            to: 4.9,
            steps: 8,
        }
    }
}

impl SweepSettings {
    pub fn points(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.from],
            s => (0..s)
                .map(|i| self.from + (self.to - self.from) * i as f64 / (s - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSettings {
    /// Geometric grid size of the dense oracle.
    pub n: usize,
    /// Inner cut-off radius.
    pub epsilon: f64,
    /// Relative agreement required beyond the combined error bars.
    pub tolerance: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            n: 4000,
            epsilon: 1e-12,
            tolerance: 1e-4,
        }
    }
}

/// Everything a run needs. Precedence: built-in defaults, then the JSON
/// file given by `--config`, then command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub n: u32,
    pub alpha: f64,
    pub p: f64,
    /// Nodal zones of the profile.
    pub m: usize,
    /// Requested eigenvalue count per spectrum.
    pub k: usize,
    /// Replace the linearized potential by `a ≡ 0`.
    pub zero_potential: bool,
    /// `full`, `trivial` or `cyclic-q`.
    pub symmetry: String,
    pub degeneracy_tol: f64,
    pub spectral: SpectralConfig,
    pub ivp: IvpOptions,
    pub oracle: OracleSettings,
    pub sweep: SweepSettings,
    pub out: PathBuf,
    /// Defaults to `<out>/cache`.
    pub cache: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 3,
            alpha: 0.0,
            p: 3.0,
            m: 2,
            k: 10,
            zero_potential: false,
            symmetry: "full".into(),
            degeneracy_tol: DEGENERACY_TOL,
            spectral: SpectralConfig::default(),
            ivp: IvpOptions::default(),
            oracle: OracleSettings::default(),
            sweep: SweepSettings::default(),
            out: PathBuf::from("out"),
            cache: None,
            workers: None,
        }
    }
}

fn field_error(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

impl RunConfig {
    /// Parse a JSON document; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            if path == "." {
                CliError::Config(e.inner().to_string())
            } else {
                field_error(&path, e.inner())
            }
        })
    }

    pub fn to_json(&self) -> String {
        crate::io::to_json_string(self).expect("config serializes")
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache.clone().unwrap_or_else(|| self.out.join("cache"))
    }

    pub fn symmetry(&self) -> Result<SymmetryMultiplicity, CliError> {
        SymmetryMultiplicity::parse(&self.symmetry).map_err(|e| field_error("symmetry", e))
    }

    /// Domain checks for every field the pipeline reads.
    pub fn validate(&self) -> Result<(), CliError> {
        let map = generalized_dimension(self.n, self.alpha).map_err(|e| {
            let field = if self.n < 2 { "N" } else { "alpha" };
            field_error(field, e)
        })?;
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(field_error("p", format!("{} must be finite and > 1", self.p)));
        }
        if !self.zero_potential && self.p >= critical_exponent(map.m) {
            return Err(field_error(
                "p",
                format!(
                    "{} is not below the critical exponent {} for M = {}",
                    self.p,
                    critical_exponent(map.m),
                    map.m
                ),
            ));
        }
        if self.m == 0 {
            return Err(field_error("m", "must be >= 1"));
        }
        if self.k == 0 {
            return Err(field_error("k", "must be >= 1"));
        }
        if !(self.degeneracy_tol >= 0.0) {
            return Err(field_error("degeneracy_tol", "must be >= 0"));
        }
        self.symmetry()?;
        self.spectral.check().map_err(|e| field_error("spectral", e))?;
        self.ivp.check().map_err(|e| field_error("ivp", e))?;
        let o = &self.oracle;
        if o.n > ORACLE_MAX_N {
            return Err(field_error(
                "oracle.n",
                format!("{} exceeds the guard {ORACLE_MAX_N}", o.n),
            ));
        }
        if o.n < 32 || !o.n.is_multiple_of(4) {
            return Err(field_error(
                "oracle.n",
                format!("{} must be a multiple of 4 and >= 32", o.n),
            ));
        }
        if !(o.epsilon > 0.0 && o.epsilon < 1.0) {
            return Err(field_error(
                "oracle.epsilon",
                format!("{} must lie in (0, 1)", o.epsilon),
            ));
        }
        if !(o.tolerance > 0.0) {
            return Err(field_error("oracle.tolerance", "must be positive"));
        }
        let s = &self.sweep;
        if !s.from.is_finite() || !s.to.is_finite() {
            return Err(field_error("sweep", "range must be finite"));
        }
        if self.workers == Some(0) {
            return Err(field_error("workers", "must be >= 1"));
        }
        Ok(())
    }
}
