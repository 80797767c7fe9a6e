//! Nodal radial solutions of the generalized Lane–Emden equation
//!
//! ```text
//!     -(t^{M-1} v')' = c t^{M-1} f(v),   v'(0) = 0,
//! ```
//!
//! integrated as an initial-value problem from `t = 0`, plus the pullback of
//! power-case profiles to the physical Hénon variable `r`.

mod dopri;
mod ivp;
mod profile;
mod shooting;
mod validate;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ivp::{integrate_emden_ivp, EmdenOde, Trajectory};
pub use profile::{henon_profile, pull_back, solve_nodal_power, ProfileMetadata, RadialProfile, Variable};
pub use shooting::{find_shooting_bracket, solve_nodal_shooting};
pub use validate::{auxiliary_z, validate_profile, AuxiliaryZ, QualitativeReport};

/// Errors raised by the radial ODE machinery.
#[derive(Debug, Error)]
pub enum OdeError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("step size underflow at t = {t:e} (stiff or blow-up region)")]
    StepUnderflow { t: f64 },
    #[error("non-finite nonlinearity value at t = {t:e}")]
    NonFinite { t: f64 },
    #[error("step budget of {0} steps exhausted")]
    TooManySteps(usize),
    #[error("only {found} of {wanted} zeros found before t_max = {t_max:e}")]
    ZeroNotFound { found: usize, wanted: usize, t_max: f64 },
    #[error("shooting bracket [{lo}, {hi}] does not straddle the target zero count ({detail})")]
    BadBracket { lo: f64, hi: f64, detail: String },
    #[error(
        "zero count not monotone in v(0): v(0) = {d} gives {count} zeros, outside [{lo_count}, {hi_count}]"
    )]
    NonMonotone {
        d: f64,
        count: usize,
        lo_count: usize,
        hi_count: usize,
    },
    #[error("operation needs a power nonlinearity")]
    NotPower,
    #[error("operation needs a profile in the Emden variable t")]
    NotEmdenVariable,
    #[error("malformed profile data: {0}")]
    Malformed(String),
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied nonlinearity with its derivative.
#[derive(Clone)]
pub struct CustomNonlinearity {
    pub label: String,
    pub odd: bool,
    f: RealFn,
    f_prime: RealFn,
}

impl CustomNonlinearity {
    pub fn new<F, G>(label: impl Into<String>, f: F, f_prime: G, odd: bool) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            odd,
            f: Arc::new(f),
            f_prime: Arc::new(f_prime),
        }
    }
}

/// The nonlinearity `f` in `-Δu = f(u)`.
#[derive(Clone)]
pub enum Nonlinearity {
    /// `f(u) = |u|^{p-1} u`
    Power {
        p: f64,
    },
    Custom(CustomNonlinearity),
}

impl Nonlinearity {
    pub fn power(p: f64) -> Self {
        Nonlinearity::Power { p }
    }

    pub fn custom<F, G>(label: impl Into<String>, f: F, f_prime: G, odd: bool) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Nonlinearity::Custom(CustomNonlinearity::new(label, f, f_prime, odd))
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Nonlinearity::Power { p } => u.abs().powf(p - 1.0) * u,
            Nonlinearity::Custom(c) => (c.f)(u),
        }
    }

    #[inline]
    pub fn derivative(&self, u: f64) -> f64 {
        match self {
            Nonlinearity::Power { p } => p * u.abs().powf(p - 1.0),
            Nonlinearity::Custom(c) => (c.f_prime)(u),
        }
    }

    pub fn is_odd(&self) -> bool {
        match self {
            Nonlinearity::Power { .. } => true,
            Nonlinearity::Custom(c) => c.odd,
        }
    }

    /// Exponent `p` of a power nonlinearity.
    pub fn exponent(&self) -> Option<f64> {
        match self {
            Nonlinearity::Power { p } => Some(*p),
            Nonlinearity::Custom(_) => None,
        }
    }

    /// Short tag used in metadata files.
    pub fn tag(&self) -> String {
        match self {
            Nonlinearity::Power { p } => format!("power(p={p})"),
            Nonlinearity::Custom(c) => format!("custom({})", c.label),
        }
    }
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

/// Serialized form of a [`Nonlinearity`]. Custom nonlinearities keep their
/// label but cannot be rebuilt from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearitySpec {
    Power { p: f64 },
    Custom { label: String, odd: bool },
}

impl From<&Nonlinearity> for NonlinearitySpec {
    fn from(nl: &Nonlinearity) -> Self {
        match nl {
            Nonlinearity::Power { p } => NonlinearitySpec::Power { p: *p },
            Nonlinearity::Custom(c) => NonlinearitySpec::Custom {
                label: c.label.clone(),
                odd: c.odd,
            },
        }
    }
}

/// Integrator tolerances and budgets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IvpOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Residual target `|v| < zero_tol` for refined zeros.
    pub zero_tol: f64,
    /// Largest allowed step; `None` means unlimited.
    pub h_max: Option<f64>,
    /// Search horizon for the m-th zero of the unscaled power IVP.
    pub t_max: f64,
    pub max_steps: usize,
}

impl Default for IvpOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            zero_tol: 1e-12,
            h_max: None,
            t_max: 1e7,
            max_steps: 5_000_000,
        }
    }
}

impl IvpOptions {
    pub(crate) fn check(&self) -> Result<(), OdeError> {
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.zero_tol > 0.0) {
            return Err(OdeError::InvalidInput("tolerances must be positive".into()));
        }
        if self.h_max.is_some_and(|h| !(h > 0.0)) {
            return Err(OdeError::InvalidInput("h_max must be positive".into()));
        }
        Ok(())
    }
}

/// Critical exponent `(M+2)/(M-2)` for `M > 2`, infinite for `M = 2`.
pub fn critical_exponent(dim: f64) -> f64 {
    if dim > 2.0 {
        (dim + 2.0) / (dim - 2.0)
    } else {
        f64::INFINITY
    }
}
