//! Standard (weight `r^{M-1}`) and singular (weight `r^{M-3}`) radial
//! eigenproblems
//!
//! ```text
//!     -(r^{M-1} ψ')' - r^{M-1} a(r) ψ = ν w(r) ψ,   ψ(1) = 0,
//! ```
//!
//! solved by Sturm bisection on three nested grids with Richardson
//! extrapolation. The singular problem goes through the exact Liouville
//! transform `x = -ln r`, `u = r^{(M-2)/2} ψ`. A dense geometric-grid solver
//! serves as an independent oracle.

mod analysis;
mod oracle;
mod singular;
mod standard;
mod tridiag;

#[cfg(test)]
mod tests;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::radial_ode::{RadialProfile, Variable};

pub use analysis::{
    count_interior_nodes, default_decay_window, fit_decay_exponent, inequality_report, picone_residual,
    rayleigh_quotient, weighted_inner_product, weighted_integrals, DecayFit, InequalityReport,
    SampledFunction, WeightedIntegrals,
};
pub use oracle::{dense_oracle_spectrum, ORACLE_MAX_N};
pub use singular::{liouville_transform, solve_singular_spectrum, LiouvilleProblem};
pub use standard::solve_standard_spectrum;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("potential is not finite at r = {r:e}")]
    PotentialNotFinite { r: f64 },
    #[error(
        "grid too coarse: eigenvalue {index} = {value} has Richardson disagreement {error_bar:e} above tolerance"
    )]
    GridTooCoarse {
        index: usize,
        value: f64,
        error_bar: f64,
    },
    #[error("near-threshold eigenvalues {values:?}: attainment uncertain")]
    NearThreshold { values: Vec<f64> },
    #[error("eigenvalues {index} and {next} are numerically degenerate (gap {gap:e})")]
    NearDegenerate { index: usize, next: usize, gap: f64 },
    #[error("dense oracle size n = {n} exceeds the limit {limit}")]
    SizeGuard { n: usize, limit: usize },
    #[error("eigenpairs come from different discretizations")]
    DifferentProblems,
    #[error("decay window [{lo:e}, {hi:e}] contains a node or is empty")]
    BadWindow { lo: f64, hi: f64 },
    #[error("zero denominator in Rayleigh quotient")]
    ZeroDenominator,
    #[error("eigensolver failure: {0}")]
    Solver(String),
}

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Potential `a(r)` on `(0, 1]`.
#[derive(Clone)]
pub enum Potential {
    Zero,
    Constant(f64),
    Function { label: String, f: RadialFn },
}

impl Potential {
    pub fn function<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Potential::Function {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    /// Linearized potential of a power profile: `a(t) = c p |v(t)|^{p-1}`
    /// for Emden profiles and `a(r) = r^α p |u(r)|^{p-1}` for physical ones.
    pub fn linearized(profile: Arc<RadialProfile>) -> Self {
        let nl = profile.nonlinearity.clone();
        match profile.variable {
            Variable::Emden => {
                let c = profile.coupling;
                Potential::function("linearized(t)", move |t| c * nl.derivative(profile.value(t)))
            }
            Variable::Physical => {
                let alpha = profile.alpha;
                Potential::function("linearized(r)", move |r| {
                    let w = if alpha == 0.0 { 1.0 } else { r.powf(alpha) };
                    w * nl.derivative(profile.value(r))
                })
            }
        }
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Constant(c) => *c,
            Potential::Function { f, .. } => f(r),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Potential::Zero)
    }

    /// Sampled bounds `(sup |a|, sup r²|a|)` on `(0, 1]`.
    pub(crate) fn bounds(&self) -> Result<(f64, f64), SpectralError> {
        match self {
            Potential::Zero => Ok((0.0, 0.0)),
            Potential::Constant(c) => Ok((c.abs(), c.abs())),
            Potential::Function { .. } => {
                let mut sup = 0.0f64;
                let mut sup_r2 = 0.0f64;
                let uniform = (0..=4096).map(|i| i as f64 / 4096.0);
                let geometric = (0..=400).map(|i| 10f64.powf(-12.0 + 12.0 * i as f64 / 400.0));
                for r in uniform.chain(geometric).filter(|&r| r > 0.0) {
                    let a = self.eval(r);
                    if !a.is_finite() {
                        return Err(SpectralError::PotentialNotFinite { r });
                    }
                    sup = sup.max(a.abs());
                    sup_r2 = sup_r2.max(r * r * a.abs());
                }
                Ok((sup, sup_r2))
            }
        }
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Zero => f.write_str("Zero"),
            Potential::Constant(c) => write!(f, "Constant({c})"),
            Potential::Function { label, .. } => write!(f, "Function({label})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// Eigenvalue weight `r^{M-1}`.
    Standard,
    /// Eigenvalue weight `r^{M-3}`.
    Singular,
}

/// `-(r^{M-1}ψ')' - r^{M-1} a ψ = ν w ψ` on `(0, 1)`, Dirichlet at `r = 1`,
/// regularity at `r = 0`.
#[derive(Debug, Clone)]
pub struct WeightedSLProblem {
    pub dim: f64,
    pub potential: Potential,
    pub kind: WeightKind,
}

impl WeightedSLProblem {
    pub fn new(dim: f64, potential: Potential, kind: WeightKind) -> Self {
        Self { dim, potential, kind }
    }

    /// `((M-2)/2)²` for the singular kind, `+∞` for the standard kind.
    pub fn threshold(&self) -> f64 {
        match self.kind {
            WeightKind::Singular => hardy_threshold(self.dim),
            WeightKind::Standard => f64::INFINITY,
        }
    }

    pub(crate) fn check(&self, kind: WeightKind) -> Result<(), SpectralError> {
        if self.kind != kind {
            return Err(SpectralError::InvalidInput(format!(
                "expected a {kind:?} problem, got {:?}",
                self.kind
            )));
        }
        if !(self.dim >= 2.0) || !self.dim.is_finite() {
            return Err(SpectralError::InvalidInput(format!(
                "M = {} must be >= 2",
                self.dim
            )));
        }
        Ok(())
    }
}

pub fn hardy_threshold(dim: f64) -> f64 {
    let a = (dim - 2.0) / 2.0;
    a * a
}

/// `θ(ν̂) = (2 − M + √((M−2)² − 4ν̂))/2`.
pub fn decay_exponent(dim: f64, nu_hat: f64) -> f64 {
    let a = (dim - 2.0) / 2.0;
    (a * a - nu_hat).sqrt() - a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    /// Minimum number of fine-grid intervals.
    pub grid: usize,
    /// Upper bound on the grid size after resolution-driven refinement.
    pub max_grid: usize,
    /// Target `h·ω` (grid spacing times the largest local wavenumber).
    pub resolution: f64,
    /// Cap on the Liouville domain length.
    pub x_max: f64,
    /// Relative Richardson disagreement tolerated before `GridTooCoarse`.
    pub tol: f64,
    /// Eigenvalues within `margin` of the threshold are flagged.
    pub margin: f64,
    /// `|ν| < zero_tol` counts as numerically zero.
    pub zero_tol: f64,
    /// Sign changes below `node_tol · sup|ψ|` are ignored.
    pub node_tol: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            grid: 4096,
            max_grid: 1 << 20,
            resolution: 0.05,
            x_max: 60.0,
            tol: 1e-6,
            margin: 1e-6,
            zero_tol: 1e-7,
            node_tol: 1e-8,
        }
    }
}

impl SpectralConfig {
    pub(crate) fn check(&self) -> Result<(), SpectralError> {
        if self.grid < 16 || self.grid > self.max_grid {
            return Err(SpectralError::InvalidInput(format!(
                "grid = {} must be in [16, max_grid = {}]",
                self.grid, self.max_grid
            )));
        }
        for (name, v) in [
            ("resolution", self.resolution),
            ("x_max", self.x_max),
            ("tol", self.tol),
            ("margin", self.margin),
            ("zero_tol", self.zero_tol),
            ("node_tol", self.node_tol),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SpectralError::InvalidInput(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        Ok(())
    }

    /// Fine-grid size: a power of two `≥ grid` resolving wavenumber `omega`
    /// over a domain of length `len`.
    pub(crate) fn fine_grid(&self, len: f64, omega: f64) -> usize {
        let needed = (len * omega / self.resolution).ceil() as usize;
        needed
            .max(self.grid)
            .next_power_of_two()
            .min(self.max_grid.next_power_of_two())
    }
}

/// Discrete generalized problem `K v = ν W v` (K symmetric tridiagonal, W
/// diagonal) behind a set of eigenpairs.
#[derive(Debug)]
pub struct DiscreteOperator {
    pub(crate) diag: Vec<f64>,
    pub(crate) off: Vec<f64>,
    pub(crate) mass: Vec<f64>,
    /// Radius of each unknown.
    pub(crate) r: Vec<f64>,
}

impl DiscreteOperator {
    pub(crate) fn scaled(&self) -> tridiag::SymTridiag {
        let s: Vec<f64> = self.mass.iter().map(|w| w.sqrt()).collect();
        tridiag::SymTridiag {
            diag: self.diag.iter().zip(&self.mass).map(|(d, w)| d / w).collect(),
            off: self
                .off
                .iter()
                .enumerate()
                .map(|(i, e)| e / (s[i] * s[i + 1]))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }
}

/// One eigenvalue with its eigenfunction.
#[derive(Debug, Clone)]
pub struct EigenPair {
    /// 1-based position in the spectrum.
    pub index: usize,
    /// Richardson-extrapolated eigenvalue.
    pub value: f64,
    pub error_bar: f64,
    /// Eigenvalue of the finest discrete problem.
    pub grid_value: f64,
    /// Sample radii, increasing, ending at `r = 1`.
    pub r: Vec<f64>,
    /// `ψ(r)` normalized to unit weighted L² norm.
    pub samples: Vec<f64>,
    pub interior_nodes: usize,
    pub decay_exponent: Option<f64>,
    pub theta_analytic: Option<f64>,
    /// `ψ'(1)`.
    pub boundary_slope: f64,
    pub kind: WeightKind,
    pub dim: f64,
    pub(crate) operator: Arc<DiscreteOperator>,
    /// Eigenvector in the operator's unknowns, `Σ W v² = 1`.
    pub(crate) vector: Vec<f64>,
}

impl EigenPair {
    pub fn as_sampled(&self) -> SampledFunction {
        SampledFunction {
            r: self.r.clone(),
            values: self.samples.clone(),
        }
    }
}

/// An ordered set of eigenpairs below a level.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub kind: WeightKind,
    pub dim: f64,
    pub threshold: f64,
    pub pairs: Vec<EigenPair>,
    /// No eigenvalues beyond those in `pairs` lie below this level.
    pub exhausted_below: f64,
    /// Eigenvalues in `[threshold − margin, threshold)`.
    pub near_threshold: Vec<f64>,
    /// Liouville domain length (singular kind).
    pub x_max: Option<f64>,
    /// Fine-grid interval count.
    pub grid_intervals: usize,
}

impl Spectrum {
    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    /// Eigenvalues below `-zero_tol`.
    pub fn negative_count(&self, zero_tol: f64) -> usize {
        self.pairs.iter().filter(|p| p.value < -zero_tol).count()
    }

    pub fn summary(&self) -> SpectrumSummary {
        SpectrumSummary {
            kind: self.kind,
            dim: self.dim,
            threshold: self.threshold.is_finite().then_some(self.threshold),
            eigenvalues: self
                .pairs
                .iter()
                .map(|p| EigenSummary {
                    value: p.value,
                    error_bar: p.error_bar,
                    nodes: p.interior_nodes,
                    theta_fit: p.decay_exponent,
                    theta_analytic: p.theta_analytic,
                })
                .collect(),
            exhausted_below: self.exhausted_below.is_finite().then_some(self.exhausted_below),
            near_threshold: self.near_threshold.clone(),
            x_max: self.x_max,
            grid_intervals: self.grid_intervals,
        }
    }

    /// Eigenfunctions as CSV (`r, psi_1, psi_2, …`) on the common grid.
    pub fn eigenfunctions_csv(&self) -> String {
        let Some(first) = self.pairs.first() else {
            return "r\n".to_string();
        };
        let mut header = vec!["r".to_string()];
        header.extend((1..=self.pairs.len()).map(|i| format!("psi_{i}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = (0..first.r.len()).map(|k| {
            let mut row = vec![first.r[k]];
            row.extend(self.pairs.iter().map(|p| p.samples[k]));
            row
        });
        crate::io::csv_string(&header, rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSummary {
    pub value: f64,
    pub error_bar: f64,
    pub nodes: usize,
    pub theta_fit: Option<f64>,
    pub theta_analytic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub kind: WeightKind,
    #[serde(rename = "M")]
    pub dim: f64,
    /// `None` for the standard kind.
    pub threshold: Option<f64>,
    pub eigenvalues: Vec<EigenSummary>,
    /// `None` when nothing was requested.
    pub exhausted_below: Option<f64>,
    pub near_threshold: Vec<f64>,
    pub x_max: Option<f64>,
    pub grid_intervals: usize,
}

/// Richardson extrapolation over three nested grids with ratio 2. The two
/// extrapolants differ by `15 C h⁴` when the residual error is `C h⁴`, which
/// gives the error estimate of the finer one.
pub(crate) fn richardson(fine: f64, mid: f64, coarse: f64) -> (f64, f64) {
    let e1 = (4.0 * fine - mid) / 3.0;
    let e2 = (4.0 * mid - coarse) / 3.0;
    (e1, (e1 - e2).abs() / 15.0)
}

/// Extrapolated eigenvalues of three nested operators, checked against
/// `tol` and for simplicity.
pub(crate) fn extrapolate(
    grids: [&tridiag::SymTridiag; 3],
    count: usize,
    cfg: &SpectralConfig,
) -> Result<Vec<(f64, f64, f64)>, SpectralError> {
    let fine: Vec<f64> = (0..count).map(|i| grids[0].kth_eigenvalue(i)).collect();
    for i in 1..fine.len() {
        let gap = fine[i] - fine[i - 1];
        let scale = fine[i].abs().max(fine[i - 1].abs()).max(1.0);
        if gap <= 1e3 * f64::EPSILON * scale {
            return Err(SpectralError::NearDegenerate {
                index: i,
                next: i + 1,
                gap,
            });
        }
    }
    let mut out = Vec::with_capacity(count);
    for (i, &f) in fine.iter().enumerate() {
        let m = grids[1].kth_eigenvalue(i);
        let c = grids[2].kth_eigenvalue(i);
        let (value, bar) = richardson(f, m, c);
        if bar > cfg.tol * value.abs().max(1.0) {
            return Err(SpectralError::GridTooCoarse {
                index: i + 1,
                value,
                error_bar: bar,
            });
        }
        out.push((value, bar, f));
    }
    Ok(out)
}

/// Eigenpair construction shared by the solvers: inverse iteration on the
/// scaled operator, normalization, sign and node count.
/// Eigenvector to `(r, ψ(r), ψ'(1))`.
pub(crate) type SamplesOf = dyn Fn(&[f64]) -> (Vec<f64>, Vec<f64>, f64);

pub(crate) fn build_pairs(
    op: Arc<DiscreteOperator>,
    values: &[(f64, f64, f64)],
    kind: WeightKind,
    dim: f64,
    cfg: &SpectralConfig,
    samples_of: &SamplesOf,
) -> Vec<EigenPair> {
    let scaled = op.scaled();
    let sqrt_w: Vec<f64> = op.mass.iter().map(|w| w.sqrt()).collect();
    values
        .iter()
        .enumerate()
        .map(|(i, &(value, error_bar, grid_value))| {
            let y = scaled.inverse_iteration(grid_value);
            let mut v: Vec<f64> = y.iter().zip(&sqrt_w).map(|(a, s)| a / s).collect();
            let norm: f64 = v.iter().zip(&op.mass).map(|(a, w)| w * a * a).sum::<f64>().sqrt();
            v.iter_mut().for_each(|a| *a /= norm);
            let (r, mut samples, mut slope) = samples_of(&v);
            // positive near the origin
            let sup = samples.iter().fold(0.0f64, |a, s| a.max(s.abs()));
            let sign = samples
                .iter()
                .find(|s| s.abs() > 1e-3 * sup)
                .map_or(1.0, |s| s.signum());
            if sign < 0.0 {
                v.iter_mut().for_each(|a| *a = -*a);
                samples.iter_mut().for_each(|a| *a = -*a);
                slope = -slope;
            }
            let mut pair = EigenPair {
                index: i + 1,
                value,
                error_bar,
                grid_value,
                r,
                samples,
                interior_nodes: 0,
                decay_exponent: None,
                theta_analytic: None,
                boundary_slope: slope,
                kind,
                dim,
                operator: op.clone(),
                vector: v,
            };
            pair.interior_nodes = analysis::count_nodes(&pair.r, &pair.samples, kind, dim, cfg.node_tol);
            pair
        })
        .collect()
}
