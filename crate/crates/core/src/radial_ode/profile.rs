use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ivp::{integrate_emden_ivp, EmdenOde, Trajectory};
use super::{critical_exponent, IvpOptions, Nonlinearity, NonlinearitySpec, OdeError};
use crate::henon_map::{generalized_dimension, DimensionMap};
use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    /// Emden variable `t` of the M-dimensional problem.
    Emden,
    /// Physical radius `r` of the N-dimensional Hénon problem.
    Physical,
}

/// Exact pullback `u(r) = A v(r^κ)` of an Emden profile.
#[derive(Debug, Clone)]
struct Pullback {
    kappa: f64,
    amplitude: f64,
    emden: Arc<RadialProfile>,
}

/// A nodal radial solution sampled on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub variable: Variable,
    /// Generalized dimension `M` (for physical profiles, `N`).
    pub dim: f64,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivative: Vec<f64>,
    /// Zeros `t_1 < … < t_m = 1`.
    pub zeros: Vec<f64>,
    pub critical_points: Vec<f64>,
    /// `𝓜_i = max |v|` on the i-th nodal zone.
    pub extremal_values: Vec<f64>,
    pub nodal_zones: usize,
    pub nonlinearity: Nonlinearity,
    pub coupling: f64,
    /// Hénon weight exponent (0 for Emden profiles).
    pub alpha: f64,
    pub tolerances: IvpOptions,
    /// Set when `M > 2` and `p ≥ (M+2)/(M−2)`.
    pub supercritical: bool,
    /// `m`-th zero of the unscaled IVP (power case) or `v(0)` (shooting).
    pub scale: f64,
    pullback: Option<Pullback>,
}

impl RadialProfile {
    #[allow(clippy::too_many_arguments)]
    fn from_trajectory(
        traj: &Trajectory,
        time_scale: f64,
        amplitude: f64,
        slope_scale: f64,
        m: usize,
        dim: f64,
        nonlinearity: &Nonlinearity,
        coupling: f64,
        tolerances: IvpOptions,
        scale: f64,
    ) -> Self {
        let mut grid: Vec<f64> = traj.t.iter().map(|t| t / time_scale).collect();
        let values: Vec<f64> = traj.v.iter().map(|v| amplitude * v).collect();
        let derivative: Vec<f64> = traj.dv.iter().map(|d| slope_scale * d).collect();
        let mut zeros: Vec<f64> = traj.zeros[..m].iter().map(|z| z / time_scale).collect();
        *grid.last_mut().unwrap() = 1.0;
        *zeros.last_mut().unwrap() = 1.0;
        let critical_points: Vec<f64> = traj
            .critical_points
            .iter()
            .map(|s| s / time_scale)
            .filter(|&s| s < 1.0)
            .collect();
        let mut prof = Self {
            variable: Variable::Emden,
            dim,
            grid,
            values,
            derivative,
            zeros,
            critical_points,
            extremal_values: Vec::new(),
            nodal_zones: m,
            nonlinearity: nonlinearity.clone(),
            coupling,
            alpha: 0.0,
            tolerances,
            supercritical: nonlinearity
                .exponent()
                .is_some_and(|p| dim > 2.0 && p >= critical_exponent(dim)),
            scale,
            pullback: None,
        };
        prof.extremal_values = prof.compute_extremal_values();
        prof
    }

    fn compute_extremal_values(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nodal_zones];
        let mut zone = 0;
        for (&t, &v) in self.grid.iter().zip(&self.values) {
            while zone < self.nodal_zones - 1 && t > self.zeros[zone] {
                zone += 1;
            }
            out[zone] = f64::max(out[zone], v.abs());
        }
        out
    }

    /// Value and derivative at `x ∈ [0, 1]` by cubic Hermite interpolation
    /// (exact pullback for physical profiles built by [`henon_profile`]).
    pub fn eval(&self, x: f64) -> (f64, f64) {
        if let Some(pb) = &self.pullback {
            let t = x.powf(pb.kappa);
            let (v, dv) = pb.emden.eval(t);
            let dt = if x > 0.0 { pb.kappa * t / x } else { 0.0 };
            return (pb.amplitude * v, pb.amplitude * dv * dt);
        }
        hermite(&self.grid, &self.values, &self.derivative, x)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    /// Sup norm over the samples.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// The Emden-variable profile behind a physical profile.
    pub fn emden_source(&self) -> Option<&RadialProfile> {
        self.pullback.as_ref().map(|p| p.emden.as_ref())
    }

    pub fn metadata(&self) -> ProfileMetadata {
        ProfileMetadata {
            variable: self.variable,
            dim: self.dim,
            nonlinearity: NonlinearitySpec::from(&self.nonlinearity),
            nodal_zones: self.nodal_zones,
            coupling: self.coupling,
            alpha: self.alpha,
            zeros: self.zeros.clone(),
            critical_points: self.critical_points.clone(),
            extremal_values: self.extremal_values.clone(),
            tolerances: self.tolerances,
            supercritical: self.supercritical,
            scale: self.scale,
        }
    }

    /// CSV with columns `t, v, v_prime` (or `r, u, u_prime`).
    pub fn to_csv(&self) -> String {
        let header: [&str; 3] = match self.variable {
            Variable::Emden => ["t", "v", "v_prime"],
            Variable::Physical => ["r", "u", "u_prime"],
        };
        io::csv_string(
            &header,
            (0..self.grid.len()).map(|i| vec![self.grid[i], self.values[i], self.derivative[i]]),
        )
    }

    /// Rebuild a profile from its metadata and CSV samples. Custom
    /// nonlinearities must be supplied by the caller.
    pub fn from_parts(
        meta: &ProfileMetadata,
        csv: &str,
        custom: Option<Nonlinearity>,
    ) -> Result<Self, OdeError> {
        let nonlinearity = match (&meta.nonlinearity, custom) {
            (NonlinearitySpec::Power { p }, _) => Nonlinearity::power(*p),
            (NonlinearitySpec::Custom { .. }, Some(nl)) => nl,
            (NonlinearitySpec::Custom { label, .. }, None) => {
                return Err(OdeError::Malformed(format!(
                    "custom nonlinearity '{label}' cannot be rebuilt from metadata"
                )))
            }
        };
        let (_, rows) = io::parse_csv(csv).map_err(OdeError::Malformed)?;
        if rows.len() < 2 {
            return Err(OdeError::Malformed("fewer than two samples".into()));
        }
        let grid: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(OdeError::Malformed("grid is not strictly increasing".into()));
        }
        if meta.zeros.len() != meta.nodal_zones || meta.nodal_zones == 0 {
            return Err(OdeError::Malformed("zero list does not match nodal_zones".into()));
        }
        Ok(Self {
            variable: meta.variable,
            dim: meta.dim,
            values: rows.iter().map(|r| r[1]).collect(),
            derivative: rows.iter().map(|r| r[2]).collect(),
            grid,
            zeros: meta.zeros.clone(),
            critical_points: meta.critical_points.clone(),
            extremal_values: meta.extremal_values.clone(),
            nodal_zones: meta.nodal_zones,
            nonlinearity,
            coupling: meta.coupling,
            alpha: meta.alpha,
            tolerances: meta.tolerances,
            supercritical: meta.supercritical,
            scale: meta.scale,
            pullback: None,
        })
    }
}

/// JSON metadata accompanying a profile CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMetadata {
    pub variable: Variable,
    #[serde(rename = "M")]
    pub dim: f64,
    pub nonlinearity: NonlinearitySpec,
    #[serde(rename = "m")]
    pub nodal_zones: usize,
    pub coupling: f64,
    pub alpha: f64,
    pub zeros: Vec<f64>,
    pub critical_points: Vec<f64>,
    pub extremal_values: Vec<f64>,
    pub tolerances: IvpOptions,
    pub supercritical: bool,
    pub scale: f64,
}

pub(crate) fn hermite(x: &[f64], y: &[f64], dy: &[f64], at: f64) -> (f64, f64) {
    let n = x.len();
    if at <= x[0] {
        return (y[0], dy[0]);
    }
    if at >= x[n - 1] {
        return (y[n - 1], dy[n - 1]);
    }
    let k = x.partition_point(|&g| g <= at) - 1;
    let h = x[k + 1] - x[k];
    let s = (at - x[k]) / h;
    let (y0, y1, d0, d1) = (y[k], y[k + 1], dy[k] * h, dy[k + 1] * h);
    let s2 = s * s;
    let s3 = s2 * s;
    let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * d1;
    let dv = ((6.0 * s2 - 6.0 * s) * y0
        + (3.0 * s2 - 4.0 * s + 1.0) * d0
        + (-6.0 * s2 + 6.0 * s) * y1
        + (3.0 * s2 - 2.0 * s) * d1)
        / h;
    (v, dv)
}

/// Nodal solution of `-(t^{M-1} v')' = t^{M-1}|v|^{p-1}v`, `v(1) = 0`, with
/// `m` nodal zones and `v(0) > 0`, built by rescaling the `v(0) = 1` IVP.
pub fn solve_nodal_power(dim: f64, p: f64, m: usize, opts: &IvpOptions) -> Result<RadialProfile, OdeError> {
    if m == 0 {
        return Err(OdeError::InvalidInput("m must be >= 1".into()));
    }
    if !(p > 1.0) || !p.is_finite() {
        return Err(OdeError::InvalidInput(format!("p = {p} must be > 1")));
    }
    let nl = Nonlinearity::power(p);
    let ode = EmdenOde {
        dim,
        nonlinearity: &nl,
        coupling: 1.0,
    };
    let traj = integrate_emden_ivp(&ode, 1.0, opts.t_max, opts, Some(m))?;
    if traj.zeros.len() < m {
        return Err(OdeError::ZeroNotFound {
            found: traj.zeros.len(),
            wanted: m,
            t_max: opts.t_max,
        });
    }
    let tm = traj.zeros[m - 1];
    let amp = tm.powf(2.0 / (p - 1.0));
    Ok(RadialProfile::from_trajectory(
        &traj,
        tm,
        amp,
        amp * tm,
        m,
        dim,
        &nl,
        1.0,
        *opts,
        tm,
    ))
}

pub(crate) fn profile_from_shooting(
    traj: &Trajectory,
    m: usize,
    dim: f64,
    nl: &Nonlinearity,
    coupling: f64,
    opts: &IvpOptions,
    d: f64,
) -> RadialProfile {
    let tm = traj.zeros[m - 1];
    RadialProfile::from_trajectory(traj, tm, 1.0, 1.0, m, dim, nl, coupling, *opts, d)
}

/// Physical profile `u(r) = ((2+α)/2)^{2/(p−1)} v(r^{(2+α)/2})` solving
/// `−Δu = |x|^α |u|^{p−1}u` in the unit ball of `ℝ^N`.
pub fn henon_profile(
    n: u32,
    alpha: f64,
    p: f64,
    m: usize,
    opts: &IvpOptions,
) -> Result<RadialProfile, OdeError> {
    let map = generalized_dimension(n, alpha).map_err(|e| OdeError::InvalidInput(e.to_string()))?;
    let emden = solve_nodal_power(map.m, p, m, opts)?;
    pull_back(emden, &map)
}

/// Pull an Emden power profile back to the physical radius.
pub fn pull_back(emden: RadialProfile, map: &DimensionMap) -> Result<RadialProfile, OdeError> {
    if emden.variable != Variable::Emden {
        return Err(OdeError::NotEmdenVariable);
    }
    let p = emden.nonlinearity.exponent().ok_or(OdeError::NotPower)?;
    let kappa = map.exponent;
    let amplitude = kappa.powf(2.0 / (p - 1.0));
    let to_r = |t: f64| t.powf(1.0 / kappa);
    let grid: Vec<f64> = emden.grid.iter().map(|&t| to_r(t)).collect();
    let values: Vec<f64> = emden.values.iter().map(|v| amplitude * v).collect();
    let derivative: Vec<f64> = emden
        .grid
        .iter()
        .zip(&grid)
        .zip(&emden.derivative)
        .map(|((&t, &r), &dv)| {
            if r > 0.0 {
                amplitude * dv * kappa * t / r
            } else {
                0.0
            }
        })
        .collect();
    let mut prof = RadialProfile {
        variable: Variable::Physical,
        dim: map.n as f64,
        zeros: emden.zeros.iter().map(|&t| to_r(t)).collect(),
        critical_points: emden.critical_points.iter().map(|&t| to_r(t)).collect(),
        extremal_values: emden.extremal_values.iter().map(|e| amplitude * e).collect(),
        grid,
        values,
        derivative,
        nodal_zones: emden.nodal_zones,
        nonlinearity: emden.nonlinearity.clone(),
        coupling: 1.0,
        alpha: map.alpha,
        tolerances: emden.tolerances,
        supercritical: emden.supercritical,
        scale: emden.scale,
        pullback: None,
    };
    prof.pullback = Some(Pullback {
        kappa,
        amplitude,
        emden: Arc::new(emden),
    });
    Ok(prof)
}
