use serde::Serialize;

use super::profile::{RadialProfile, Variable};
use super::OdeError;

/// Qualitative checks on a nodal profile. Every flag is `true` on success.
#[derive(Debug, Clone, Serialize)]
pub struct QualitativeReport {
    pub declared_zones: usize,
    pub zero_count: usize,
    pub zero_count_ok: bool,
    pub last_zero_at_one: bool,
    pub positive_at_origin: bool,
    pub sign_alternation_ok: bool,
    /// Interior critical points per nodal zone (zone 0 first).
    pub critical_points_per_zone: Vec<usize>,
    pub critical_points_ok: bool,
    pub first_zone_decreasing: bool,
    /// `None` when the chain is not enforced (non-odd nonlinearity).
    pub extremal_chain_ok: Option<bool>,
    /// Even/odd subchains `𝓜_0 > 𝓜_2 > …`, `𝓜_1 > 𝓜_3 > …`.
    pub extremal_parity_chains_ok: bool,
    pub derivative_at_origin: f64,
    pub derivative_at_origin_ok: bool,
    pub supercritical: bool,
    pub warnings: Vec<String>,
}

impl QualitativeReport {
    /// Zero count, sign pattern and boundary checks.
    pub fn structural_ok(&self) -> bool {
        self.zero_count_ok
            && self.last_zero_at_one
            && self.positive_at_origin
            && self.sign_alternation_ok
            && self.derivative_at_origin_ok
    }

    pub fn passed(&self) -> bool {
        self.structural_ok()
            && self.critical_points_ok
            && self.first_zone_decreasing
            && self.extremal_chain_ok.unwrap_or(true)
    }
}

fn zone_of(zeros: &[f64], t: f64) -> usize {
    zeros.partition_point(|&z| z < t)
}

fn sign_changes(samples: impl Iterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for s in samples {
        if s == 0.0 {
            continue;
        }
        if last != 0.0 && s.signum() != last.signum() {
            count += 1;
        }
        last = s;
    }
    count
}

pub fn validate_profile(prof: &RadialProfile) -> QualitativeReport {
    let m = prof.nodal_zones;
    let zeros = &prof.zeros;
    let sup = prof.sup_norm().max(f64::MIN_POSITIVE);
    let mut warnings = Vec::new();

    let zero_count = zeros.len();
    let zero_count_ok = zero_count == m && zeros.windows(2).all(|w| w[1] > w[0]);
    let last_zero_at_one = zeros.last() == Some(&1.0);
    let positive_at_origin = prof.values.first().is_some_and(|&v| v > 0.0);

    // samples away from the zeros must carry the sign (-1)^zone
    let guard = 1e-9 * sup;
    let mut sign_alternation_ok = true;
    for (&t, &v) in prof.grid.iter().zip(&prof.values) {
        if zeros.contains(&t) || v.abs() <= guard {
            continue;
        }
        let zone = zone_of(zeros, t);
        let expected = if zone.is_multiple_of(2) { 1.0 } else { -1.0 };
        if v.signum() != expected {
            sign_alternation_ok = false;
            break;
        }
    }

    let zones = m.max(1);
    let mut per_zone = vec![0usize; zones];
    for z in 0..zones {
        let a = if z == 0 { 0.0 } else { zeros[z - 1] };
        let b = zeros.get(z).copied().unwrap_or(1.0);
        per_zone[z] = sign_changes(
            prof.grid
                .iter()
                .zip(&prof.derivative)
                .filter(|(&t, _)| t > a && t < b)
                .map(|(_, &d)| d),
        );
    }
    let critical_points_ok = per_zone.iter().enumerate().all(|(z, &c)| c == usize::from(z > 0));

    let t1 = zeros.first().copied().unwrap_or(1.0);
    let first: Vec<f64> = prof
        .grid
        .iter()
        .zip(&prof.values)
        .filter(|(&t, _)| t <= t1)
        .map(|(_, &v)| v)
        .collect();
    let first_zone_decreasing = first.windows(2).all(|w| w[1] < w[0]);

    let ext = &prof.extremal_values;
    let strictly_decreasing = |xs: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = xs.collect();
        v.windows(2).all(|w| w[1] < w[0])
    };
    let chain = strictly_decreasing(&mut ext.iter().copied());
    let parity = strictly_decreasing(&mut ext.iter().step_by(2).copied())
        && strictly_decreasing(&mut ext.iter().skip(1).step_by(2).copied());
    let extremal_chain_ok = if prof.nonlinearity.is_odd() {
        Some(chain)
    } else {
        if !parity {
            warnings.push("extremal parity chains fail (f may violate f(u)/u > 0)".into());
        }
        None
    };

    let dv0 = prof.derivative.first().copied().unwrap_or(f64::NAN);
    let derivative_at_origin_ok = dv0.abs() <= 1e-8 * sup;
    if prof.supercritical {
        warnings.push("exponent at or above the critical exponent (M+2)/(M-2)".into());
    }
    if !critical_points_ok && !prof.nonlinearity.is_odd() {
        warnings.push("critical-point count differs from one per interior zone".into());
    }

    QualitativeReport {
        declared_zones: m,
        zero_count,
        zero_count_ok,
        last_zero_at_one,
        positive_at_origin,
        sign_alternation_ok,
        critical_points_per_zone: per_zone,
        critical_points_ok,
        first_zone_decreasing,
        extremal_chain_ok,
        extremal_parity_chains_ok: parity,
        derivative_at_origin: dv0,
        derivative_at_origin_ok,
        supercritical: prof.supercritical,
        warnings,
    }
}

/// `z = t v' + 2v/(p−1)` on the profile grid.
#[derive(Debug, Clone, Serialize)]
pub struct AuxiliaryZ {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Zeros in `(0, 1)`, located by linear interpolation between samples.
    pub zeros: Vec<f64>,
    pub zero_count: usize,
}

pub fn auxiliary_z(prof: &RadialProfile) -> Result<AuxiliaryZ, OdeError> {
    let p = prof.nonlinearity.exponent().ok_or(OdeError::NotPower)?;
    if prof.variable != Variable::Emden {
        return Err(OdeError::NotEmdenVariable);
    }
    let k = 2.0 / (p - 1.0);
    let values: Vec<f64> = prof
        .grid
        .iter()
        .zip(prof.values.iter().zip(&prof.derivative))
        .map(|(&t, (&v, &dv))| t * dv + k * v)
        .collect();
    let mut zeros = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for (&t, &z) in prof.grid.iter().zip(&values) {
        if t <= 0.0 || t >= 1.0 || z == 0.0 {
            continue;
        }
        if let Some((t0, z0)) = last {
            if z0.signum() != z.signum() {
                zeros.push(t0 - z0 * (t - t0) / (z - z0));
            }
        }
        last = Some((t, z));
    }
    if let (Some((t0, z0)), Some(&z1)) = (last, values.last()) {
        if z1 != 0.0 && z0.signum() != z1.signum() {
            zeros.push(t0 - z0 * (1.0 - t0) / (z1 - z0));
        }
    }
    Ok(AuxiliaryZ {
        grid: prof.grid.clone(),
        zero_count: zeros.len(),
        zeros,
        values,
    })
}
