use super::ivp::{integrate_emden_ivp, EmdenOde};
use super::profile::{profile_from_shooting, RadialProfile};
use super::validate::validate_profile;
use super::{IvpOptions, Nonlinearity, OdeError};

const MAX_DOUBLINGS: i32 = 60;

/// Zeros of the IVP solution in `(0, 1]`, counting at most `cap`.
fn zero_count(ode: &EmdenOde<'_>, d: f64, cap: usize, opts: &IvpOptions) -> Result<usize, OdeError> {
    let tr = integrate_emden_ivp(ode, d, 1.0, opts, Some(cap))?;
    Ok(tr.zeros_up_to(1.0))
}

/// Geometric search from `v(0) = 1` for `[lo, hi]` with fewer than `m`
/// zeros at `lo` and at least `m` at `hi`.
pub fn find_shooting_bracket(
    dim: f64,
    nl: &Nonlinearity,
    coupling: f64,
    m: usize,
    opts: &IvpOptions,
) -> Result<(f64, f64), OdeError> {
    if m == 0 {
        return Err(OdeError::InvalidInput("m must be >= 1".into()));
    }
    let ode = EmdenOde {
        dim,
        nonlinearity: nl,
        coupling,
    };
    let enough = |d: f64| -> Result<bool, OdeError> { Ok(zero_count(&ode, d, m, opts)? >= m) };
    if enough(1.0)? {
        let mut hi = 1.0;
        for _ in 0..MAX_DOUBLINGS {
            let lo = hi / 2.0;
            if !enough(lo)? {
                return Ok((lo, hi));
            }
            hi = lo;
        }
    } else {
        let mut lo = 1.0;
        for _ in 0..MAX_DOUBLINGS {
            let hi = lo * 2.0;
            if enough(hi)? {
                return Ok((lo, hi));
            }
            lo = hi;
        }
    }
    Err(OdeError::BadBracket {
        lo: 2f64.powi(-MAX_DOUBLINGS),
        hi: 2f64.powi(MAX_DOUBLINGS),
        detail: format!("no sign change of the zero count around {m} within 2^±{MAX_DOUBLINGS}"),
    })
}

/// Nodal solution with `m` zones for a general nonlinearity, by bisection
/// on `d = v(0)` inside `bracket`.
pub fn solve_nodal_shooting(
    dim: f64,
    nl: &Nonlinearity,
    coupling: f64,
    m: usize,
    bracket: (f64, f64),
    opts: &IvpOptions,
) -> Result<RadialProfile, OdeError> {
    if m == 0 {
        return Err(OdeError::InvalidInput("m must be >= 1".into()));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(OdeError::BadBracket {
            lo,
            hi,
            detail: "need 0 < d_lo < d_hi".into(),
        });
    }
    let ode = EmdenOde {
        dim,
        nonlinearity: nl,
        coupling,
    };
    let cap = m + 1;
    let mut lo_count = zero_count(&ode, lo, cap, opts)?;
    let mut hi_count = zero_count(&ode, hi, cap, opts)?;
    if !(lo_count < m && hi_count >= m) {
        return Err(OdeError::BadBracket {
            lo,
            hi,
            detail: format!("zero counts {lo_count} and {hi_count} around target {m}"),
        });
    }
    for _ in 0..400 {
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let count = zero_count(&ode, mid, cap, opts)?;
        if count < lo_count || count > hi_count {
            return Err(OdeError::NonMonotone {
                d: mid,
                count,
                lo_count,
                hi_count,
            });
        }
        if count >= m {
            hi = mid;
            hi_count = count;
        } else {
            lo = mid;
            lo_count = count;
        }
    }
    if lo_count != m - 1 || hi_count != m {
        return Err(OdeError::NonMonotone {
            d: hi,
            count: hi_count,
            lo_count,
            hi_count,
        });
    }
    let traj = integrate_emden_ivp(&ode, hi, 1.0, opts, Some(m))?;
    let tm = traj.zeros[m - 1];
    let slope = traj.dv.last().copied().unwrap_or(0.0).abs();
    let residual = slope * (1.0 - tm);
    let amplitude = traj.v.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if residual > 1e-9 * amplitude.max(1.0) {
        return Err(OdeError::BadBracket {
            lo,
            hi,
            detail: format!("shooting residual |v(1)| ~ {residual:e} did not converge"),
        });
    }
    let prof = profile_from_shooting(&traj, m, dim, nl, coupling, opts, hi);
    let report = validate_profile(&prof);
    if !report.structural_ok() {
        return Err(OdeError::InvalidInput(format!(
            "shooting produced a profile failing validation: {report:?}"
        )));
    }
    Ok(prof)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_ode::solve_nodal_power;

    #[test]
    fn empty_bracket_is_rejected() {
        let nl = Nonlinearity::power(3.0);
        let err = solve_nodal_shooting(3.0, &nl, 1.0, 2, (1.0, 1.0), &IvpOptions::default());
        assert!(matches!(err, Err(OdeError::BadBracket { .. })));
    }

    #[test]
    fn shooting_matches_scaling_for_power() {
        let opts = IvpOptions::default();
        for (dim, p, m) in [(3.0, 3.0, 2), (2.0, 2.2, 1), (2.5, 3.0, 3)] {
            let nl = Nonlinearity::power(p);
            let br = find_shooting_bracket(dim, &nl, 1.0, m, &opts).unwrap();
            let shot = solve_nodal_shooting(dim, &nl, 1.0, m, br, &opts).unwrap();
            let scaled = solve_nodal_power(dim, p, m, &opts).unwrap();
            let sup = scaled.sup_norm();
            let mut err = 0.0f64;
            for k in 0..=1000 {
                let t = k as f64 / 1000.0;
                err = err.max((shot.value(t) - scaled.value(t)).abs());
            }
            assert!(err < 1e-6 * sup.max(1.0), "dim={dim} p={p} m={m} err={err}");
        }
    }

    #[test]
    fn cubic_plus_linear_two_nodal() {
        let nl = Nonlinearity::custom("u+u^3", |u| u + u * u * u, |u| 1.0 + 3.0 * u * u, true);
        let opts = IvpOptions::default();
        let br = find_shooting_bracket(3.0, &nl, 1.0, 2, &opts).unwrap();
        let prof = solve_nodal_shooting(3.0, &nl, 1.0, 2, br, &opts).unwrap();
        let rep = validate_profile(&prof);
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(prof.zeros.len(), 2);
        // regression value of v(0) from an independent high-order integration
        assert!(
            (prof.values[0] - REGRESSION_D).abs() < 1e-6 * REGRESSION_D,
            "v(0) = {}",
            prof.values[0]
        );
    }

    const REGRESSION_D: f64 = 34.845_896_157_622_8;
}
