use std::sync::Arc;

use super::tridiag::{tql1, SymTridiag};
use super::{
    build_pairs, decay_exponent, hardy_threshold, richardson, DiscreteOperator, SpectralConfig,
    SpectralError, Spectrum, WeightKind, WeightedSLProblem,
};

/// Largest grid the dense oracle accepts.
pub const ORACLE_MAX_N: usize = 4000;
/// Standard-kind eigenvalues reported by the oracle.
const STANDARD_COUNT: usize = 10;

/// Row order flipped so the large entries near `ε` sit at the bottom, where
/// the QL sweep handles grading accurately.
fn reversed(t: &SymTridiag) -> SymTridiag {
    SymTridiag {
        diag: t.diag.iter().rev().copied().collect(),
        off: t.off.iter().rev().copied().collect(),
    }
}

/// Geometric grid `r_i = ε^{1 - i/n}` on `[ε, 1]`.
fn operator(prob: &WeightedSLProblem, n: usize, eps: f64) -> Result<DiscreteOperator, SpectralError> {
    let m = prob.dim;
    let r: Vec<f64> = (0..=n).map(|i| eps.powf(1.0 - i as f64 / n as f64)).collect();
    let flux = |i: usize| (r[i] * r[i + 1]).sqrt().powf(m - 1.0) / (r[i + 1] - r[i]);
    let weight_exp = match prob.kind {
        WeightKind::Singular => m - 3.0,
        WeightKind::Standard => m - 1.0,
    };
    // singular: Dirichlet at ε (unknowns 1..n-1); standard: Neumann at ε (0..n-1)
    let first = match prob.kind {
        WeightKind::Singular => 1,
        WeightKind::Standard => 0,
    };
    let mut op = DiscreteOperator {
        diag: Vec::new(),
        off: Vec::new(),
        mass: Vec::new(),
        r: Vec::new(),
    };
    for i in first..n {
        let len = if i == 0 {
            0.5 * (r[1] - r[0])
        } else {
            0.5 * (r[i + 1] - r[i - 1])
        };
        let a = prob.potential.eval(r[i]);
        if !a.is_finite() {
            return Err(SpectralError::PotentialNotFinite { r: r[i] });
        }
        let left = if i == 0 { 0.0 } else { flux(i - 1) };
        op.diag.push(left + flux(i) - r[i].powf(m - 1.0) * a * len);
        op.mass.push(r[i].powf(weight_exp) * len);
        op.r.push(r[i]);
        if i + 1 < n {
            op.off.push(-flux(i));
        }
    }
    Ok(op)
}

/// Direct discretization on `[ε, 1]` with a full tridiagonal QL eigensolve
/// on grids `n`, `n/2`, `n/4`.
pub fn dense_oracle_spectrum(
    prob: &WeightedSLProblem,
    n: usize,
    epsilon_cut: f64,
) -> Result<Spectrum, SpectralError> {
    if n > ORACLE_MAX_N {
        return Err(SpectralError::SizeGuard {
            n,
            limit: ORACLE_MAX_N,
        });
    }
    if n < 32 || !n.is_multiple_of(4) {
        return Err(SpectralError::InvalidInput(format!(
            "oracle grid n = {n} must be a multiple of 4 and >= 32"
        )));
    }
    if !(epsilon_cut > 0.0 && epsilon_cut < 1.0) {
        return Err(SpectralError::InvalidInput(format!(
            "epsilon_cut = {epsilon_cut} must lie in (0, 1)"
        )));
    }
    if !(prob.dim >= 2.0) {
        return Err(SpectralError::InvalidInput(format!(
            "M = {} must be >= 2",
            prob.dim
        )));
    }
    let cfg = SpectralConfig::default();
    let fine = Arc::new(operator(prob, n, epsilon_cut)?);
    let all: Vec<Vec<f64>> = [
        fine.scaled(),
        operator(prob, n / 2, epsilon_cut)?.scaled(),
        operator(prob, n / 4, epsilon_cut)?.scaled(),
    ]
    .iter()
    .map(|t| tql1(&reversed(t)))
    .collect::<Result<_, _>>()
    .map_err(SpectralError::Solver)?;

    let (threshold, count) = match prob.kind {
        WeightKind::Singular => {
            let t = hardy_threshold(prob.dim);
            let level = t - cfg.margin;
            (t, all[0].iter().filter(|&&v| v < level).count())
        }
        WeightKind::Standard => (f64::INFINITY, STANDARD_COUNT.min(all[2].len())),
    };
    let count = count.min(all[2].len());
    let values: Vec<(f64, f64, f64)> = (0..count)
        .map(|i| {
            let (v, bar) = richardson(all[0][i], all[1][i], all[2][i]);
            (v, bar, all[0][i])
        })
        .collect();

    let r_nodes = fine.r.clone();
    let samples_of = move |v: &[f64]| {
        let mut r = r_nodes.clone();
        let mut psi = v.to_vec();
        let k = psi.len();
        let slope = (psi[k - 2] - 4.0 * psi[k - 1]) / (1.0 - r[k - 1]) / 2.0;
        r.push(1.0);
        psi.push(0.0);
        (r, psi, slope)
    };
    let mut pairs = build_pairs(fine, &values, prob.kind, prob.dim, &cfg, &samples_of);
    let a = (prob.dim - 2.0) / 2.0;
    for p in &mut pairs {
        let hole = match prob.kind {
            WeightKind::Singular => {
                let kappa = (threshold - p.value).max(0.0).sqrt();
                let mid = epsilon_cut.sqrt();
                let k = p.r.partition_point(|&x| x < mid).min(p.r.len() - 1);
                let u_mid = p.r[k].powf(a) * p.samples[k];
                p.theta_analytic = Some(decay_exponent(prob.dim, p.value));
                2.0 * kappa * u_mid * u_mid * epsilon_cut.powf(kappa)
            }
            WeightKind::Standard => {
                (1.0 + p.value.abs()) * epsilon_cut.powf(prob.dim.min(2.0)) * (1.0 - epsilon_cut.ln())
            }
        };
        p.error_bar += hole;
    }
    let exhausted_below = match prob.kind {
        WeightKind::Singular => threshold - cfg.margin,
        WeightKind::Standard => pairs.last().map_or(f64::NEG_INFINITY, |p| p.value),
    };
    Ok(Spectrum {
        kind: prob.kind,
        dim: prob.dim,
        threshold,
        pairs,
        exhausted_below,
        near_threshold: Vec::new(),
        x_max: None,
        grid_intervals: n,
    })
}
