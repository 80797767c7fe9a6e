use std::sync::Arc;

use super::analysis::{default_decay_window, fit_decay_exponent};
use super::{
    build_pairs, decay_exponent, extrapolate, hardy_threshold, DiscreteOperator, SpectralConfig,
    SpectralError, Spectrum, WeightKind, WeightedSLProblem,
};

/// Half-line Schrödinger problem `-u'' + V u = ν̂ u` on `(0, X)`,
/// `u(0) = u(X) = 0`, sampled on a uniform grid.
#[derive(Debug, Clone)]
pub struct LiouvilleProblem {
    pub dim: f64,
    pub threshold: f64,
    pub x_max: f64,
    /// Number of intervals.
    pub n: usize,
    pub h: f64,
    /// Interior nodes `x_k = k h`, `k = 1..n-1`.
    pub x: Vec<f64>,
    /// `V(x_k) = ((M-2)/2)² − e^{-2x_k} a(e^{-x_k})`.
    pub v: Vec<f64>,
}

impl LiouvilleProblem {
    /// Generalized form (mass `h`) on the grid keeping every `stride`-th node.
    pub(crate) fn operator(&self, stride: usize) -> DiscreteOperator {
        let h = self.h * stride as f64;
        let idx: Vec<usize> = (stride - 1..self.x.len()).step_by(stride).collect();
        let m = idx.len();
        DiscreteOperator {
            diag: idx.iter().map(|&i| 2.0 / h + h * self.v[i]).collect(),
            off: vec![-1.0 / h; m.saturating_sub(1)],
            mass: vec![h; m],
            r: idx.iter().map(|&i| (-self.x[i]).exp()).collect(),
        }
    }
}

pub fn liouville_transform(
    prob: &WeightedSLProblem,
    x_max: f64,
    n: usize,
) -> Result<LiouvilleProblem, SpectralError> {
    prob.check(WeightKind::Singular)?;
    if !(x_max > 0.0) || !x_max.is_finite() {
        return Err(SpectralError::InvalidInput(format!(
            "X_max = {x_max} must be positive"
        )));
    }
    if n < 8 {
        return Err(SpectralError::InvalidInput(format!(
            "n = {n} intervals is too few"
        )));
    }
    let t = hardy_threshold(prob.dim);
    let h = x_max / n as f64;
    let x: Vec<f64> = (1..n).map(|k| k as f64 * h).collect();
    let mut v = Vec::with_capacity(n - 1);
    for &xk in &x {
        let r = (-xk).exp();
        let a = prob.potential.eval(r);
        if !a.is_finite() {
            return Err(SpectralError::PotentialNotFinite { r });
        }
        v.push(t - r * r * a);
    }
    Ok(LiouvilleProblem {
        dim: prob.dim,
        threshold: t,
        x_max,
        n,
        h,
        x,
        v,
    })
}

const MIN_X: f64 = 10.0;
const DECAY_LENGTHS: f64 = 30.0;
/// Level below which `e^{-2x} sup|a|` is treated as negligible.
const POTENTIAL_FLOOR: f64 = 1e-16;

/// Singular eigenvalues below `((M-2)/2)² − margin`, at most `k` of them.
pub fn solve_singular_spectrum(
    prob: &WeightedSLProblem,
    k: usize,
    cfg: &SpectralConfig,
) -> Result<Spectrum, SpectralError> {
    prob.check(WeightKind::Singular)?;
    cfg.check()?;
    let t = hardy_threshold(prob.dim);
    let level = t - cfg.margin;
    let (sup, sup_r2) = prob.potential.bounds()?;
    let omega = (2.0 * sup_r2 + t + 1.0).sqrt();

    // coarse pass on the full domain to size X from the top eigenvalue
    let x0 = cfg.x_max;
    let probe = liouville_transform(prob, x0, cfg.fine_grid(x0, omega))?;
    let probe_op = probe.operator(1).scaled();
    let below = probe_op.sturm_count(level).min(k);
    let x = if below == 0 {
        x0
    } else {
        let top = probe_op.kth_eigenvalue(below - 1);
        let x_pot = if sup > 0.0 {
            0.5 * (sup / POTENTIAL_FLOOR).ln()
        } else {
            0.0
        };
        (x_pot + DECAY_LENGTHS / (t - top).sqrt()).max(MIN_X).min(x0)
    };

    // refine until the Richardson estimate meets the tolerance
    let mut n = cfg.fine_grid(x, omega);
    let (lp, fine, grids, count, values) = loop {
        let lp = if x == x0 && n == probe.n {
            probe.clone()
        } else {
            liouville_transform(prob, x, n)?
        };
        let fine = lp.operator(1);
        let grids = [fine.scaled(), lp.operator(2).scaled(), lp.operator(4).scaled()];
        let count = grids[0].sturm_count(level);
        match extrapolate([&grids[0], &grids[1], &grids[2]], count.min(k), cfg) {
            Ok(values) => break (lp, Arc::new(fine), grids, count, values),
            Err(SpectralError::GridTooCoarse { .. }) if 2 * n <= cfg.max_grid => n *= 2,
            Err(e) => return Err(e),
        }
    };
    let near: Vec<f64> = (count..grids[0].sturm_count(t))
        .map(|i| grids[0].kth_eigenvalue(i))
        .collect();

    let h = lp.h;
    let a = (prob.dim - 2.0) / 2.0;
    let r_nodes = fine.r.clone();
    let samples_of = move |u: &[f64]| {
        let n = u.len();
        let mut r = Vec::with_capacity(n + 1);
        let mut psi = Vec::with_capacity(n + 1);
        for i in (0..n).rev() {
            r.push(r_nodes[i]);
            psi.push(r_nodes[i].powf(-a) * u[i]);
        }
        r.push(1.0);
        psi.push(0.0);
        // fourth-order one-sided difference with u = 0 at x = 0
        let at = |i: usize| u.get(i).copied().unwrap_or(0.0);
        let slope = -(48.0 * at(0) - 36.0 * at(1) + 16.0 * at(2) - 3.0 * at(3)) / (12.0 * h);
        (r, psi, slope)
    };
    let mut pairs = build_pairs(fine, &values, WeightKind::Singular, prob.dim, cfg, &samples_of);
    for p in &mut pairs {
        // truncation at X: integrate dν/dX = −u'(X)² over an e^{-2κX} tail
        let kappa = (t - p.value).max(0.0).sqrt();
        let v = &p.vector;
        let du = (v[v.len() - 2] - 4.0 * v[v.len() - 1]) / (2.0 * h);
        if kappa > 0.0 {
            p.error_bar += du * du / (2.0 * kappa);
        }
        p.theta_analytic = Some(decay_exponent(prob.dim, p.value));
        if let Some(window) = default_decay_window(p, lp.x_max, sup) {
            p.decay_exponent = fit_decay_exponent(p, prob.dim, window).ok().map(|f| f.theta_fit);
        }
    }
    let exhausted_below = if count > k {
        values.last().map_or(level, |v| v.0)
    } else {
        level
    };
    Ok(Spectrum {
        kind: WeightKind::Singular,
        dim: prob.dim,
        threshold: t,
        pairs,
        exhausted_below,
        near_threshold: near,
        x_max: Some(lp.x_max),
        grid_intervals: lp.n,
    })
}
