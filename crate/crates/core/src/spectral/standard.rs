use std::sync::Arc;

use super::{
    build_pairs, extrapolate, DiscreteOperator, SpectralConfig, SpectralError, Spectrum, WeightKind,
    WeightedSLProblem,
};

/// Smooth stretching `r = sinh(βs)/sinh(β)` of the unit interval, dense near
/// the origin; `β = 0` is the identity.
#[derive(Debug, Clone, Copy)]
struct Stretch {
    beta: f64,
}

impl Stretch {
    /// Spacing ratio at the origin `β/sinh β` matched to `len`.
    fn for_length(len: f64) -> Self {
        if len >= 0.2 {
            return Self { beta: 0.0 };
        }
        let ratio = |b: f64| b / b.sinh();
        let (mut lo, mut hi) = (1e-3, 60.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if ratio(mid) > len {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Self {
            beta: 0.5 * (lo + hi),
        }
    }

    fn r(&self, s: f64) -> f64 {
        if self.beta == 0.0 {
            s
        } else {
            (self.beta * s).sinh() / self.beta.sinh()
        }
    }

    fn dr(&self, s: f64) -> f64 {
        if self.beta == 0.0 {
            1.0
        } else {
            self.beta * (self.beta * s).cosh() / self.beta.sinh()
        }
    }
}

/// Finite-volume form on the nodes `r_i = g(i/n)`, `i = 0..n-1`, with faces
/// at the midpoints, a half cell at the origin and Dirichlet at `r = 1`.
#[allow(clippy::needless_range_loop)]
fn operator(prob: &WeightedSLProblem, n: usize, g: Stretch) -> Result<DiscreteOperator, SpectralError> {
    let m = prob.dim;
    let r: Vec<f64> = (0..=n)
        .map(|i| if i == n { 1.0 } else { g.r(i as f64 / n as f64) })
        .collect();
    let face = |i: usize| 0.5 * (r[i] + r[i + 1]);
    let flux = |i: usize| face(i).powf(m - 1.0) / (r[i + 1] - r[i]);
    let mut diag = Vec::with_capacity(n);
    let mut mass = Vec::with_capacity(n);
    for i in 0..n {
        let w = if i == 0 {
            face(0).powf(m) / m
        } else {
            (face(i).powf(m) - face(i - 1).powf(m)) / m
        };
        let at = if i == 0 { 0.5 * face(0) } else { r[i] };
        let a = prob.potential.eval(at);
        if !a.is_finite() {
            return Err(SpectralError::PotentialNotFinite { r: at });
        }
        let left = if i == 0 { 0.0 } else { flux(i - 1) };
        diag.push(left + flux(i) - w * a);
        mass.push(w);
    }
    Ok(DiscreteOperator {
        diag,
        off: (0..n - 1).map(|i| -flux(i)).collect(),
        mass,
        r: r[..n].to_vec(),
    })
}

/// The first `k` standard eigenvalues.
pub fn solve_standard_spectrum(
    prob: &WeightedSLProblem,
    k: usize,
    cfg: &SpectralConfig,
) -> Result<Spectrum, SpectralError> {
    prob.check(WeightKind::Standard)?;
    cfg.check()?;
    let (sup, _) = prob.potential.bounds()?;
    let g = Stretch::for_length(if sup > 0.0 { sup.sqrt().recip() } else { 1.0 });
    let top = std::f64::consts::PI * (k as f64 + prob.dim / 2.0);
    // largest local wavenumber per unit of the stretched coordinate
    let omega = (0..=4096)
        .map(|i| {
            let s = i as f64 / 4096.0;
            let a = prob.potential.eval(g.r(s).max(1e-300)).abs();
            g.dr(s) * (a + top * top).sqrt()
        })
        .fold(0.0, f64::max);
    let mut n = cfg.fine_grid(1.0, omega);
    let (fine, values) = loop {
        let fine = operator(prob, n, g)?;
        let grids = [
            fine.scaled(),
            operator(prob, n / 2, g)?.scaled(),
            operator(prob, n / 4, g)?.scaled(),
        ];
        match extrapolate([&grids[0], &grids[1], &grids[2]], k.min(n / 4), cfg) {
            Ok(values) => break (Arc::new(fine), values),
            Err(SpectralError::GridTooCoarse { .. }) if 2 * n <= cfg.max_grid => n *= 2,
            Err(e) => return Err(e),
        }
    };
    let r_nodes = fine.r.clone();
    let samples_of = move |v: &[f64]| {
        let len = v.len();
        // quadratic through the last two nodes and ψ(1) = 0
        let (x0, x1) = (r_nodes[len - 2], r_nodes[len - 1]);
        let d0 = (1.0 - x1) / ((x0 - x1) * (x0 - 1.0));
        let d1 = (1.0 - x0) / ((x1 - x0) * (x1 - 1.0));
        let slope = v[len - 2] * d0 + v[len - 1] * d1;
        let mut r = r_nodes.clone();
        let mut psi = v.to_vec();
        r.push(1.0);
        psi.push(0.0);
        (r, psi, slope)
    };
    let pairs = build_pairs(fine, &values, WeightKind::Standard, prob.dim, cfg, &samples_of);
    let exhausted_below = values.last().map_or(f64::NEG_INFINITY, |v| v.0);
    Ok(Spectrum {
        kind: WeightKind::Standard,
        dim: prob.dim,
        threshold: f64::INFINITY,
        pairs,
        exhausted_below,
        near_threshold: Vec::new(),
        x_max: None,
        grid_intervals: n,
    })
}
