use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    decay_exponent, hardy_threshold, EigenPair, SpectralConfig, SpectralError, WeightKind, WeightedSLProblem,
};

/// A function on `[0, 1]` given by samples at increasing radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub r: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(r: Vec<f64>, values: Vec<f64>) -> Self {
        Self { r, values }
    }

    fn check(&self) -> Result<(), SpectralError> {
        if self.r.len() != self.values.len() || self.r.len() < 2 {
            return Err(SpectralError::InvalidInput(
                "sampled function needs at least two (r, value) pairs of equal length".into(),
            ));
        }
        if self.r[0] < 0.0 || self.r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SpectralError::InvalidInput(
                "sample radii must be nonnegative and strictly increasing".into(),
            ));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(SpectralError::InvalidInput("sample values must be finite".into()));
        }
        Ok(())
    }
}

/// `∫ r^{M-1} w'²`, `∫ r^{M-1} w²`, `∫ r^{M-3} w²` over `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedIntegrals {
    pub grad: f64,
    pub mass: f64,
    pub singular_mass: f64,
}

const GAUSS_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GAUSS_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// 8-point Gauss–Legendre on `[a, b]`.
fn gauss(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    GAUSS_X
        .iter()
        .zip(&GAUSS_W)
        .map(|(x, w)| w * (f(c - h * x) + f(c + h * x)))
        .sum::<f64>()
        * h
}

/// `∫_0^b r^k (c0 + s r)² dr`, infinite when it diverges.
fn origin_moment(k: f64, b: f64, c0: f64, s: f64) -> f64 {
    let terms = [(c0 * c0, k + 1.0), (2.0 * c0 * s, k + 2.0), (s * s, k + 3.0)];
    terms
        .iter()
        .filter(|(coef, _)| *coef != 0.0)
        .map(|&(coef, e)| {
            if e <= 0.0 {
                f64::INFINITY
            } else {
                coef * b.powf(e) / e
            }
        })
        .sum()
}

/// `(b^M − a^M)/M` without cancellation for close endpoints.
fn power_gap(a: f64, b: f64, m: f64) -> f64 {
    if a <= 0.0 {
        b.powf(m) / m
    } else {
        a.powf(m) * (m * (b / a).ln()).exp_m1() / m
    }
}

/// Value and derivative at `x` of the polynomial through `(xs, ys)`.
fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> (f64, f64) {
    let mut val = 0.0;
    let mut der = 0.0;
    for j in 0..xs.len() {
        let mut l = 1.0;
        let mut dl = 0.0;
        for m in (0..xs.len()).filter(|&m| m != j) {
            let f = 1.0 / (xs[j] - xs[m]);
            dl = dl * (x - xs[m]) * f + l * f;
            l *= (x - xs[m]) * f;
        }
        val += ys[j] * l;
        der += ys[j] * dl;
    }
    (val, der)
}

/// Interpolation stencil for segment `[r_i, r_{i+1}]`: cubic through the
/// neighbouring samples, linear on a segment starting at the origin.
fn stencil(w: &SampledFunction, i: usize) -> std::ops::Range<usize> {
    if w.r[i] == 0.0 {
        i..i + 2
    } else {
        i.saturating_sub(1)..(i + 3).min(w.r.len())
    }
}

/// Integrals over `(0, 1)` of `r^k w'²`, `r^{k_1} w²`, `r^{k_2} w²` and,
/// when `a` is given, `r^{k_1} a w²`.
fn segment_sums(
    w: &SampledFunction,
    k_grad: f64,
    k1: f64,
    k2: f64,
    a: Option<&dyn Fn(f64) -> f64>,
) -> [f64; 4] {
    let (r, v) = (&w.r, &w.values);
    let mut out = [0.0; 4];
    let r0 = r[0];
    if r0 > 0.0 {
        out[1] += origin_moment(k1, r0, v[0], 0.0);
        out[2] += origin_moment(k2, r0, v[0], 0.0);
        if let Some(a) = a {
            out[3] += gauss(0.0, r0, |x| x.powf(k1) * a(x) * v[0] * v[0]);
        }
    }
    for i in 0..r.len() - 1 {
        let (ra, rb) = (r[i], r[i + 1]);
        let st = stencil(w, i);
        let (xs, ys) = (&r[st.clone()], &v[st.clone()]);
        if st.len() == 2 {
            let s = (v[i + 1] - v[i]) / (rb - ra);
            out[0] += s * s * power_gap(ra, rb, k_grad + 1.0);
        } else {
            out[0] += gauss(ra, rb, |x| x.powf(k_grad) * lagrange(xs, ys, x).1.powi(2));
        }
        if ra == 0.0 {
            let s = (v[i + 1] - v[i]) / rb;
            out[1] += origin_moment(k1, rb, v[i], s);
            out[2] += origin_moment(k2, rb, v[i], s);
        } else {
            out[1] += gauss(ra, rb, |x| x.powf(k1) * lagrange(xs, ys, x).0.powi(2));
            out[2] += gauss(ra, rb, |x| x.powf(k2) * lagrange(xs, ys, x).0.powi(2));
        }
        if let Some(a) = a {
            out[3] += gauss(ra, rb, |x| x.powf(k1) * a(x) * lagrange(xs, ys, x).0.powi(2));
        }
    }
    out
}

/// Weighted integrals of the interpolant of `w`: piecewise cubic through
/// the samples (linear on a segment at the origin), constant below `r_0`.
pub fn weighted_integrals(w: &SampledFunction, m: f64) -> Result<WeightedIntegrals, SpectralError> {
    w.check()?;
    if !(m >= 2.0) {
        return Err(SpectralError::InvalidInput(format!("M = {m} must be >= 2")));
    }
    let [grad, mass, singular_mass, _] = segment_sums(w, m - 1.0, m - 1.0, m - 3.0, None);
    Ok(WeightedIntegrals {
        grad,
        mass,
        singular_mass,
    })
}

/// `Q_{a,M}(w) / ∫ weight·w²` with the weight of `prob.kind`.
pub fn rayleigh_quotient(w: &SampledFunction, prob: &WeightedSLProblem) -> Result<f64, SpectralError> {
    let ints = weighted_integrals(w, prob.dim)?;
    let sup = w.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let last = *w.values.last().unwrap();
    if (*w.r.last().unwrap() - 1.0).abs() > 1e-12 || last.abs() > 1e-12 * sup.max(f64::MIN_POSITIVE) {
        return Err(SpectralError::InvalidInput(
            "test function must end with w(1) = 0".into(),
        ));
    }
    let potential = if prob.potential.is_zero() {
        0.0
    } else {
        let m = prob.dim;
        let a = |r: f64| prob.potential.eval(r);
        segment_sums(w, m - 1.0, m - 1.0, m - 3.0, Some(&a))[3]
    };
    let denom = match prob.kind {
        WeightKind::Standard => ints.mass,
        WeightKind::Singular => ints.singular_mass,
    };
    if !(denom > 0.0) {
        return Err(SpectralError::ZeroDenominator);
    }
    Ok((ints.grad - potential) / denom)
}

pub(crate) fn count_sign_changes(samples: &[f64], tol: f64) -> usize {
    let sup = samples.iter().fold(0.0f64, |a, s| a.max(s.abs()));
    let cut = tol * sup;
    let mut last = 0.0f64;
    let mut changes = 0;
    for &s in samples.iter().filter(|s| s.abs() > cut) {
        if last != 0.0 && s.signum() != last {
            changes += 1;
        }
        last = s.signum();
    }
    changes
}

/// Sign changes of `ψ` sampled at `r`, counted on `r^{(M-2)/2} ψ` for the
/// singular kind so that the growth at the origin does not mask outer nodes.
pub(crate) fn count_nodes(r: &[f64], samples: &[f64], kind: WeightKind, dim: f64, tol: f64) -> usize {
    match kind {
        WeightKind::Standard => count_sign_changes(samples, tol),
        WeightKind::Singular => {
            let a = (dim - 2.0) / 2.0;
            let u: Vec<f64> = r.iter().zip(samples).map(|(r, s)| r.powf(a) * s).collect();
            count_sign_changes(&u, tol)
        }
    }
}

/// Sign changes strictly inside `(0, 1)`, ignoring samples below
/// `node_tol` times the peak (of `r^{(M-2)/2} ψ` for the singular kind).
pub fn count_interior_nodes(pair: &EigenPair) -> usize {
    count_nodes(
        &pair.r,
        &pair.samples,
        pair.kind,
        pair.dim,
        SpectralConfig::default().node_tol,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub theta_fit: f64,
    pub theta_analytic: f64,
    pub points: usize,
}

/// Least-squares slope of `ln|ψ|` against `ln r` over `window`.
pub fn fit_decay_exponent(pair: &EigenPair, m: f64, window: (f64, f64)) -> Result<DecayFit, SpectralError> {
    let (lo, hi) = window;
    let bad = SpectralError::BadWindow { lo, hi };
    if !(lo > 0.0 && hi > lo) {
        return Err(bad);
    }
    let pts: Vec<(f64, f64)> = pair
        .r
        .iter()
        .zip(&pair.samples)
        .filter(|(r, _)| **r >= lo && **r <= hi)
        .map(|(&r, &v)| (r, v))
        .collect();
    if pts.len() < 3 {
        return Err(bad);
    }
    let sign = pts[0].1.signum();
    if pts.iter().any(|&(_, v)| v == 0.0 || v.signum() != sign) {
        return Err(bad);
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (r, v)| (a + r.ln(), b + v.abs().ln()));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (r, v)| {
        let dx = r.ln() - mx;
        (a + dx * (v.abs().ln() - my), b + dx * dx)
    });
    Ok(DecayFit {
        theta_fit: sxy / sxx,
        theta_analytic: decay_exponent(m, pair.value),
        points: pts.len(),
    })
}

/// Samples below this fraction of the peak are treated as round-off.
const DECAY_FLOOR: f64 = 1e-60;

/// `[max(e^{-0.6 X}, r_floor), min(1e-3, r_node/10, r_a)]` with `r_node` the
/// innermost interior node, `r_a² sup|a| = 1e-6` and `r_floor` the first
/// radius where `|ψ|` clears the round-off floor; `None` when empty.
pub fn default_decay_window(pair: &EigenPair, x_max: f64, sup_potential: f64) -> Option<(f64, f64)> {
    let sup = pair.samples.iter().fold(0.0f64, |a, s| a.max(s.abs()));
    let cut = SpectralConfig::default().node_tol * sup;
    let mut first_node = 1.0;
    let mut last = 0.0f64;
    for (r, s) in pair.r.iter().zip(&pair.samples) {
        if s.abs() <= cut {
            continue;
        }
        if last != 0.0 && s.signum() != last {
            first_node = *r;
            break;
        }
        last = s.signum();
    }
    let floor = pair
        .r
        .iter()
        .zip(&pair.samples)
        .find(|(_, s)| s.abs() > DECAY_FLOOR * sup)
        .map_or(1.0, |(r, _)| *r);
    let lo = (-0.6 * x_max).exp().max(floor);
    let r_a = if sup_potential > 0.0 {
        (1e-6 / sup_potential).sqrt()
    } else {
        1.0
    };
    let hi = (0.1 * first_node).min(1e-3).min(r_a);
    (hi > lo).then_some((lo, hi))
}

fn same_problem(pi: &EigenPair, pj: &EigenPair) -> Result<(), SpectralError> {
    if Arc::ptr_eq(&pi.operator, &pj.operator) {
        Ok(())
    } else {
        Err(SpectralError::DifferentProblems)
    }
}

/// `∫ w ψ_i ψ_j` (weight of the problem's kind) in the discrete inner product
/// of the solver.
pub fn weighted_inner_product(pi: &EigenPair, pj: &EigenPair) -> Result<f64, SpectralError> {
    same_problem(pi, pj)?;
    Ok(pi
        .operator
        .mass
        .iter()
        .zip(pi.vector.iter().zip(&pj.vector))
        .map(|(w, (a, b))| w * a * b)
        .sum())
}

/// Largest defect of the summed cross identity
/// `G(r) = (ν_i − ν_j) ∫ w ψ_i ψ_j`, with `G` the weighted Wronskian, in the
/// discrete summation-by-parts form of the solver.
pub fn picone_residual(pi: &EigenPair, pj: &EigenPair, m: f64) -> Result<f64, SpectralError> {
    same_problem(pi, pj)?;
    if (m - pi.dim).abs() > 1e-12 * m.abs().max(1.0) {
        return Err(SpectralError::InvalidInput(format!(
            "M = {m} does not match the eigenpairs (M = {})",
            pi.dim
        )));
    }
    let op = &pi.operator;
    let (vi, vj) = (&pi.vector, &pj.vector);
    let dnu = pi.grid_value - pj.grid_value;
    let mut acc = 0.0;
    let mut worst = 0.0f64;
    for k in 0..op.len() {
        acc += dnu * op.mass[k] * vi[k] * vj[k];
        let g = if k + 1 < op.len() {
            op.off[k] * (vi[k + 1] * vj[k] - vi[k] * vj[k + 1])
        } else {
            0.0
        };
        worst = worst.max((g - acc).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    #[serde(rename = "M")]
    pub dim: f64,
    pub integrals: WeightedIntegrals,
    /// `∫ r^{M-1} w² ≤ ∫ r^{M-1} w'² / (M−1)`.
    pub poincare_ok: bool,
    /// Largest ratio `|w(t)| / bound(t)` over the sample radii in `(0, 1)`.
    pub radial_lemma_ratio: f64,
    pub radial_lemma_ok: bool,
    /// `((M−2)/2)² ∫ r^{M-3} w² ≤ ∫ r^{M-1} w'²`, only for `M > 2`.
    pub hardy_ok: Option<bool>,
}

impl InequalityReport {
    pub fn all_ok(&self) -> bool {
        self.poincare_ok && self.radial_lemma_ok && self.hardy_ok.unwrap_or(true)
    }
}

fn holds(lhs: f64, rhs: f64, tol: f64) -> bool {
    lhs <= rhs + tol * (lhs.abs() + rhs.abs()).max(f64::MIN_POSITIVE)
}

/// Poincaré, radial-lemma and Hardy inequalities for `w` with `w(1) = 0`,
/// each allowed a relative slack `tol`.
pub fn inequality_report(w: &SampledFunction, m: f64, tol: f64) -> Result<InequalityReport, SpectralError> {
    let ints = weighted_integrals(w, m)?;
    let norm = ints.grad.sqrt();
    let mut ratio = 0.0f64;
    let mut radial_ok = true;
    for (&t, &v) in w.r.iter().zip(&w.values) {
        if !(t > 0.0 && t < 1.0) {
            continue;
        }
        let bound = if m > 2.0 {
            norm * t.powf(-(m - 2.0) / 2.0) / (m - 2.0).sqrt()
        } else {
            norm * (-t.ln()).sqrt()
        };
        radial_ok &= holds(v.abs(), bound, tol);
        if bound > 0.0 {
            ratio = ratio.max(v.abs() / bound);
        }
    }
    Ok(InequalityReport {
        dim: m,
        integrals: ints,
        poincare_ok: holds(ints.mass, ints.grad / (m - 1.0), tol),
        radial_lemma_ratio: ratio,
        radial_lemma_ok: radial_ok,
        hardy_ok: (m > 2.0).then(|| holds(hardy_threshold(m) * ints.singular_mass, ints.grad, tol)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Potential;

    fn linear(n: usize) -> SampledFunction {
        let r: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let values = r.iter().map(|x| 1.0 - x).collect();
        SampledFunction::new(r, values)
    }

    #[test]
    fn rayleigh_of_linear_hat() {
        let prob = WeightedSLProblem::new(3.0, Potential::Zero, WeightKind::Standard);
        for n in [1, 7, 100] {
            let q = rayleigh_quotient(&linear(n), &prob).unwrap();
            assert!((q - 10.0).abs() < 1e-12, "n={n} q={q}");
        }
    }

    #[test]
    fn integrals_of_linear_hat() {
        // M = 4: ∫r³ = 1/4, ∫r³(1−r)² = 1/60, ∫r(1−r)² = 1/12
        let ints = weighted_integrals(&linear(13), 4.0).unwrap();
        assert!((ints.grad - 0.25).abs() < 1e-14);
        assert!((ints.mass - 1.0 / 60.0).abs() < 1e-14);
        assert!((ints.singular_mass - 1.0 / 12.0).abs() < 1e-14);
    }

    #[test]
    fn singular_mass_diverges_at_m2() {
        let ints = weighted_integrals(&linear(4), 2.0).unwrap();
        assert!(ints.singular_mass.is_infinite());
    }

    #[test]
    fn constant_extension_below_first_sample() {
        // w = 1 on [0, 0.5], linear to 0 at 1, M = 3: ∫r²w² = 1/24 + ∫_{.5}^1 r²(2−2r)²
        let w = SampledFunction::new(vec![0.5, 1.0], vec![1.0, 0.0]);
        let ints = weighted_integrals(&w, 3.0).unwrap();
        let tail = 4.0 * ((1.0 - 0.125) / 3.0 - (1.0 - 0.0625) / 2.0 + (1.0 - 0.03125) / 5.0);
        assert!((ints.mass - (1.0 / 24.0 + tail)).abs() < 1e-14);
        assert!((ints.grad - 4.0 * (1.0 - 0.125) / 3.0).abs() < 1e-14);
    }

    #[test]
    fn potential_term_enters_numerator() {
        let w = linear(50);
        let base = WeightedSLProblem::new(3.0, Potential::Zero, WeightKind::Standard);
        let shifted = WeightedSLProblem::new(3.0, Potential::Constant(2.5), WeightKind::Standard);
        let q0 = rayleigh_quotient(&w, &base).unwrap();
        let q1 = rayleigh_quotient(&w, &shifted).unwrap();
        assert!((q0 - q1 - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let prob = WeightedSLProblem::new(3.0, Potential::Zero, WeightKind::Standard);
        let zero = SampledFunction::new(vec![0.0, 1.0], vec![0.0, 0.0]);
        assert!(matches!(
            rayleigh_quotient(&zero, &prob),
            Err(SpectralError::ZeroDenominator)
        ));
        let open = SampledFunction::new(vec![0.0, 1.0], vec![1.0, 1.0]);
        assert!(rayleigh_quotient(&open, &prob).is_err());
        let unsorted = SampledFunction::new(vec![0.5, 0.2, 1.0], vec![1.0, 1.0, 0.0]);
        assert!(weighted_integrals(&unsorted, 3.0).is_err());
    }

    #[test]
    fn sign_changes_ignore_noise() {
        assert_eq!(count_sign_changes(&[1.0, 0.5, 1e-12, -1e-12, 0.2, 0.0], 1e-8), 0);
        assert_eq!(count_sign_changes(&[1.0, -0.5, 0.3, 0.0], 1e-8), 2);
        assert_eq!(count_sign_changes(&[-1.0, -2.0, 0.0], 1e-8), 0);
    }

    #[test]
    fn inequalities_on_hat() {
        for m in [2.0, 3.0, 5.5] {
            let rep = inequality_report(&linear(40), m, 1e-9).unwrap();
            assert!(rep.all_ok(), "M={m}: {rep:?}");
            assert_eq!(rep.hardy_ok.is_some(), m > 2.0);
        }
    }
}
