//! Morse-index assembly: Laplace–Beltrami data, the double sum over radial
//! singular eigenvalues and spherical harmonics, symmetric indices,
//! degeneracy scans, lower bounds and closed-form asymptotic predictions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::henon_map::{angular_threshold, eigenvalue_pullback, DimensionMap};
use crate::radial_ode::{RadialProfile, Variable};
use crate::spectral::{EigenPair, Spectrum, WeightKind};

#[derive(Debug, Error, PartialEq)]
pub enum MorseError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("spectrum must be of singular kind")]
    WrongKind,
    #[error("spectrum dimension M = {spectrum} does not match the map (M = {map})")]
    DimensionMismatch { spectrum: f64, map: f64 },
    #[error("eigenvalues {values:?} lie within the margin of the threshold")]
    NearThreshold { values: Vec<f64> },
    #[error("symmetry table '{label}' covers j < {len} but j = {needed} is required")]
    TableTooShort { label: String, needed: u32, len: usize },
    #[error("no asymptotic formula for N = {n}, m = {m}")]
    Unsupported { n: u32, m: usize },
    #[error("alpha = {alpha} is on the exceptional sequence (n = {index})")]
    ExceptionalAlpha { alpha: f64, index: u64 },
}

/// `λ_j = j(N+j−2)`.
pub fn beltrami_eigen(n: u32, j: u32) -> f64 {
    let (n, j) = (n as f64, j as f64);
    j * (n + j - 2.0)
}

/// `N_j = (N+2j−2)(N+j−3)! / ((N−2)! j!)`, with `N_0 = 1`.
///
/// Panics if the value does not fit in a `u128`.
pub fn beltrami_multiplicity(n: u32, j: u32) -> u128 {
    assert!(n >= 2, "N = {n} must be >= 2");
    if j == 0 {
        return 1;
    }
    if n == 2 {
        return 2;
    }
    // (N+j−3)!/((N−3)! j!) = C(N+j−3, j), exact at every step
    let mut binom: u128 = 1;
    for i in 1..=j as u128 {
        binom = binom
            .checked_mul(n as u128 - 3 + i)
            .expect("multiplicity overflows u128")
            / i;
    }
    (n as u128 + 2 * j as u128 - 2)
        .checked_mul(binom)
        .expect("multiplicity overflows u128")
        / (n as u128 - 2)
}

/// `Σ_{j=lo}^{hi} N_j`.
fn multiplicity_sum(n: u32, lo: u32, hi: u32) -> u128 {
    (lo..=hi).map(|j| beltrami_multiplicity(n, j)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeltramiRow {
    pub j: u32,
    pub lambda: f64,
    pub multiplicity: u128,
}

/// Rows `j = 0..=j_max` of `(λ_j, N_j)` on the sphere `S^{N−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeltramiTable {
    #[serde(rename = "N")]
    pub n: u32,
    pub rows: Vec<BeltramiRow>,
}

impl BeltramiTable {
    pub fn new(n: u32, j_max: u32) -> Self {
        Self {
            n,
            rows: (0..=j_max)
                .map(|j| BeltramiRow {
                    j,
                    lambda: beltrami_eigen(n, j),
                    multiplicity: beltrami_multiplicity(n, j),
                })
                .collect(),
        }
    }

    /// Smallest `j` with `c λ_j > |ν̂_min| + 1`, which bounds every
    /// contributing harmonic.
    pub fn covering_j(map: &DimensionMap, nu_min: f64) -> u32 {
        let mut j = 0;
        while map.c * beltrami_eigen(map.n, j) <= nu_min.abs() + 1.0 {
            j += 1;
        }
        j
    }
}

/// `J = √(((N−2)/2)² − Λ̂) − (N−2)/2` in the physical variables.
pub fn angular_threshold_physical(lambda_hat: f64, n: u32) -> f64 {
    let a = (n as f64 - 2.0) / 2.0;
    (a * a - lambda_hat).sqrt() - a
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SymmetryRule {
    /// The full orthogonal group: only radial harmonics are invariant.
    FullRotation,
    /// Rotations by `2π/q` in the plane (`N = 2`).
    Cyclic { q: u32 },
    /// The trivial group: every harmonic counts.
    Trivial,
    /// Explicit `N_j^G` for `j = 0..table.len()`.
    Table { table: Vec<u128> },
}

/// Multiplicities `N_j^G` of `G`-invariant spherical harmonics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryMultiplicity {
    pub label: String,
    pub rule: SymmetryRule,
}

impl SymmetryMultiplicity {
    pub fn full_rotation() -> Self {
        Self {
            label: "full".into(),
            rule: SymmetryRule::FullRotation,
        }
    }

    pub fn cyclic(q: u32) -> Result<Self, MorseError> {
        if q == 0 {
            return Err(MorseError::InvalidInput("cyclic order q must be >= 1".into()));
        }
        Ok(Self {
            label: format!("cyclic-{q}"),
            rule: SymmetryRule::Cyclic { q },
        })
    }

    pub fn trivial() -> Self {
        Self {
            label: "trivial".into(),
            rule: SymmetryRule::Trivial,
        }
    }

    pub fn table(label: impl Into<String>, table: Vec<u128>) -> Result<Self, MorseError> {
        if table.first() != Some(&1) {
            return Err(MorseError::InvalidInput(
                "a symmetry table must start with N_0^G = 1".into(),
            ));
        }
        Ok(Self {
            label: label.into(),
            rule: SymmetryRule::Table { table },
        })
    }

    /// `full`, `trivial` or `cyclic-q`.
    pub fn parse(label: &str) -> Result<Self, MorseError> {
        match label {
            "full" => Ok(Self::full_rotation()),
            "trivial" => Ok(Self::trivial()),
            _ => {
                let q = label
                    .strip_prefix("cyclic-")
                    .and_then(|q| q.parse::<u32>().ok())
                    .ok_or_else(|| {
                        MorseError::InvalidInput(format!(
                            "unknown symmetry '{label}' (expected full, trivial or cyclic-q)"
                        ))
                    })?;
                Self::cyclic(q)
            }
        }
    }

    /// `N_j^G` on `S^{N−1}`, `None` beyond an explicit table.
    pub fn multiplicity(&self, n: u32, j: u32) -> Result<Option<u128>, MorseError> {
        Ok(match &self.rule {
            SymmetryRule::FullRotation => Some(u128::from(j == 0)),
            SymmetryRule::Trivial => Some(beltrami_multiplicity(n, j)),
            SymmetryRule::Cyclic { q } => {
                if n != 2 {
                    return Err(MorseError::InvalidInput(format!(
                        "the cyclic table applies to N = 2, not N = {n}"
                    )));
                }
                Some(match j {
                    0 => 1,
                    j if j % q == 0 => 2,
                    _ => 0,
                })
            }
            SymmetryRule::Table { table } => table.get(j as usize).copied(),
        })
    }
}

/// One radial singular eigenvalue and the harmonics it contributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenContribution {
    pub index: usize,
    pub nu_hat: f64,
    pub lambda_hat_rad: f64,
    #[serde(rename = "J")]
    pub j_threshold: f64,
    pub contributing_j: Vec<u32>,
    pub contribution: u128,
    /// `J` is within rounding of an integer, so the strict inequality
    /// `j < J` is numerically undecided.
    pub integer_collision: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyHit {
    /// 1-based eigenvalue index.
    pub k: usize,
    pub j: u32,
    pub target: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    pub tolerance: f64,
    /// `None` when `N = 2` and no standard spectrum was supplied.
    pub radially_degenerate: Option<bool>,
    pub radial_index: Option<usize>,
    pub nonradial_hits: Vec<DegeneracyHit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LowerBound {
    pub general: u128,
    pub with_f3: Option<u128>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub value: u128,
    /// `α` is within `1e-6` of an even integer without being one to `1e-12`.
    pub near_even: bool,
    /// The integer part of `(1 + α/2)β` would change within the stated
    /// precision of `β² ≈ 26.9`.
    pub unstable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseReport {
    pub map: DimensionMap,
    pub radial_morse: usize,
    pub per_eigenvalue: Vec<EigenContribution>,
    pub total: u128,
    pub degeneracy: DegeneracyReport,
    pub bounds: Option<LowerBound>,
    pub prediction: Option<Prediction>,
}

/// Default tolerance on the `ν̂` scale for degeneracy matches.
pub const DEGENERACY_TOL: f64 = 1e-6;

fn check_spectrum(spec: &Spectrum, map: &DimensionMap) -> Result<(), MorseError> {
    if spec.kind != WeightKind::Singular {
        return Err(MorseError::WrongKind);
    }
    if (spec.dim - map.m).abs() > 1e-12 * map.m.max(1.0) {
        return Err(MorseError::DimensionMismatch {
            spectrum: spec.dim,
            map: map.m,
        });
    }
    if !spec.near_threshold.is_empty() {
        return Err(MorseError::NearThreshold {
            values: spec.near_threshold.clone(),
        });
    }
    Ok(())
}

/// `m(u) = Σ_i Σ_{0 ≤ j < J_i} N_j` over the negative singular eigenvalues.
pub fn morse_index(spec: &Spectrum, map: &DimensionMap) -> Result<MorseReport, MorseError> {
    check_spectrum(spec, map)?;
    morse_index_from_values(&spec.values(), map)
}

/// [`morse_index`] on bare singular eigenvalues `ν̂_1 < ν̂_2 < …` of the
/// problem in dimension `map.m`.
pub fn morse_index_from_values(values: &[f64], map: &DimensionMap) -> Result<MorseReport, MorseError> {
    if values.windows(2).any(|w| !(w[1] > w[0])) || values.iter().any(|v| !v.is_finite()) {
        return Err(MorseError::InvalidInput(
            "eigenvalues must be finite and increasing".into(),
        ));
    }
    let mut per = Vec::new();
    for (i, nu) in values.iter().copied().enumerate().filter(|(_, v)| *v < 0.0) {
        let lambda = eigenvalue_pullback(nu, map).map_err(|e| MorseError::InvalidInput(e.to_string()))?;
        let jt = angular_threshold(nu, map);
        let contributing: Vec<u32> = (0..).take_while(|&j| (j as f64) < jt).collect();
        let contribution = contributing
            .iter()
            .map(|&j| beltrami_multiplicity(map.n, j))
            .sum();
        let nearest = jt.round();
        per.push(EigenContribution {
            index: i + 1,
            nu_hat: nu,
            lambda_hat_rad: lambda,
            j_threshold: jt,
            contributing_j: contributing,
            contribution,
            integer_collision: (jt - nearest).abs() <= 1e-9 * nearest.max(1.0),
        });
    }
    Ok(MorseReport {
        map: *map,
        radial_morse: per.len(),
        total: per.iter().map(|c| c.contribution).sum(),
        per_eigenvalue: per,
        degeneracy: scan(values, None, map, DEGENERACY_TOL),
        bounds: None,
        prediction: None,
    })
}

/// Eigenvalues closer than this to `−(M−1)` are re-evaluated by [`edge_gap`].
pub const EDGE_WINDOW: f64 = 1e-5;

/// `ν̂ + (M−1) = −ψ'(1) v'(1) / ∫₀¹ t^{M−3} ψ v' dt` for a singular eigenpair
/// of the linearization about the Emden profile `v`.
///
/// `w = v'` solves the linearized equation at `−(M−1)` with `w(1) ≠ 0`, so
/// Green's identity between `ψ` and `w` leaves only the boundary term. The
/// ratio keeps the relative accuracy of its factors, which resolves
/// eigenvalues much closer to `−(M−1)` than the spectral tolerance.
pub fn edge_gap(pair: &EigenPair, profile: &RadialProfile) -> Result<f64, MorseError> {
    if pair.kind != WeightKind::Singular {
        return Err(MorseError::WrongKind);
    }
    if profile.variable != Variable::Emden {
        return Err(MorseError::InvalidInput(
            "profile must be in the Emden variable".into(),
        ));
    }
    let m = pair.dim;
    if (m - profile.dim).abs() > 1e-12 * m {
        return Err(MorseError::DimensionMismatch {
            spectrum: m,
            map: profile.dim,
        });
    }
    let n = pair.r.len();
    if n < 3 || pair.r[n - 1] != 1.0 {
        return Err(MorseError::InvalidInput(
            "eigenfunction must be sampled up to t = 1".into(),
        ));
    }
    // samples are uniform in x = −ln t
    let x: Vec<f64> = pair.r.iter().map(|t| -t.ln()).collect();
    let h = x[n - 2];
    if x.windows(2).any(|w| ((w[0] - w[1]) - h).abs() > 1e-6 * h) {
        return Err(MorseError::InvalidInput(
            "eigenfunction grid is not uniform in ln t".into(),
        ));
    }
    let f = |k: usize| {
        let t = pair.r[k];
        t.powf(m - 2.0) * pair.samples[k] * profile.eval(t).1
    };
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let simpson: f64 = (0..=even)
        .map(|j| {
            let w = if j == 0 || j == even {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * f(n - 1 - j)
        })
        .sum();
    let mut integral = simpson * h / 3.0;
    if intervals % 2 == 1 {
        integral += 0.5 * h * (f(0) + f(1));
    }
    if !(integral.abs() > 0.0) || !integral.is_finite() {
        return Err(MorseError::InvalidInput("cross integral vanishes".into()));
    }
    Ok(-pair.boundary_slope * profile.eval(1.0).1 / integral)
}

/// Eigenvalues of `spec`, with those within [`EDGE_WINDOW`] of `−(M−1)`
/// replaced by `−(M−1) + edge_gap`.
pub fn edge_refined_values(spec: &Spectrum, profile: &RadialProfile) -> Result<Vec<f64>, MorseError> {
    let edge = -(spec.dim - 1.0);
    spec.pairs
        .iter()
        .map(|p| {
            if (p.value - edge).abs() < EDGE_WINDOW {
                Ok(edge + edge_gap(p, profile)?)
            } else {
                Ok(p.value)
            }
        })
        .collect()
}

/// [`morse_index`] on [`edge_refined_values`].
pub fn morse_index_refined(
    spec: &Spectrum,
    profile: &RadialProfile,
    map: &DimensionMap,
) -> Result<MorseReport, MorseError> {
    check_spectrum(spec, map)?;
    morse_index_from_values(&edge_refined_values(spec, profile)?, map)
}

fn scan(values: &[f64], standard: Option<&[f64]>, map: &DimensionMap, tol: f64) -> DegeneracyReport {
    let radial_hit = |vals: &[f64]| vals.iter().position(|v| v.abs() < tol).map(|k| k + 1);
    let (radially_degenerate, radial_index) = if map.n >= 3 {
        let k = radial_hit(values);
        (Some(k.is_some()), k)
    } else if let Some(std) = standard {
        let k = radial_hit(std);
        (Some(k.is_some()), k)
    } else {
        (None, None)
    };
    let nu_min = values.iter().copied().fold(0.0f64, f64::min);
    let j_max = BeltramiTable::covering_j(map, nu_min);
    let mut hits = Vec::new();
    for (k, &nu) in values.iter().enumerate() {
        for j in 1..=j_max {
            let target = -map.c * beltrami_eigen(map.n, j);
            let residual = (nu - target).abs();
            if residual < tol {
                hits.push(DegeneracyHit {
                    k: k + 1,
                    j,
                    target,
                    residual,
                });
            }
        }
    }
    DegeneracyReport {
        tolerance: tol,
        radially_degenerate,
        radial_index,
        nonradial_hits: hits,
    }
}

/// Radial degeneracy from `ν̂_k ≈ 0` (`N ≥ 3`) or from the standard spectrum
/// (`N = 2`), and nonradial matches `ν̂_k ≈ −c j(N−2+j)`.
pub fn degeneracy_scan(
    spec_singular: &Spectrum,
    spec_standard: &Spectrum,
    map: &DimensionMap,
    tol: f64,
) -> Result<DegeneracyReport, MorseError> {
    if spec_standard.kind != WeightKind::Standard {
        return Err(MorseError::InvalidInput(
            "second spectrum must be of standard kind".into(),
        ));
    }
    if !(tol >= 0.0) {
        return Err(MorseError::InvalidInput(format!("tolerance {tol} must be >= 0")));
    }
    if spec_singular.kind != WeightKind::Singular {
        return Err(MorseError::WrongKind);
    }
    degeneracy_scan_values(&spec_singular.values(), &spec_standard.values(), map, tol)
}

/// [`degeneracy_scan`] on bare eigenvalues.
pub fn degeneracy_scan_values(
    singular: &[f64],
    standard: &[f64],
    map: &DimensionMap,
    tol: f64,
) -> Result<DegeneracyReport, MorseError> {
    if !(tol >= 0.0) {
        return Err(MorseError::InvalidInput(format!("tolerance {tol} must be >= 0")));
    }
    Ok(scan(singular, Some(standard), map, tol))
}

/// `Σ_i Σ_{j < J_i} N_j^G`.
pub fn symmetric_morse_index(report: &MorseReport, sym: &SymmetryMultiplicity) -> Result<u128, MorseError> {
    let mut total = 0;
    for c in &report.per_eigenvalue {
        for &j in &c.contributing_j {
            total += sym
                .multiplicity(report.map.n, j)?
                .ok_or_else(|| MorseError::TableTooShort {
                    label: sym.label.clone(),
                    needed: j,
                    len: match &sym.rule {
                        SymmetryRule::Table { table } => table.len(),
                        _ => 0,
                    },
                })?;
        }
    }
    Ok(total)
}

fn check_alpha(alpha: f64) -> Result<(), MorseError> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(MorseError::InvalidInput(format!(
            "alpha = {alpha} must be finite and >= 0"
        )));
    }
    Ok(())
}

/// `[α/2]` with values within `1e-12` of an integer snapped to it.
fn half_floor(alpha: f64) -> u32 {
    let h = alpha / 2.0;
    let r = h.round();
    if (h - r).abs() <= 1e-12 {
        r as u32
    } else {
        h.floor() as u32
    }
}

fn is_even(alpha: f64) -> bool {
    let h = alpha / 2.0;
    (h - h.round()).abs() <= 1e-12
}

/// `general = (m−1) Σ_{j=0}^{1+[α/2]} N_j`,
/// `with_f3 = m + (m−1) Σ_{j=1}^{1+[α/2]} N_j`.
pub fn lower_bound(n: u32, alpha: f64, m: usize, has_f3: bool) -> Result<LowerBound, MorseError> {
    check_alpha(alpha)?;
    if n < 2 || m == 0 {
        return Err(MorseError::InvalidInput(format!(
            "need N >= 2 and m >= 1 (N = {n}, m = {m})"
        )));
    }
    let top = 1 + half_floor(alpha);
    let m = m as u128;
    Ok(LowerBound {
        general: (m - 1) * multiplicity_sum(n, 0, top),
        with_f3: has_f3.then(|| m + (m - 1) * multiplicity_sum(n, 1, top)),
    })
}

/// `β² ≈ 26.9`.
pub const BETA_SQUARED: f64 = 26.9;
/// Half a unit in the last stated digit of `β²`.
const BETA_SQUARED_PRECISION: f64 = 0.05;

/// Limiting Morse index as `p` approaches the critical exponent (`N ≥ 3`) or
/// infinity (`N = 2`, two nodal zones).
pub fn asymptotic_prediction(n: u32, alpha: f64, m: usize) -> Result<Prediction, MorseError> {
    check_alpha(alpha)?;
    if n < 2 || m == 0 {
        return Err(MorseError::InvalidInput(format!(
            "need N >= 2 and m >= 1 (N = {n}, m = {m})"
        )));
    }
    let h = half_floor(alpha);
    let even = is_even(alpha);
    let near_even = !even && (alpha / 2.0 - (alpha / 2.0).round()).abs() <= 1e-6;
    let mm = m as u128;
    if n >= 3 {
        let value = if even {
            mm * multiplicity_sum(n, 0, h) + (mm - 1) * beltrami_multiplicity(n, h + 1)
        } else {
            mm * multiplicity_sum(n, 0, h + 1)
        };
        return Ok(Prediction {
            value,
            near_even,
            unstable: false,
        });
    }
    if m != 2 {
        return Err(MorseError::Unsupported { n, m });
    }
    let beta = BETA_SQUARED.sqrt();
    let arg = (1.0 + alpha / 2.0) * beta;
    let nearest = arg.round();
    if (arg - nearest).abs() <= 10.0 * f64::EPSILON * arg {
        return Err(MorseError::ExceptionalAlpha {
            alpha,
            index: nearest as u64,
        });
    }
    let spread = (1.0 + alpha / 2.0) * BETA_SQUARED_PRECISION / (2.0 * beta);
    let unstable = (arg - nearest).abs() <= spread;
    let base = if even { 2 } else { 4 };
    Ok(Prediction {
        value: base + 2 * arg.floor() as u128 + 2 * h as u128,
        near_even,
        unstable,
    })
}

impl MorseReport {
    /// Fill in the lower bounds and the asymptotic prediction for a profile
    /// with `m` nodal zones.
    pub fn with_profile(mut self, m: usize, has_f3: bool) -> Self {
        self.bounds = lower_bound(self.map.n, self.map.alpha, m, has_f3).ok();
        self.prediction = asymptotic_prediction(self.map.n, self.map.alpha, m).ok();
        self
    }

    /// Replace the degeneracy block with one that also uses the standard
    /// spectrum.
    pub fn with_standard(
        mut self,
        singular: &Spectrum,
        standard: &Spectrum,
        tol: f64,
    ) -> Result<Self, MorseError> {
        self.degeneracy = degeneracy_scan(singular, standard, &self.map, tol)?;
        Ok(self)
    }

    /// `ν̂_i < −(M−1)` for `i < m` and `−(M−1) < ν̂_m < 0`, with margin `gap`.
    pub fn ordering_holds(&self, m: usize, gap: f64) -> bool {
        let edge = -(self.map.m - 1.0);
        self.per_eigenvalue.len() >= m
            && self.per_eigenvalue.iter().take(m).enumerate().all(|(i, c)| {
                if i + 1 < m {
                    c.nu_hat < edge - gap
                } else {
                    c.nu_hat > edge + gap && c.nu_hat < -gap
                }
            })
    }

    /// `i, nu_hat, Lambda_hat, J, contribution` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,nu_hat,Lambda_hat,J,contribution\n");
        for c in &self.per_eigenvalue {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.index,
                crate::io::fmt_f64(c.nu_hat),
                crate::io::fmt_f64(c.lambda_hat_rad),
                crate::io::fmt_f64(c.j_threshold),
                c.contribution
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::henon_map::{degeneracy_targets, generalized_dimension};

    fn synthetic(map: &DimensionMap, values: &[f64]) -> Vec<f64> {
        assert!(map.m > 0.0);
        values.to_vec()
    }

    fn report(values: &[f64], map: &DimensionMap) -> Result<MorseReport, MorseError> {
        morse_index_from_values(values, map)
    }

    #[test]
    fn beltrami_values() {
        assert_eq!(beltrami_eigen(7, 0), 0.0);
        assert_eq!(beltrami_eigen(3, 1), 2.0);
        assert_eq!(beltrami_eigen(2, 5), 25.0);
        for n in 2..9 {
            assert_eq!(beltrami_multiplicity(n, 0), 1);
            let lambdas: Vec<f64> = (0..10).map(|j| beltrami_eigen(n, j)).collect();
            assert!(lambdas.windows(2).all(|w| w[1] > w[0]));
        }
        for j in 1..=20 {
            assert_eq!(beltrami_multiplicity(2, j), 2);
            assert_eq!(beltrami_multiplicity(3, j), 2 * j as u128 + 1);
        }
        // harmonic polynomials in 4 variables: (j+1)²
        for j in 0..10 {
            assert_eq!(beltrami_multiplicity(4, j), (j as u128 + 1).pow(2));
        }
        for jj in 0..15u32 {
            assert_eq!(multiplicity_sum(3, 0, jj), (jj as u128 + 1).pow(2));
        }
        assert!(beltrami_multiplicity(40, 60) > 0);
    }

    #[test]
    fn hand_evaluated_total() {
        let map = generalized_dimension(3, 0.0).unwrap();
        let rep = report(&synthetic(&map, &[-2.5, -0.5]), &map).unwrap();
        assert!((rep.per_eigenvalue[0].j_threshold - 1.158).abs() < 1e-3);
        assert!((rep.per_eigenvalue[1].j_threshold - 0.366).abs() < 1e-3);
        assert_eq!(rep.per_eigenvalue[0].contribution, 4);
        assert_eq!(rep.per_eigenvalue[1].contribution, 1);
        assert_eq!(rep.total, 5);
        assert_eq!(rep.radial_morse, 2);
    }

    #[test]
    fn empty_spectrum() {
        let map = generalized_dimension(3, 0.0).unwrap();
        let rep = report(&synthetic(&map, &[]), &map).unwrap();
        assert_eq!((rep.total, rep.radial_morse), (0, 0));
    }

    #[test]
    fn just_below_edge_reaches_j2() {
        let map = generalized_dimension(3, 2.0).unwrap();
        let rep = report(&synthetic(&map, &[-(map.m - 1.0) - 1e-6]), &map).unwrap();
        let c = &rep.per_eigenvalue[0];
        assert!(c.j_threshold > 2.0 && c.j_threshold < 2.001);
        assert_eq!(c.contributing_j, vec![0, 1, 2]);
    }

    #[test]
    fn integer_threshold_is_flagged() {
        let map = generalized_dimension(3, 0.0).unwrap();
        // J = 1 exactly at ν̂ = −(N−1)
        let rep = report(&synthetic(&map, &[-2.0]), &map).unwrap();
        assert!(rep.per_eigenvalue[0].integer_collision);
    }

    #[test]
    fn rejects_bad_spectra() {
        let map = generalized_dimension(3, 0.0).unwrap();
        let mut s = Spectrum {
            kind: WeightKind::Singular,
            dim: map.m,
            threshold: map.threshold(),
            pairs: Vec::new(),
            exhausted_below: map.threshold(),
            near_threshold: vec![0.2499999],
            x_max: None,
            grid_intervals: 0,
        };
        assert!(matches!(
            morse_index(&s, &map),
            Err(MorseError::NearThreshold { .. })
        ));
        s.near_threshold.clear();
        assert_eq!(morse_index(&s, &map).unwrap().total, 0);
        let other = generalized_dimension(3, 1.0).unwrap();
        assert!(matches!(
            morse_index(&s, &other),
            Err(MorseError::DimensionMismatch { .. })
        ));
        s.kind = WeightKind::Standard;
        assert!(matches!(morse_index(&s, &map), Err(MorseError::WrongKind)));
        assert!(report(&[-1.0, -2.0], &map).is_err());
    }

    #[test]
    fn two_threshold_formulas_agree() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let n = rng.gen_range(2..8);
            let alpha = rng.gen_range(0.0..6.0);
            let map = generalized_dimension(n, alpha).unwrap();
            let nu = map.threshold() - rng.gen_range(1e-3..80.0);
            let j1 = angular_threshold(nu, &map);
            let j2 = angular_threshold_physical(eigenvalue_pullback(nu, &map).unwrap(), n);
            assert!((j1 - j2).abs() < 1e-9 * j1.abs().max(1.0), "{n} {alpha} {nu}");
        }
    }

    #[test]
    fn degeneracy_hits() {
        let map = generalized_dimension(3, 1.0).unwrap();
        let target = degeneracy_targets(&map, 1)[0];
        let s = synthetic(&map, &[-20.3, target]);
        let rep = scan(&s, None, &map, 1e-9);
        assert_eq!(rep.nonradial_hits.len(), 1);
        assert_eq!((rep.nonradial_hits[0].k, rep.nonradial_hits[0].j), (2, 1));
        assert_eq!(rep.radially_degenerate, Some(false));
        let none = scan(&synthetic(&map, &[-20.3, -1.234567]), None, &map, 0.0);
        assert!(none.nonradial_hits.is_empty());
        let radial = scan(&synthetic(&map, &[-3.0, -1e-9]), None, &map, 1e-6);
        assert_eq!(
            (radial.radially_degenerate, radial.radial_index),
            (Some(true), Some(2))
        );
        let plane = generalized_dimension(2, 1.0).unwrap();
        assert_eq!(
            scan(&synthetic(&plane, &[-3.0]), None, &plane, 1e-6).radially_degenerate,
            None
        );
    }

    #[test]
    fn symmetric_indices() {
        let map = generalized_dimension(2, 3.0).unwrap();
        // J_1 ∈ (2.5, 3), J_2 < 2.5
        let s = synthetic(&map, &[-(map.m - 1.0) - 1.0, -0.5]);
        let rep = report(&s, &map).unwrap();
        assert_eq!(
            symmetric_morse_index(&rep, &SymmetryMultiplicity::full_rotation()).unwrap(),
            2
        );
        assert_eq!(
            symmetric_morse_index(&rep, &SymmetryMultiplicity::cyclic(4).unwrap()).unwrap(),
            2
        );
        assert_eq!(
            symmetric_morse_index(&rep, &SymmetryMultiplicity::trivial()).unwrap(),
            rep.total
        );
        let short = SymmetryMultiplicity::table("short", vec![1, 2]).unwrap();
        assert!(matches!(
            symmetric_morse_index(&rep, &short),
            Err(MorseError::TableTooShort { .. })
        ));
        assert!(SymmetryMultiplicity::table("bad", vec![0]).is_err());
        assert_eq!(
            SymmetryMultiplicity::parse("cyclic-4").unwrap(),
            SymmetryMultiplicity::cyclic(4).unwrap()
        );
        assert!(SymmetryMultiplicity::parse("dihedral").is_err());
        let map3 = generalized_dimension(3, 0.0).unwrap();
        let rep3 = report(&synthetic(&map3, &[-2.5]), &map3).unwrap();
        assert!(symmetric_morse_index(&rep3, &SymmetryMultiplicity::cyclic(2).unwrap()).is_err());
    }

    #[test]
    fn lower_bounds() {
        let b = lower_bound(3, 0.0, 2, true).unwrap();
        assert_eq!(b.with_f3, Some(5));
        assert_eq!(b.general, 4);
        assert_eq!(lower_bound(2, 3.0, 2, true).unwrap().with_f3, Some(6));
        let one = lower_bound(5, 2.7, 1, true).unwrap();
        assert_eq!((one.general, one.with_f3), (0, Some(1)));
        assert_eq!(lower_bound(3, 0.0, 2, false).unwrap().with_f3, None);
        assert!(lower_bound(3, 0.0, 0, true).is_err());
        let mut prev = 0;
        for k in 0..12 {
            let g = lower_bound(3, k as f64 * 0.5, 3, false).unwrap().general;
            assert!(g >= prev);
            prev = g;
        }
        assert!(
            lower_bound(3, 40.0, 2, false).unwrap().general > lower_bound(3, 20.0, 2, false).unwrap().general
        );
    }

    #[test]
    fn predictions() {
        assert_eq!(asymptotic_prediction(3, 0.0, 2).unwrap().value, 5);
        assert_eq!(asymptotic_prediction(3, 1.0, 2).unwrap().value, 8);
        let n2 = asymptotic_prediction(2, 0.0, 2).unwrap();
        assert_eq!(n2.value, 12);
        assert!(!n2.unstable);
        assert!(matches!(
            asymptotic_prediction(2, 0.0, 3),
            Err(MorseError::Unsupported { .. })
        ));
        let beta = BETA_SQUARED.sqrt();
        let exceptional = 2.0 * (7.0 / beta - 1.0);
        assert!(matches!(
            asymptotic_prediction(2, exceptional, 2),
            Err(MorseError::ExceptionalAlpha { index: 7, .. })
        ));
        assert!(asymptotic_prediction(2, exceptional + 1e-4, 2).unwrap().unstable);
        assert!(asymptotic_prediction(3, 2.0 + 1e-8, 2).unwrap().near_even);
        // even branch at α = 2, N = 3: m(N_0+N_1) + (m−1)N_2 = 2·4 + 5
        assert_eq!(asymptotic_prediction(3, 2.0, 2).unwrap().value, 13);
    }

    #[test]
    fn csv_table() {
        let map = generalized_dimension(3, 0.0).unwrap();
        let rep = report(&synthetic(&map, &[-2.5, -0.5]), &map).unwrap();
        let csv = rep.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("i,nu_hat,Lambda_hat,J,contribution\n1,"));
    }

    #[test]
    fn ordering_check() {
        let map = generalized_dimension(3, 0.0).unwrap();
        let rep = report(&synthetic(&map, &[-5.0, -1.0]), &map).unwrap();
        assert!(rep.ordering_holds(2, 1e-6));
        assert!(!rep.ordering_holds(1, 1e-6));
        assert!(!rep.ordering_holds(3, 1e-6));
    }
}
