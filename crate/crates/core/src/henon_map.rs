//! The Hénon change of variables `t = r^{(2+α)/2}` and the relations it
//! induces between the N-dimensional and the M-dimensional problems.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("eigenvalue {nu_hat} is not below the threshold {threshold}")]
    AboveThreshold { nu_hat: f64, threshold: f64 },
}

/// `(N, α) ↦ (M, c, κ)` with `M = 2(N+α)/(2+α)`, `c = (2/(2+α))²`,
/// `κ = (2+α)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionMap {
    #[serde(rename = "N")]
    pub n: u32,
    pub alpha: f64,
    #[serde(rename = "M")]
    pub m: f64,
    /// Coupling `c = (2/(2+α))²`.
    pub c: f64,
    /// Radius-map exponent `κ = (2+α)/2`.
    pub exponent: f64,
}

impl DimensionMap {
    /// Hardy threshold `((M-2)/2)²` of the transformed problem.
    pub fn threshold(&self) -> f64 {
        let a = (self.m - 2.0) / 2.0;
        a * a
    }

    /// Hardy threshold `((N-2)/2)²` of the physical problem.
    pub fn physical_threshold(&self) -> f64 {
        let a = (self.n as f64 - 2.0) / 2.0;
        a * a
    }
}

pub fn generalized_dimension(n: u32, alpha: f64) -> Result<DimensionMap, MapError> {
    if n < 2 {
        return Err(MapError::InvalidInput(format!("N = {n} must be >= 2")));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(MapError::InvalidInput(format!(
            "alpha = {alpha} must be finite and >= 0"
        )));
    }
    let nf = n as f64;
    let m = if n == 2 {
        2.0
    } else {
        2.0 * (nf + alpha) / (2.0 + alpha)
    };
    let k = (2.0 + alpha) / 2.0;
    Ok(DimensionMap {
        n,
        alpha,
        m,
        c: 1.0 / (k * k),
        exponent: k,
    })
}

/// `Λ̂ = ((2+α)/2)² ν̂`.
pub fn eigenvalue_pullback(nu_hat: f64, map: &DimensionMap) -> Result<f64, MapError> {
    let threshold = map.threshold();
    if !(nu_hat < threshold) {
        return Err(MapError::AboveThreshold { nu_hat, threshold });
    }
    Ok(map.exponent * map.exponent * nu_hat)
}

/// `J = κ (√(A² − ν̂) − A)` with `A = (M−2)/2`, evaluated without
/// cancellation as `κ(−ν̂)/(√(A² − ν̂) + A)`.
pub fn angular_threshold(nu_hat: f64, map: &DimensionMap) -> f64 {
    if nu_hat == 0.0 {
        return 0.0;
    }
    let a = (map.m - 2.0) / 2.0;
    let root = (a * a - nu_hat).sqrt();
    map.exponent * (-nu_hat) / (root + a)
}

/// Targets `−c j(N−2+j)` for `j = 1..=j_max`.
pub fn degeneracy_targets(map: &DimensionMap, j_max: u32) -> Vec<f64> {
    (1..=j_max)
        .map(|j| {
            let j = j as f64;
            -map.c * j * (map.n as f64 - 2.0 + j)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// `r ↦ t = r^κ`
    ToEmden,
    /// `t ↦ r = t^{1/κ}`
    ToPhysical,
}

pub fn map_radius(x: f64, map: &DimensionMap, direction: Direction) -> f64 {
    match direction {
        Direction::ToEmden => x.powf(map.exponent),
        Direction::ToPhysical => x.powf(1.0 / map.exponent),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn generalized_dimension_examples() {
        assert!(close(generalized_dimension(3, 2.0).unwrap().m, 2.5, 1e-15));
        for n in 2..8 {
            assert_eq!(generalized_dimension(n, 0.0).unwrap().m, n as f64);
        }
        for a in [0.0, 0.5, 3.0, 17.0] {
            assert_eq!(generalized_dimension(2, a).unwrap().m, 2.0);
        }
        assert!(generalized_dimension(1, 0.0).is_err());
        assert!(generalized_dimension(3, -0.1).is_err());
    }

    #[test]
    fn pullback_examples() {
        let id = generalized_dimension(4, 0.0).unwrap();
        assert_eq!(eigenvalue_pullback(-0.7, &id).unwrap(), -0.7);
        let map = generalized_dimension(3, 2.0).unwrap();
        assert_eq!(eigenvalue_pullback(-1.0, &map).unwrap(), -4.0);
        let just_below = map.threshold() - 1e-9;
        let lam = eigenvalue_pullback(just_below, &map).unwrap();
        assert!(lam < map.physical_threshold());
        assert!(eigenvalue_pullback(map.threshold(), &map).is_err());
    }

    #[test]
    fn angular_threshold_examples() {
        let map = generalized_dimension(3, 0.0).unwrap();
        assert_eq!(angular_threshold(0.0, &map), 0.0);
        let j = angular_threshold(-2.5, &map);
        assert!(close(j, (0.25f64 + 2.5).sqrt() - 0.5, 1e-15));
        assert!(close(j, 1.158_312_395_177_7, 1e-12));
        for (n, a) in [(3, 2.0), (5, 1.0), (2, 4.0), (7, 2.7)] {
            let map = generalized_dimension(n, a).unwrap();
            let j = angular_threshold(-(map.m - 1.0), &map);
            assert!(close(j, (2.0 + a) / 2.0, 1e-14), "{n} {a} {j}");
        }
    }

    #[test]
    fn degeneracy_target_examples() {
        assert_eq!(
            degeneracy_targets(&generalized_dimension(3, 0.0).unwrap(), 1),
            vec![-2.0]
        );
        assert_eq!(
            degeneracy_targets(&generalized_dimension(2, 0.0).unwrap(), 1),
            vec![-1.0]
        );
        assert_eq!(
            degeneracy_targets(&generalized_dimension(3, 2.0).unwrap(), 1),
            vec![-0.5]
        );
    }

    #[test]
    fn map_radius_examples() {
        let map = generalized_dimension(3, 2.0).unwrap();
        assert_eq!(map_radius(1.0, &map, Direction::ToEmden), 1.0);
        assert!(close(map_radius(0.25, &map, Direction::ToEmden), 0.0625, 1e-15));
        assert!(close(map_radius(0.25, &map, Direction::ToPhysical), 0.5, 1e-15));
    }

    proptest! {
        #[test]
        fn dimension_invariants(n in 2u32..12, alpha in 0.0f64..20.0) {
            let map = generalized_dimension(n, alpha).unwrap();
            prop_assert!(map.m >= 2.0 - 1e-12 && map.m <= n as f64 + 1e-12);
            prop_assert!(close(map.c * map.exponent * map.exponent, 1.0, 1e-14));
            let scaled = map.exponent * map.exponent * map.threshold();
            prop_assert!(close(scaled, map.physical_threshold(), 1e-12));
        }

        #[test]
        fn radius_round_trip(n in 2u32..8, alpha in 0.0f64..10.0, r in 0.0f64..=1.0) {
            let map = generalized_dimension(n, alpha).unwrap();
            let t = map_radius(r, &map, Direction::ToEmden);
            let back = map_radius(t, &map, Direction::ToPhysical);
            prop_assert!((back - r).abs() < 1e-14);
        }

        #[test]
        fn targets_map_to_integers(n in 2u32..10, alpha in 0.0f64..10.0) {
            let map = generalized_dimension(n, alpha).unwrap();
            let targets = degeneracy_targets(&map, 10);
            for (i, nu) in targets.iter().enumerate() {
                let j = angular_threshold(*nu, &map);
                prop_assert!(close(j, (i + 1) as f64, 1e-12), "j={} got {}", i + 1, j);
            }
            prop_assert!(targets.windows(2).all(|w| w[1] < w[0]));
        }

        #[test]
        fn threshold_monotone(n in 2u32..8, alpha in 0.0f64..8.0, a in -50.0f64..0.0, d in 1e-6f64..5.0) {
            let map = generalized_dimension(n, alpha).unwrap();
            let b = a - d;
            prop_assert!(angular_threshold(b, &map) > angular_threshold(a, &map));
            prop_assert!(angular_threshold(a, &map) >= 0.0);
        }

        #[test]
        fn alpha_zero_matches_physical_formula(n in 3u32..9, nu in -40.0f64..0.0) {
            let map = generalized_dimension(n, 0.0).unwrap();
            let lam = eigenvalue_pullback(nu, &map).unwrap();
            let a = (n as f64 - 2.0) / 2.0;
            let direct = (a * a - lam).sqrt() - a;
            prop_assert!(close(angular_threshold(nu, &map), direct, 1e-12));
        }
    }
}
