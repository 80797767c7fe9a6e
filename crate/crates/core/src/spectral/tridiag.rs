//! Symmetric tridiagonal kernels: Sturm counts, bisection, shifted solves,
//! inverse iteration and the implicit QL sweep.

/// Symmetric tridiagonal matrix; `off[i]` couples rows `i` and `i+1`.
#[derive(Debug, Clone)]
pub(crate) struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE * 1e4;
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let e = self.off[i - 1];
            q = self.diag[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `i`-th smallest eigenvalue (0-based) by bisection to full precision.
    pub fn kth_eigenvalue(&self, i: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let pad = 1e-12 * (lo.abs() + hi.abs()) + f64::MIN_POSITIVE;
        lo -= pad;
        hi += pad;
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) > i {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[cfg(test)]
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.off[i] * v[i + 1];
                }
                s
            })
            .collect()
    }

    /// Solve `(T − σ I) y = b` by Gaussian elimination with partial pivoting.
    pub fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        let scale = self.diag.iter().fold(0.0f64, |a, d| a.max(d.abs())) + sigma.abs();
        let tiny = f64::EPSILON * scale.max(1.0);
        // band rows: dl (sub), d (main), du (super), du2 (second super, fill-in)
        let mut d: Vec<f64> = self.diag.iter().map(|x| x - sigma).collect();
        let mut dl: Vec<f64> = self.off.clone();
        let mut du: Vec<f64> = self.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let f = dl[i] / d[i];
                dl[i] = f;
                d[i + 1] -= f * du[i];
            } else {
                swap[i] = true;
                let f = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = f;
                let t = du[i];
                du[i] = d[i + 1];
                d[i + 1] = t - f * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -f;
                }
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        let mut y = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if swap[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= dl[i] * y[i];
        }
        y[n - 1] /= d[n - 1];
        if n >= 2 {
            y[n - 2] = (y[n - 2] - du[n - 2] * y[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            y[i] = (y[i] - du[i] * y[i + 1] - du2[i] * y[i + 2]) / d[i];
        }
        y
    }

    /// Eigenvector for an accurately known eigenvalue, unit Euclidean norm.
    pub fn inverse_iteration(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let (lo, hi) = self.gershgorin();
        let sigma = lambda + 4.0 * f64::EPSILON * (lo.abs().max(hi.abs())).max(1.0);
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
            .collect();
        normalize(&mut v);
        for _ in 0..10 {
            let mut w = self.solve_shifted(sigma, &v);
            if w.iter().any(|x| !x.is_finite()) {
                break;
            }
            normalize(&mut w);
            v = w;
        }
        v
    }
}

pub(crate) fn normalize(v: &mut [f64]) {
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

/// All eigenvalues of a symmetric tridiagonal matrix by the implicit QL
/// method, sorted ascending.
pub(crate) fn tql1(t: &SymTridiag) -> Result<Vec<f64>, String> {
    let n = t.len();
    let mut d = t.diag.clone();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&t.off);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(format!("QL failed to converge at index {l}"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(|a, b| a.total_cmp(b));
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiag {
        SymTridiag {
            diag: vec![2.0; n],
            off: vec![-1.0; n - 1],
        }
    }

    fn exact(n: usize, k: usize) -> f64 {
        let t = std::f64::consts::PI * (k + 1) as f64 / (2.0 * (n + 1) as f64);
        4.0 * t.sin().powi(2)
    }

    #[test]
    fn bisection_matches_closed_form() {
        let t = laplacian(200);
        for k in [0, 1, 17, 199] {
            assert!((t.kth_eigenvalue(k) - exact(200, k)).abs() < 1e-13);
        }
        assert_eq!(t.sturm_count(exact(200, 10) + 1e-9), 11);
    }

    #[test]
    fn ql_matches_bisection() {
        let n = 120;
        let t = SymTridiag {
            diag: (0..n).map(|i| (i as f64 * 0.37).sin() * 3.0).collect(),
            off: (0..n - 1).map(|i| 0.5 + (i as f64 * 1.3).cos()).collect(),
        };
        let all = tql1(&t).unwrap();
        for (k, ev) in all.iter().enumerate() {
            assert!((ev - t.kth_eigenvalue(k)).abs() < 1e-11, "k={k}");
        }
    }

    #[test]
    fn inverse_iteration_residual() {
        let n = 300;
        let t = SymTridiag {
            diag: (0..n)
                .map(|i| 2.0 + (i as f64 / n as f64).powi(2) * 50.0)
                .collect(),
            off: vec![-1.0; n - 1],
        };
        for k in [0, 3, 40] {
            let lam = t.kth_eigenvalue(k);
            let v = t.inverse_iteration(lam);
            let tv = t.matvec(&v);
            let res = tv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - lam * b).abs())
                .fold(0.0, f64::max);
            assert!(res < 1e-10, "k={k} res={res}");
        }
    }

    #[test]
    fn shifted_solve_is_exact() {
        let n = 50;
        let t = SymTridiag {
            diag: (0..n).map(|i| (i as f64).cos()).collect(),
            off: (0..n - 1).map(|i| 1.0 + i as f64 * 0.1).collect(),
        };
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let sigma = 0.3;
        let mut b = t.matvec(&x);
        b.iter_mut().zip(&x).for_each(|(bi, xi)| *bi -= sigma * xi);
        let y = t.solve_shifted(sigma, &b);
        for (a, c) in x.iter().zip(&y) {
            assert!((a - c).abs() < 1e-9);
        }
    }
}
