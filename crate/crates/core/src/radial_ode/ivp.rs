use super::dopri::{error_norm, step, step_factor, State};
use super::{IvpOptions, Nonlinearity, OdeError};

/// The autonomous radial ODE `v'' + (M-1)/t v' + c f(v) = 0`.
#[derive(Debug, Clone, Copy)]
pub struct EmdenOde<'a> {
    /// Generalized dimension `M ≥ 2`.
    pub dim: f64,
    pub nonlinearity: &'a Nonlinearity,
    /// Coupling constant `c` multiplying `f`.
    pub coupling: f64,
}

impl EmdenOde<'_> {
    fn rhs(&self, t: f64, y: &State) -> Result<State, OdeError> {
        let f = self.nonlinearity.eval(y[0]);
        if !f.is_finite() {
            return Err(OdeError::NonFinite { t });
        }
        Ok([y[1], -(self.dim - 1.0) / t * y[1] - self.coupling * f])
    }

    /// Series start `v(h), v'(h)` about the regular point `t = 0`.
    fn taylor_start(&self, v0: f64, h: f64) -> Result<State, OdeError> {
        let f0 = self.nonlinearity.eval(v0);
        let df0 = self.nonlinearity.derivative(v0);
        if !f0.is_finite() || !df0.is_finite() {
            return Err(OdeError::NonFinite { t: 0.0 });
        }
        let a2 = -self.coupling * f0 / (2.0 * self.dim);
        let a4 = -self.coupling * df0 * a2 / (4.0 * (self.dim + 2.0));
        let h2 = h * h;
        Ok([v0 + a2 * h2 + a4 * h2 * h2, 2.0 * a2 * h + 4.0 * a4 * h2 * h])
    }

    /// `v''(0) = -c f(v0) / M`.
    pub fn second_derivative_at_origin(&self, v0: f64) -> f64 {
        -self.coupling * self.nonlinearity.eval(v0) / self.dim
    }
}

/// Samples of an IVP solution. Every refined zero and critical point is
/// also a sample point.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub zeros: Vec<f64>,
    pub critical_points: Vec<f64>,
}

impl Trajectory {
    fn push(&mut self, t: f64, y: &State) {
        self.t.push(t);
        self.v.push(y[0]);
        self.dv.push(y[1]);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Number of zeros in `(0, t]`.
    pub fn zeros_up_to(&self, t: f64) -> usize {
        self.zeros.iter().filter(|&&z| z <= t).count()
    }
}

/// Integrate the Emden IVP `v(0) = v0, v'(0) = 0` on `[0, t_max]`.
///
/// Sign changes of `v` are refined to zeros and sign changes of `v'` to
/// critical points. With `stop_after_zeros = Some(n)` the trajectory ends at
/// the n-th zero.
pub fn integrate_emden_ivp(
    ode: &EmdenOde<'_>,
    v0: f64,
    t_max: f64,
    opts: &IvpOptions,
    stop_after_zeros: Option<usize>,
) -> Result<Trajectory, OdeError> {
    if v0 == 0.0 || !v0.is_finite() {
        return Err(OdeError::InvalidInput(
            "v0 must be a nonzero finite number".into(),
        ));
    }
    if !(ode.dim >= 2.0) {
        return Err(OdeError::InvalidInput(format!(
            "dimension M = {} must be >= 2",
            ode.dim
        )));
    }
    if !(t_max > 0.0) {
        return Err(OdeError::InvalidInput("t_max must be positive".into()));
    }
    opts.check()?;

    let f = |t: f64, y: &State| ode.rhs(t, y);
    let mut traj = Trajectory::default();
    traj.push(0.0, &[v0, 0.0]);

    // natural length scale of the linearization at v0
    let slope = (ode.coupling * ode.nonlinearity.eval(v0) / v0).abs();
    let scale = if slope > 0.0 {
        (ode.dim / slope).sqrt()
    } else {
        1.0
    };
    let h0 = (1e-3 * scale)
        .min(t_max / 16.0)
        .min(opts.h_max.unwrap_or(f64::INFINITY));

    let mut t = h0;
    let mut y = ode.taylor_start(v0, h0)?;
    let mut dy = f(t, &y)?;
    traj.push(t, &y);

    let mut h = h0;
    let mut steps = 0usize;
    while t < t_max {
        steps += 1;
        if steps > opts.max_steps {
            return Err(OdeError::TooManySteps(opts.max_steps));
        }
        h = h.min(opts.h_max.unwrap_or(f64::INFINITY)).min(t_max - t);
        let s = step(&f, t, &y, &dy, h)?;
        let e = error_norm(&s.err, &y, &s.y, opts.rtol, opts.atol);
        if e <= 1.0 {
            let t_new = t + h;
            let mut events: Vec<(f64, State, bool)> = Vec::new();
            if sign_changes(y[0], s.y[0]) {
                let tz = refine(&f, t, &y, &dy, t_new, 0, opts.zero_tol)?;
                let yz = step(&f, t, &y, &dy, tz - t)?.y;
                events.push((tz, [0.0, yz[1]], true));
            }
            if sign_changes(y[1], s.y[1]) {
                let tc = refine(&f, t, &y, &dy, t_new, 1, 0.0)?;
                let yc = step(&f, t, &y, &dy, tc - t)?.y;
                events.push((tc, [yc[0], 0.0], false));
            }
            events.sort_by(|a, b| a.0.total_cmp(&b.0));
            for (te, ye, is_zero) in events {
                if te <= *traj.t.last().unwrap() {
                    continue;
                }
                traj.push(te, &ye);
                if is_zero {
                    traj.zeros.push(te);
                    if stop_after_zeros.is_some_and(|n| traj.zeros.len() >= n) {
                        return Ok(traj);
                    }
                } else {
                    traj.critical_points.push(te);
                }
            }
            if t_new > *traj.t.last().unwrap() {
                traj.push(t_new, &s.y);
            }
            t = t_new;
            y = s.y;
            dy = s.dy;
        }
        h *= step_factor(e);
        if h < 1e-14 * t.max(1e-300) {
            return Err(OdeError::StepUnderflow { t });
        }
    }
    Ok(traj)
}

#[inline]
fn sign_changes(a: f64, b: f64) -> bool {
    a != 0.0 && (b == 0.0 || a.signum() != b.signum())
}

/// Locate the root of component `comp` inside `(t0, t1]` by the Illinois
/// method, evaluating the solution with single steps from `t0`.
fn refine<F>(f: &F, t0: f64, y0: &State, dy0: &State, t1: f64, comp: usize, tol: f64) -> Result<f64, OdeError>
where
    F: Fn(f64, &State) -> Result<State, OdeError>,
{
    let g = |tau: f64| -> Result<f64, OdeError> {
        if tau == t0 {
            return Ok(y0[comp]);
        }
        Ok(step(f, t0, y0, dy0, tau - t0)?.y[comp])
    };
    let (mut a, mut b) = (t0, t1);
    let (mut ga, mut gb) = (g(a)?, g(b)?);
    if gb == 0.0 {
        return Ok(b);
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let mut c = (a * gb - b * ga) / (gb - ga);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let gc = g(c)?;
        if gc.abs() <= tol || (b - a) <= 4.0 * f64::EPSILON * b.abs() {
            return Ok(c);
        }
        if gc.signum() == gb.signum() {
            b = c;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
        if gc == 0.0 {
            return Ok(c);
        }
    }
    Ok(0.5 * (a + b))
}
