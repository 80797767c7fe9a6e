//! Dormand–Prince 5(4) stepping for two-dimensional first-order systems.
//!
//! Only what the Emden integrator needs: a single explicit step with an
//! embedded error estimate, and the usual step-size controller.

pub(crate) type State = [f64; 2];

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// 5th-order weights minus embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Result of one trial step.
pub(crate) struct Step {
    pub y: State,
    /// Derivative at the new point (FSAL stage).
    pub dy: State,
    pub err: State,
}

/// One Dormand–Prince step from `(t, y)` with slope `dy0 = f(t, y)`.
pub(crate) fn step<F, E>(f: &F, t: f64, y: &State, dy0: &State, h: f64) -> Result<Step, E>
where
    F: Fn(f64, &State) -> Result<State, E>,
{
    let k1 = *dy0;
    let k2 = f(t + C2 * h, &axpy(y, &[(A21, &k1)], h))?;
    let k3 = f(t + C3 * h, &axpy(y, &[(A31, &k1), (A32, &k2)], h))?;
    let k4 = f(t + C4 * h, &axpy(y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h))?;
    let k5 = f(
        t + C5 * h,
        &axpy(y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
    )?;
    let k6 = f(
        t + h,
        &axpy(
            y,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            h,
        ),
    )?;
    let y_new = axpy(y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
    let k7 = f(t + h, &y_new)?;
    let mut err = [0.0; 2];
    for i in 0..2 {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Ok(Step {
        y: y_new,
        dy: k7,
        err,
    })
}

/// Scaled RMS error norm of an embedded estimate.
pub(crate) fn error_norm(err: &State, y0: &State, y1: &State, rtol: f64, atol: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..2 {
        let sc = atol + rtol * y0[i].abs().max(y1[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / 2.0).sqrt()
}

/// Step-size factor from an error norm (I-controller, exponent 1/5).
pub(crate) fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        return 5.0;
    }
    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_quarter_period() {
        let f = |_t: f64, y: &State| -> Result<State, ()> { Ok([y[1], -y[0]]) };
        let mut t = 0.0;
        let mut y = [1.0, 0.0];
        let mut dy = f(t, &y).unwrap();
        let mut h: f64 = 1e-3;
        let end = std::f64::consts::FRAC_PI_2;
        while t < end {
            h = h.min(end - t);
            let s = step(&f, t, &y, &dy, h).unwrap();
            let e = error_norm(&s.err, &y, &s.y, 1e-12, 1e-14);
            if e <= 1.0 {
                t += h;
                y = s.y;
                dy = s.dy;
            }
            h *= step_factor(e);
        }
        assert!(y[0].abs() < 1e-10);
        assert!((y[1] + 1.0).abs() < 1e-10);
    }
}
