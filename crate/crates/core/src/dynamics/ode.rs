use num_complex::Complex64;

use super::poles::reduced_phase;
use super::{AmplitudeTrace, Emitter, Method, SystemParams};
use crate::error::{Error, Result};

/// Fixed-step RK4 integration of the delay equations
///
/// ```text
/// c1' = -c1/2 - (beta/2) e^{i phi2} e^{ i delta t} c2(t - eta)
/// c2' = -c2/2 - (beta/2) e^{i phi1} e^{-i delta t} c1(t - eta)
/// ```
///
/// with zero history before `t = 0`. The step is shrunk so that `eta` is an
/// integer number of steps; delayed values between grid points come from
/// cubic Hermite interpolation of the stored solution.
pub fn amplitude_ode(params: &SystemParams, t_max: f64, dt: f64) -> Result<AmplitudeTrace> {
    params.validate()?;
    let limit = (params.eta / 10.0).min(1e-2);
    if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
        return Err(Error::StepTooCoarse { dt, limit });
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_max",
            value: t_max,
            reason: "must be non-negative and finite",
        });
    }
    let lag = (params.eta / dt).ceil() as usize;
    let h = params.eta / lag as f64;
    let steps = (t_max / h - 1e-9).ceil().max(0.0) as usize;

    let g = 0.5 * params.beta;
    let k12 = -g * Complex64::from_polar(1.0, reduced_phase(params, Emitter::Two));
    let k21 = -g * Complex64::from_polar(1.0, reduced_phase(params, Emitter::One));
    let delta = params.delta;
    let rhs = |t: f64, c: [Complex64; 2], delayed: [Complex64; 2]| -> [Complex64; 2] {
        let rot = Complex64::from_polar(1.0, delta * t);
        [
            -0.5 * c[0] + k12 * rot * delayed[1],
            -0.5 * c[1] + k21 * rot.conj() * delayed[0],
        ]
    };

    let zero = Complex64::new(0.0, 0.0);
    let mut state: Vec<[Complex64; 2]> = Vec::with_capacity(steps + 1);
    // derivative at each grid point seen from the right and from the left
    let mut d_right: Vec<[Complex64; 2]> = Vec::with_capacity(steps + 1);
    let mut d_left: Vec<[Complex64; 2]> = Vec::with_capacity(steps + 1);

    let delayed_at_node = |state: &[[Complex64; 2]], i: usize, from_left: bool| -> [Complex64; 2] {
        if i < lag || (from_left && i == lag) {
            [zero, zero]
        } else {
            state[i - lag]
        }
    };

    state.push([params.c1_0, params.c2_0]);
    let d0 = rhs(0.0, state[0], delayed_at_node(&state, 0, false));
    d_right.push(d0);
    d_left.push(rhs(0.0, state[0], delayed_at_node(&state, 0, true)));

    for n in 0..steps {
        let t = n as f64 * h;
        let c = state[n];
        let (hist_mid, hist_hi) = if n < lag {
            ([zero, zero], [zero, zero])
        } else {
            let j = n - lag;
            let a = state[j];
            let b = state[j + 1];
            let da = d_right[j];
            let db = d_left[j + 1];
            let mid = [
                0.5 * (a[0] + b[0]) + h / 8.0 * (da[0] - db[0]),
                0.5 * (a[1] + b[1]) + h / 8.0 * (da[1] - db[1]),
            ];
            (mid, b)
        };
        let add = |x: [Complex64; 2], k: [Complex64; 2], s: f64| [x[0] + s * k[0], x[1] + s * k[1]];
        let k1 = d_right[n];
        let k2 = rhs(t + 0.5 * h, add(c, k1, 0.5 * h), hist_mid);
        let k3 = rhs(t + 0.5 * h, add(c, k2, 0.5 * h), hist_mid);
        let k4 = rhs(t + h, add(c, k3, h), hist_hi);
        let next = [
            c[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            c[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        state.push(next);
        let i = n + 1;
        let ti = i as f64 * h;
        d_right.push(rhs(ti, next, delayed_at_node(&state, i, false)));
        d_left.push(rhs(ti, next, delayed_at_node(&state, i, true)));
    }

    let times = (0..=steps).map(|i| i as f64 * h).collect();
    let (c1, c2) = state.into_iter().map(|s| (s[0], s[1])).unzip();
    Ok(AmplitudeTrace {
        times,
        c1,
        c2,
        method: Method::Ode,
    })
}
