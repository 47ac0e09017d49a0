use num_complex::Complex64;
use std::f64::consts::PI;

use super::poles::reduced_phase;
use super::{AmplitudeTrace, Emitter, Method, SystemParams};
use crate::mathkit::{ln_gamma, reduced_bessel_j};

/// Exact amplitudes from the round-trip expansion. Only terms whose light
/// cone has been reached contribute, so each sum is finite.
pub fn amplitude_series(params: &SystemParams, times: &[f64]) -> AmplitudeTrace {
    let mut c1 = Vec::with_capacity(times.len());
    let mut c2 = Vec::with_capacity(times.len());
    for &t in times {
        let (a, b) = amplitudes_at(params, t);
        c1.push(a);
        c2.push(b);
    }
    AmplitudeTrace {
        times: times.to_vec(),
        c1,
        c2,
        method: Method::Series,
    }
}

pub(crate) fn amplitudes_at(params: &SystemParams, t: f64) -> (Complex64, Complex64) {
    let phase_sum = reduced_phase(params, Emitter::One) + reduced_phase(params, Emitter::Two);
    let zero = Complex64::new(0.0, 0.0);
    let mut c1 = zero;
    let mut c2 = zero;
    if params.c1_0 != zero {
        let (own, other) = unit_response(params.eta, params.delta, params.beta, phase_sum, t);
        c1 += params.c1_0 * own;
        c2 += params.c1_0 * other;
    }
    if params.c2_0 != zero {
        // relabelling the emitters flips the detuning
        let (own, other) = unit_response(params.eta, -params.delta, params.beta, phase_sum, t);
        c2 += params.c2_0 * own;
        c1 += params.c2_0 * other;
    }
    (c1, c2)
}

/// Amplitudes `(c_a, c_b)` when emitter `a` starts excited and `delta` is the
/// detuning of `a` relative to `b`.
fn unit_response(
    eta: f64,
    delta: f64,
    beta: f64,
    phase_sum: f64,
    t: f64,
) -> (Complex64, Complex64) {
    let ln_beta = beta.ln();
    let half_ln_pi = 0.5 * PI.ln();
    let ln2 = 2f64.ln();

    let mut own = Complex64::new((-0.5 * t).exp(), 0.0);
    let mut own_sum = Complex64::new(0.0, 0.0);
    let mut n = 1usize;
    loop {
        let x = t - 2.0 * n as f64 * eta;
        if !(x > 0.0) {
            break;
        }
        let nf = n as f64;
        let y = 0.5 * delta.abs() * x;
        let j = reduced_bessel_j(n - 1, n + 1, y);
        let (j_lo, j_mid, j_hi) = (j[0], j[1], j[2]);
        let ln_envelope = half_ln_pi - (2.0 * nf + 1.0) * ln2 - ln_gamma(nf + 1.0)
            + (2.0 * nf + 1.0) * (0.5 * x).ln()
            - ln_gamma(nf + 1.5)
            - 0.5 * x
            + 2.0 * nf * ln_beta;
        let bracket = Complex64::new(
            (2.0 * nf + 1.0) / x * (j_mid + j_lo)
                - delta * delta * x * j_hi / (4.0 * (2.0 * nf + 3.0)),
            -delta * j_mid,
        );
        own_sum += Complex64::from_polar(ln_envelope.exp(), nf * phase_sum) * bracket;
        n += 1;
    }
    own += Complex64::from_polar(1.0, 0.5 * delta * t) * own_sum;

    let mut other_sum = Complex64::new(0.0, 0.0);
    let mut n = 0usize;
    loop {
        let x = t - (2.0 * n as f64 + 1.0) * eta;
        if !(x > 0.0) {
            break;
        }
        let nf = n as f64;
        let y = 0.5 * delta.abs() * x;
        let j_mid = reduced_bessel_j(n, n, y)[0];
        let ln_envelope = half_ln_pi - (2.0 * nf + 1.0) * ln2 - ln_gamma(nf + 1.0)
            + (2.0 * nf + 1.0) * (0.5 * x).ln()
            - ln_gamma(nf + 1.5)
            - 0.5 * x
            + (2.0 * nf + 1.0) * ln_beta;
        other_sum -= Complex64::from_polar(ln_envelope.exp(), (nf + 0.5) * phase_sum) * j_mid;
        n += 1;
    }
    let other = Complex64::from_polar(1.0, -0.5 * delta * t) * other_sum;
    (own, other)
}
