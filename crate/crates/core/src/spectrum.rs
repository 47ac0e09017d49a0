//! Steady-state frequency response of the emitters and the spectrum of the
//! radiated field.
//!
//! Frequencies are offsets `omega_bar = omega - omega_0` from the mean emitter
//! frequency, in units of `gamma`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::dynamics::{Emitter, SystemParams};
use crate::error::{Error, Result};
use crate::mathkit::lambert_w;
use crate::parallel::{try_map_indexed, Execution};

const REAL_POLE_TOL: f64 = 1e-14;

/// Response functions `F_1`, `F_2` and their common denominator at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseValue {
    pub omega_bar: f64,
    pub f1: Complex64,
    pub f2: Complex64,
    pub d_denom: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    pub omega_bar: Vec<f64>,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakPrediction {
    pub n: i32,
    /// Offset from the mean frequency of the peak on the `+` Lambert branch.
    pub omega_plus: f64,
    pub omega_minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `eta delta = (n + 1/2) pi`, the alignment for `delta >~ 1`.
    LargeDetuning,
    /// `eta delta = n pi`, the alignment for `delta << 1`.
    SmallDetuning,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub n: u32,
    pub eta: f64,
    pub regime: Regime,
}

/// Fourier transforms of the amplitudes, each taken in its emitter's own
/// rotating frame, evaluated at `omega_bar`.
pub fn response(params: &SystemParams, omega_bar: f64) -> Result<ResponseValue> {
    let i = Complex64::new(0.0, 1.0);
    let (eta, delta, beta) = (params.eta, params.delta, params.beta);
    let phi1 = crate::dynamics::reduced_phase(params, Emitter::One);
    let phi2 = crate::dynamics::reduced_phase(params, Emitter::Two);
    let half = Complex64::new(0.5, -omega_bar);
    let d_denom = half * half + 0.25 * delta * delta
        - 0.25 * beta * beta * (i * (2.0 * phi2 + eta * delta + 2.0 * eta * omega_bar)).exp();
    if !(d_denom.norm() >= REAL_POLE_TOL) {
        return Err(Error::RealAxisPole { omega_bar });
    }
    let n1 = params.c1_0 * (0.5 - i * (omega_bar + 0.5 * delta))
        - 0.5 * beta * params.c2_0 * (i * (phi1 + eta * (omega_bar - 0.5 * delta))).exp();
    let n2 = params.c2_0 * (0.5 - i * (omega_bar - 0.5 * delta))
        - 0.5 * beta * params.c1_0 * (i * (phi2 + eta * (omega_bar + 0.5 * delta))).exp();
    Ok(ResponseValue {
        omega_bar,
        f1: n1 / d_denom,
        f2: n2 / d_denom,
        d_denom,
    })
}

/// Probability density of finding the emitted photon at `omega_bar` once the
/// emitters have relaxed, summed over both propagation directions.
pub fn spectral_density(params: &SystemParams, omega_bar: f64) -> Result<f64> {
    let r = response(params, omega_bar)?;
    let theta = omega_bar * params.eta
        + 0.5 * params.delta * params.eta
        + params.phi2.rem_euclid(std::f64::consts::TAU);
    let cross = (r.f1.conj() * r.f2).re;
    let g = (r.f1.norm_sqr() + r.f2.norm_sqr() + 2.0 * theta.cos() * cross) / (2.0 * PI);
    // the bracket is a sum of squared moduli; rounding may leave a tiny negative
    Ok(g.max(0.0))
}

pub fn spectrum_g(params: &SystemParams, grid: &[f64]) -> Result<SpectrumGrid> {
    spectrum_g_with(params, grid, Execution::default())
}

pub fn spectrum_g_with(
    params: &SystemParams,
    grid: &[f64],
    exec: Execution,
) -> Result<SpectrumGrid> {
    params.validate()?;
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter {
            name: "omega_bar",
            value: f64::NAN,
            reason: "grid must be strictly ascending",
        });
    }
    let g = try_map_indexed(exec, grid.len(), |k| spectral_density(params, grid[k]))?;
    Ok(SpectrumGrid {
        omega_bar: grid.to_vec(),
        g,
    })
}

/// `[-3 - delta/2, 3 + delta/2]` with 4001 points.
pub fn default_grid(delta: f64) -> Vec<f64> {
    let half_width = 3.0 + 0.5 * delta.abs();
    linspace(-half_width, half_width, 4001)
}

pub(crate) fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let step = (stop - start) / (count - 1) as f64;
    (0..count).map(|k| start + k as f64 * step).collect()
}

/// Large-delay estimates of the spectral peaks,
/// `omega_bar = -delta/2 + Im W_n(+-(eta/2) e^{eta/2}) / eta`.
pub fn peak_predictions(
    params: &SystemParams,
    n_range: std::ops::RangeInclusive<i32>,
) -> Result<Vec<PeakPrediction>> {
    let eta = params.eta;
    if eta < 1.0 {
        return Err(Error::InvalidParameter {
            name: "eta",
            value: eta,
            reason: "peak estimates need eta >= 1",
        });
    }
    let z = 0.5 * eta * (0.5 * eta).exp();
    n_range
        .map(|n| {
            let plus = lambert_w(n, Complex64::new(z, 0.0))?;
            let minus = lambert_w(n, Complex64::new(-z, 0.0))?;
            Ok(PeakPrediction {
                n,
                omega_plus: -0.5 * params.delta + plus.im / eta,
                omega_minus: -0.5 * params.delta + minus.im / eta,
            })
        })
        .collect()
}

/// Separations at which the first emitter's resonance lines up with a
/// resonance of the region between the emitters.
pub fn resonance_alignment(
    delta: f64,
    n_range: std::ops::RangeInclusive<u32>,
) -> Result<Vec<Alignment>> {
    if !(delta.is_finite() && delta != 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "alignment needs a nonzero detuning",
        });
    }
    let scale = PI / delta.abs();
    let mut out = Vec::new();
    for n in n_range {
        let nf = f64::from(n);
        out.push(Alignment {
            n,
            eta: (nf + 0.5) * scale,
            regime: Regime::LargeDetuning,
        });
        if n > 0 {
            out.push(Alignment {
                n,
                eta: nf * scale,
                regime: Regime::SmallDetuning,
            });
        }
    }
    Ok(out)
}

/// Grid points that are strict local maxima of `values`.
pub fn local_maxima(grid: &[f64], values: &[f64]) -> Vec<f64> {
    (1..values.len().saturating_sub(1))
        .filter(|&k| values[k] > values[k - 1] && values[k] >= values[k + 1])
        .map(|k| grid[k])
        .collect()
}
