//! Field between the emitters, the probability of the excitation staying in
//! the emitters plus that region, and the rate at which it leaks out.
//!
//! Emitter 1 sits at `x = -d/2` and emitter 2 at `x = +d/2`. Positions are
//! given as `x/d`, times as `gamma t`. Inside the region only the rightward
//! field of emitter 1 and the leftward field of emitter 2 are present, so the
//! field probability reduces to `(1/2) int |c_m|^2` over the last delay window.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::dynamics::{
    amplitudes_at, find_pole_pair, reduced_phase, Emitter, PoleSet, SystemParams,
};
use crate::error::{Error, Result};
use crate::mathkit::{gauss_legendre, moment_differences_with_exps};
use crate::parallel::{map_indexed, try_map_indexed, Execution};
use crate::qfi::{state_derivatives, DetuningPath};

/// Normalisation that turns `int (|a|^2 + |b|^2) dx` into a probability.
///
/// Fixed by continuity of the total probability at `t = 0+` and by the
/// single-emitter balance `Gamma = -e^{-t}/2` before the first arrival.
pub const KAPPA: f64 = 4.0 * PI;

/// Offset used for "just after the first arrival", `gamma t = eta + 1e-3`.
pub const ARRIVAL_OFFSET: f64 = 1e-3;

pub const DEFAULT_D_DELTA: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionProbability {
    pub gamma_t: f64,
    pub p_atoms: f64,
    pub p_field: f64,
    pub p_total: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arrival {
    /// `gamma t <= eta`: nothing has reached the far emitter yet.
    Before,
    After,
}

/// How the amplitudes entering the loss rate are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossModel {
    /// Round-trip series, with derivatives from the delay equations.
    #[default]
    Series,
    /// Truncated pole sums for `c_m` and their derivatives. Near the feedback
    /// kinks these carry a truncation error of order `1/j_cut`.
    Poles,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRatePoint {
    pub gamma_t: f64,
    pub gamma_rate: f64,
    pub regime: Arrival,
}

fn check_time(gamma_t: f64) -> Result<()> {
    if gamma_t >= 0.0 && gamma_t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "gamma_t",
            value: gamma_t,
            reason: "must be non-negative and finite",
        })
    }
}

fn amplitudes(params: &SystemParams, t: f64) -> (Complex64, Complex64) {
    if t < 0.0 {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    } else {
        amplitudes_at(params, t)
    }
}

/// Right- and left-moving field amplitudes at `x/d` and `gamma t`, scaled so
/// that `KAPPA * int (|a|^2 + |b|^2) dx` is a probability (with `dx` in units
/// of `v / gamma`). Carrier phases are included, so `a` and `b` interfere.
pub fn spatial_amplitudes(
    params: &SystemParams,
    x_over_d: f64,
    gamma_t: f64,
) -> Result<(Complex64, Complex64)> {
    params.validate()?;
    check_time(gamma_t)?;
    if !(-0.5..=0.5).contains(&x_over_d) {
        return Err(Error::InvalidParameter {
            name: "x_over_d",
            value: x_over_d,
            reason: "must lie between the emitters, in [-1/2, 1/2]",
        });
    }
    let eta = params.eta;
    let prefactor = Complex64::new(0.0, -0.5 / (2.0 * PI).sqrt());
    let omega0 = params.omega0_tilde();
    let omega1 = omega0 + 0.5 * params.delta;
    let omega2 = omega0 - 0.5 * params.delta;
    let zero = Complex64::new(0.0, 0.0);

    let ret1 = gamma_t - eta * (x_over_d + 0.5);
    let a = if ret1 >= 0.0 {
        prefactor * amplitudes(params, ret1).0 * Complex64::from_polar(1.0, -omega1 * ret1)
    } else {
        zero
    };
    let ret2 = gamma_t - eta * (0.5 - x_over_d);
    let b = if ret2 >= 0.0 {
        prefactor * amplitudes(params, ret2).1 * Complex64::from_polar(1.0, -omega2 * ret2)
    } else {
        zero
    };
    Ok((a, b))
}

/// `(1/2) int_{max(0, t - eta)}^{t} (|c_1|^2 + |c_2|^2) d tau`, split at the
/// feedback kinks so every piece is smooth.
fn field_probability(params: &SystemParams, gamma_t: f64) -> f64 {
    let eta = params.eta;
    let start = (gamma_t - eta).max(0.0);
    if gamma_t <= start {
        return 0.0;
    }
    let mut cuts = vec![start];
    let mut kink = (start / eta).floor() * eta + eta;
    while kink < gamma_t {
        if kink > start {
            cuts.push(kink);
        }
        kink += eta;
    }
    cuts.push(gamma_t);
    let rate = 1.0 + params.delta.abs();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let panels = ((w[1] - w[0]) * rate).ceil() as usize;
        total += gauss_legendre(
            |tau| {
                let (c1, c2) = amplitudes(params, tau);
                c1.norm_sqr() + c2.norm_sqr()
            },
            w[0],
            w[1],
            panels,
        );
    }
    0.5 * total
}

pub fn region_probability(params: &SystemParams, gamma_t: f64) -> Result<RegionProbability> {
    params.validate()?;
    check_time(gamma_t)?;
    let (c1, c2) = amplitudes(params, gamma_t);
    let p_atoms = c1.norm_sqr() + c2.norm_sqr();
    let p_field = field_probability(params, gamma_t);
    Ok(RegionProbability {
        gamma_t,
        p_atoms,
        p_field,
        p_total: p_atoms + p_field,
        kappa: KAPPA,
    })
}

/// The same field probability as a closed double sum over poles,
/// `(1/2) sum_m sum_{j,k} R_j R_k^* int e^{(s_j + s_k^*) tau} d tau`.
///
/// Truncation of the pole sums limits its accuracy for `gamma t` below a few
/// lifetimes; [`region_probability`] does not use it.
pub fn field_probability_poles(
    poles: &[&PoleSet],
    eta: f64,
    gamma_t: f64,
    exec: Execution,
) -> Result<f64> {
    check_time(gamma_t)?;
    let start = (gamma_t - eta).max(0.0);
    let width = gamma_t - start;
    let one = Complex64::new(1.0, 0.0);
    let mut total = 0.0;
    for set in poles {
        let entries = &set.entries;
        let at_start: Vec<Complex64> = entries
            .iter()
            .map(|e| e.residue * (e.pole * start).exp())
            .collect();
        let across: Vec<Complex64> = entries.iter().map(|e| (e.pole * width).exp()).collect();
        let rows = map_indexed(exec, entries.len(), |j| {
            let mut row = Complex64::new(0.0, 0.0);
            for k in 0..entries.len() {
                let u = entries[j].pole + entries[k].pole.conj();
                let integral =
                    moment_differences_with_exps(u, 0.0, width, one, across[j] * across[k].conj())
                        [0];
                row += at_start[j] * at_start[k].conj() * integral;
            }
            row
        });
        total += rows.iter().sum::<Complex64>().re;
    }
    Ok(0.5 * total)
}

/// Exact derivatives from the delay equations, with the delayed amplitude
/// taken from the left at `t = eta`.
fn derivatives(params: &SystemParams, t: f64, c: (Complex64, Complex64)) -> (Complex64, Complex64) {
    let delayed = if t > params.eta {
        amplitudes(params, t - params.eta)
    } else {
        (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    };
    let g = 0.5 * params.beta;
    let rot = Complex64::from_polar(1.0, params.delta * t);
    let k12 = -g * Complex64::from_polar(1.0, reduced_phase(params, Emitter::Two));
    let k21 = -g * Complex64::from_polar(1.0, reduced_phase(params, Emitter::One));
    (
        -0.5 * c.0 + k12 * rot * delayed.1,
        -0.5 * c.1 + k21 * rot.conj() * delayed.0,
    )
}

/// `Gamma = d P_q / d t`: the emitters' rate plus half the population emitted
/// into the region minus half the population that left it one delay ago.
pub fn loss_rate(params: &SystemParams, gamma_t: f64) -> Result<LossRatePoint> {
    loss_rate_with(params, gamma_t, LossModel::Series)
}

pub fn loss_rate_with(
    params: &SystemParams,
    gamma_t: f64,
    model: LossModel,
) -> Result<LossRatePoint> {
    params.validate()?;
    check_time(gamma_t)?;
    match model {
        LossModel::Series => {
            let after = gamma_t > params.eta;
            let c = amplitudes(params, gamma_t);
            let dc = derivatives(params, gamma_t, c);
            let old = if after {
                amplitudes(params, gamma_t - params.eta)
            } else {
                Default::default()
            };
            Ok(assemble(gamma_t, after, c, dc, old))
        }
        LossModel::Poles => {
            let (one, two) = find_pole_pair(params)?;
            Ok(loss_rate_from_poles(&one, &two, params.eta, gamma_t))
        }
    }
}

/// Loss rate from already computed pole sets.
pub fn loss_rate_from_poles(one: &PoleSet, two: &PoleSet, eta: f64, gamma_t: f64) -> LossRatePoint {
    let after = gamma_t > eta;
    let c = (one.evaluate(gamma_t), two.evaluate(gamma_t));
    let dc = (
        one.evaluate_derivative(gamma_t),
        two.evaluate_derivative(gamma_t),
    );
    let old = if after {
        (one.evaluate(gamma_t - eta), two.evaluate(gamma_t - eta))
    } else {
        Default::default()
    };
    assemble(gamma_t, after, c, dc, old)
}

fn assemble(
    gamma_t: f64,
    after: bool,
    c: (Complex64, Complex64),
    dc: (Complex64, Complex64),
    old: (Complex64, Complex64),
) -> LossRatePoint {
    let atoms = 2.0 * ((dc.0.conj() * c.0).re + (dc.1.conj() * c.1).re);
    let emitted = 0.5 * (c.0.norm_sqr() + c.1.norm_sqr());
    let departed = 0.5 * (old.0.norm_sqr() + old.1.norm_sqr());
    LossRatePoint {
        gamma_t,
        gamma_rate: atoms + emitted - departed,
        regime: if after {
            Arrival::After
        } else {
            Arrival::Before
        },
    }
}

/// Central difference of [`loss_rate`] in the detuning, with `phi2` held fixed.
pub fn loss_rate_gradient(params: &SystemParams, gamma_t: f64, d_delta: f64) -> Result<f64> {
    loss_rate_gradient_with(params, gamma_t, d_delta, LossModel::Series)
}

pub fn loss_rate_gradient_with(
    params: &SystemParams,
    gamma_t: f64,
    d_delta: f64,
    model: LossModel,
) -> Result<f64> {
    if !(d_delta > 0.0 && d_delta.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "d_delta",
            value: d_delta,
            reason: "must be positive",
        });
    }
    let mut up = *params;
    up.delta += d_delta;
    let mut down = *params;
    down.delta -= d_delta;
    let hi = loss_rate_with(&up, gamma_t, model)?.gamma_rate;
    let lo = loss_rate_with(&down, gamma_t, model)?.gamma_rate;
    Ok((hi - lo) / (2.0 * d_delta))
}

/// Analytic `d Gamma / d delta` of the pole-sum loss rate, from the pole and
/// residue velocities with `phi2` held fixed.
pub fn loss_rate_gradient_poles(params: &SystemParams, gamma_t: f64) -> Result<f64> {
    params.validate()?;
    check_time(gamma_t)?;
    let ((one, two), (d1, d2)) = state_derivatives(params, DetuningPath::TwoFixed)?;
    let mut grad = 0.0;
    for (poles, d) in [(&one, &d1), (&two, &d2)] {
        let c = poles.evaluate(gamma_t);
        let dc = poles.evaluate_derivative(gamma_t);
        let c_d = d.amplitude_derivative(poles, gamma_t);
        let dc_d = d.rate_derivative(poles, gamma_t);
        grad += 2.0 * (dc_d.conj() * c + dc.conj() * c_d).re + (c.conj() * c_d).re;
        if gamma_t > params.eta {
            let u = gamma_t - params.eta;
            grad -= (poles.evaluate(u).conj() * d.amplitude_derivative(poles, u)).re;
        }
    }
    Ok(grad)
}

/// `d Gamma / d delta` at `gamma t = eta + ARRIVAL_OFFSET` for every pair of
/// `etas` x `deltas`, row-major in `eta`.
pub fn arrival_gradient_map(
    base: &SystemParams,
    etas: &[f64],
    deltas: &[f64],
    model: LossModel,
    exec: Execution,
) -> Result<Vec<f64>> {
    let cols = deltas.len();
    try_map_indexed(exec, etas.len() * cols, |idx| {
        let mut p = *base;
        p.eta = etas[idx / cols];
        p.delta = deltas[idx % cols];
        p.validate()?;
        loss_rate_gradient_with(&p, p.eta + ARRIVAL_OFFSET, DEFAULT_D_DELTA, model)
    })
}
