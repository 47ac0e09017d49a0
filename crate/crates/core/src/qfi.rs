//! Quantum Fisher information of the detuning for the joint emitter and
//! waveguide state, and the reference value for two independent emitters.
//!
//! The state is written in a frame rotating at a reference frequency that does
//! not move with `delta`; which frequency that is depends on the
//! [`DetuningPath`]. Each waveguide channel is the Fourier transform of the
//! emitter amplitudes, retarded by their positions, so by Parseval every
//! overlap reduces to time integrals of products of two pole sums.
//!
//! With `a_m(u)` the emitter amplitudes in the reference frame and
//! `theta = omega_ref d / v`, the two channels carry
//! `E_a(u) = a_1(u) + e^{-i theta} a_2(u + eta)` and
//! `E_b(u) = a_2(u) + e^{-i theta} a_1(u + eta)`, each with weight 1/2.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::dynamics::{
    amplitudes_at, detuning_sign, feedback, find_pole_pair, numerator, reduced_phase, Emitter,
    PoleSet, SystemParams,
};
use crate::error::{Error, Result};
use crate::mathkit::{gauss_legendre_nodes, moment_differences_with_exps};
use crate::parallel::{map_indexed, Execution};

/// Half width of the frequency window used by [`qfi_fd_oracle`].
pub const ORACLE_HALF_WIDTH: f64 = 10.0;
/// Number of frequency samples used by [`qfi_fd_oracle`].
pub const ORACLE_POINTS: usize = 20_000;
/// Relative disagreement between the oracle's grid and its 2x refinement
/// above which the result is rejected.
pub const ORACLE_GRID_TOL: f64 = 1e-2;

/// Which frequency is held fixed while the detuning changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetuningPath {
    /// `omega_{1,2} = omega_0 +- delta/2` with the mean `omega_0` fixed.
    #[default]
    MeanFixed,
    /// Only emitter 2 moves.
    OneFixed,
    /// Only emitter 1 moves; `phi2` stays put, as in [`SystemParams`].
    TwoFixed,
}

impl DetuningPath {
    /// `d omega_m / d delta`.
    pub fn frequency_rate(self, emitter: Emitter) -> f64 {
        match (self, emitter) {
            (DetuningPath::MeanFixed, Emitter::One) => 0.5,
            (DetuningPath::MeanFixed, Emitter::Two) => -0.5,
            (DetuningPath::OneFixed, Emitter::One) => 0.0,
            (DetuningPath::OneFixed, Emitter::Two) => -1.0,
            (DetuningPath::TwoFixed, Emitter::One) => 1.0,
            (DetuningPath::TwoFixed, Emitter::Two) => 0.0,
        }
    }

    /// The same system moved to detuning `delta` along this path.
    pub fn at(self, params: &SystemParams, delta: f64) -> Result<SystemParams> {
        let mut p = *params;
        p.phi2 += self.frequency_rate(Emitter::Two) * (delta - params.delta) * params.eta;
        p.delta = delta;
        p.validate()?;
        Ok(p)
    }

    /// `omega_ref d / v` for the fixed reference frequency.
    pub fn reference_phase(self, params: &SystemParams) -> f64 {
        params.phi2.rem_euclid(TAU) - self.frequency_rate(Emitter::Two) * params.delta * params.eta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeEntry {
    /// `d s / d delta` of the pole (the derivative of its shift).
    pub d_alpha: Complex64,
    /// `d R / d delta` of the residue, including the motion of the pole.
    pub script_r: Complex64,
}

/// Detuning derivatives aligned entry by entry with a [`PoleSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeSet {
    pub emitter: Emitter,
    pub path: DetuningPath,
    pub entries: Vec<DerivativeEntry>,
}

impl DerivativeSet {
    /// `d c_m(t) / d delta` in the emitter's own rotating frame.
    pub fn amplitude_derivative(&self, poles: &PoleSet, t: f64) -> Complex64 {
        poles
            .entries
            .iter()
            .zip(&self.entries)
            .map(|(e, d)| (d.script_r + t * e.residue * d.d_alpha) * (e.pole * t).exp())
            .sum()
    }

    /// `d/d delta` of `d c_m / d t`.
    pub fn rate_derivative(&self, poles: &PoleSet, t: f64) -> Complex64 {
        poles
            .entries
            .iter()
            .zip(&self.entries)
            .map(|(e, d)| {
                let r = e.residue;
                (d.script_r * e.pole + r * d.d_alpha + t * r * e.pole * d.d_alpha)
                    * (e.pole * t).exp()
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiPoint {
    pub eta: f64,
    pub delta: f64,
    pub gamma_t: f64,
    /// `gamma^2 H(delta; t)`.
    pub h: f64,
}

/// Norm and derivative overlaps of the truncated pole-sum state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlaps {
    pub norm: f64,
    pub psi_dpsi: Complex64,
    pub dpsi_dpsi: f64,
}

impl Overlaps {
    /// `4 [<dPsi|dPsi> + Re <Psi|dPsi>^2]`.
    pub fn qfi(&self) -> f64 {
        4.0 * (self.dpsi_dpsi + (self.psi_dpsi * self.psi_dpsi).re)
    }
}

/// Quantities at one pole that both derivative passes need.
struct Local {
    eps: Complex64,
    rho: f64,
    fb: Complex64,
    fp: Complex64,
}

fn local(params: &SystemParams, emitter: Emitter, path: DetuningPath, s: Complex64) -> Local {
    let eps = Complex64::new(0.0, detuning_sign(emitter));
    let fb = feedback(params, emitter, s);
    Local {
        eps,
        rho: path.frequency_rate(emitter) * params.eta,
        fb,
        fp: 2.0 * s + 1.0 + eps * params.delta + 2.0 * params.eta * fb,
    }
}

fn degenerate(poles: &PoleSet, j: usize) -> Error {
    Error::DegenerateDenominator {
        emitter: poles.emitter.index(),
        sign: poles.entries[j].sign.symbol(),
        branch: poles.entries[j].branch,
    }
}

/// `d s_j / d delta` from implicit differentiation of the characteristic
/// function, `-(df/d delta) / (df/ds)`. The propagation phase moves with the
/// emitter frequency, `d phi_m / d delta = eta d omega_m / d delta`.
pub fn pole_delta_derivatives(
    params: &SystemParams,
    poles: &PoleSet,
    path: DetuningPath,
) -> Result<DerivativeSet> {
    let i = Complex64::new(0.0, 1.0);
    let entries = poles
        .entries
        .iter()
        .enumerate()
        .map(|(j, e)| {
            let s = e.pole;
            let l = local(params, poles.emitter, path, s);
            if !(l.fp.norm() > 1e-12) {
                return Err(degenerate(poles, j));
            }
            let df_dd = l.eps * (s + 0.5) - 2.0 * i * l.rho * l.fb;
            Ok(DerivativeEntry {
                d_alpha: -df_dd / l.fp,
                script_r: Complex64::new(0.0, 0.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DerivativeSet {
        emitter: poles.emitter,
        path,
        entries,
    })
}

/// Fills in `d R_j / d delta` for `R = N(s) / f'(s)`, differentiating through
/// both the explicit detuning dependence and the pole motion.
pub fn residue_delta_derivatives(
    params: &SystemParams,
    poles: &PoleSet,
    dpoles: DerivativeSet,
) -> Result<DerivativeSet> {
    let i = Complex64::new(0.0, 1.0);
    let emitter = poles.emitter;
    let (own, other) = match emitter {
        Emitter::One => (params.c1_0, params.c2_0),
        Emitter::Two => (params.c2_0, params.c1_0),
    };
    let phi = reduced_phase(params, emitter);
    let eta = params.eta;
    let half_beta = 0.5 * params.beta;
    let mut entries = dpoles.entries;
    for (j, (e, d)) in poles.entries.iter().zip(entries.iter_mut()).enumerate() {
        let s = e.pole;
        let ds = d.d_alpha;
        let l = local(params, emitter, dpoles.path, s);
        if !(l.fp.norm() > 1e-12) {
            return Err(degenerate(poles, j));
        }
        let ex = (Complex64::new(0.0, phi) - eta * s).exp();
        let n = numerator(params, emitter, s);
        let dn_ds = own + half_beta * eta * other * ex;
        let dn_dd = own * l.eps - half_beta * other * ex * (i * l.rho);
        let dfp_dd = l.eps + 4.0 * i * eta * l.rho * l.fb;
        let fpp = 2.0 - 4.0 * eta * eta * l.fb;
        d.script_r = (dn_dd + dn_ds * ds) / l.fp - n * (dfp_dd + fpp * ds) / (l.fp * l.fp);
    }
    Ok(DerivativeSet {
        emitter,
        path: dpoles.path,
        entries,
    })
}

/// Pole and residue derivatives for one emitter.
pub fn delta_derivatives(
    params: &SystemParams,
    poles: &PoleSet,
    path: DetuningPath,
) -> Result<DerivativeSet> {
    residue_delta_derivatives(params, poles, pole_delta_derivatives(params, poles, path)?)
}

/// One exponential of a reference-frame amplitude: `a e^{sigma u}`, with
/// detuning derivative `(p + u q) e^{sigma u}`.
#[derive(Debug, Clone, Copy)]
struct Mode {
    sigma: Complex64,
    a: Complex64,
    p: Complex64,
    q: Complex64,
}

impl Mode {
    /// The same term read at `u + by`.
    fn advanced(self, by: f64) -> Mode {
        let g = (self.sigma * by).exp();
        Mode {
            sigma: self.sigma,
            a: self.a * g,
            p: (self.p + by * self.q) * g,
            q: self.q * g,
        }
    }
}

fn modes(poles: &PoleSet, d: &DerivativeSet, delta: f64) -> Vec<Mode> {
    let nu = d.path.frequency_rate(poles.emitter);
    let frame = Complex64::new(0.0, -nu * delta);
    poles
        .entries
        .iter()
        .zip(&d.entries)
        .map(|(e, dd)| Mode {
            sigma: e.pole + frame,
            a: e.residue,
            p: dd.script_r,
            q: e.residue * (dd.d_alpha + Complex64::new(0.0, -nu)),
        })
        .collect()
}

fn value_at(modes: &[Mode], t: f64) -> (Complex64, Complex64) {
    modes.iter().fold(Default::default(), |(a, da), m| {
        let e = (m.sigma * t).exp();
        (a + m.a * e, da + (m.p + t * m.q) * e)
    })
}

#[derive(Debug, Clone, Copy, Default)]
struct PairSums {
    psi_psi: Complex64,
    psi_dpsi: Complex64,
    dpsi_psi: Complex64,
    dpsi_dpsi: Complex64,
}

impl std::ops::Add for PairSums {
    type Output = PairSums;
    fn add(self, o: PairSums) -> PairSums {
        PairSums {
            psi_psi: self.psi_psi + o.psi_psi,
            psi_dpsi: self.psi_dpsi + o.psi_dpsi,
            dpsi_psi: self.dpsi_psi + o.dpsi_psi,
            dpsi_dpsi: self.dpsi_dpsi + o.dpsi_dpsi,
        }
    }
}

/// `int_0^len X^*(u) Y(u) du` for every combination of state and derivative.
/// Rows are reduced in index order so the result does not depend on `exec`.
fn pair_sums(x: &[Mode], y: &[Mode], len: f64, exec: Execution) -> PairSums {
    if !(len > 0.0) {
        return PairSums::default();
    }
    let one = Complex64::new(1.0, 0.0);
    let ex: Vec<Complex64> = x.iter().map(|m| (m.sigma.conj() * len).exp()).collect();
    let ey: Vec<Complex64> = y.iter().map(|m| (m.sigma * len).exp()).collect();
    let rows = map_indexed(exec, x.len(), |j| {
        let (xa, xp, xq, sj) = (
            x[j].a.conj(),
            x[j].p.conj(),
            x[j].q.conj(),
            x[j].sigma.conj(),
        );
        let mut acc = PairSums::default();
        for (yk, &ek) in y.iter().zip(&ey) {
            let m = moment_differences_with_exps(sj + yk.sigma, 0.0, len, one, ex[j] * ek);
            let dy = yk.p * m[0] + yk.q * m[1];
            acc.psi_psi += xa * yk.a * m[0];
            acc.psi_dpsi += xa * dy;
            acc.dpsi_psi += (xp * m[0] + xq * m[1]) * yk.a;
            acc.dpsi_dpsi += xp * dy + xq * (yk.p * m[1] + yk.q * m[2]);
        }
        acc
    });
    rows.into_iter().fold(PairSums::default(), |a, b| a + b)
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

/// Norm, `<Psi|dPsi>` and `<dPsi|dPsi>` at `gamma_t` from the pole sums.
pub fn overlaps(
    params: &SystemParams,
    poles: &(PoleSet, PoleSet),
    dpoles: &(DerivativeSet, DerivativeSet),
    gamma_t: f64,
    exec: Execution,
) -> Result<Overlaps> {
    check_time(gamma_t)?;
    let path = dpoles.0.path;
    if dpoles.1.path != path {
        return Err(Error::Unsupported(
            "derivative sets follow different detuning paths",
        ));
    }
    if gamma_t == 0.0 {
        // the initial state does not depend on the detuning
        return Ok(Overlaps {
            norm: params.c1_0.norm_sqr() + params.c2_0.norm_sqr(),
            psi_dpsi: Complex64::new(0.0, 0.0),
            dpsi_dpsi: 0.0,
        });
    }
    let eta = params.eta;
    let x1 = modes(&poles.0, &dpoles.0, params.delta);
    let x2 = modes(&poles.1, &dpoles.1, params.delta);
    let (a1, da1) = value_at(&x1, gamma_t);
    let (a2, da2) = value_at(&x2, gamma_t);

    let own = pair_sums(&x1, &x1, gamma_t, exec) + pair_sums(&x2, &x2, gamma_t, exec);
    let rot = Complex64::from_polar(1.0, -path.reference_phase(params));
    let mut norm = a1.norm_sqr() + a2.norm_sqr() + own.psi_psi.re;
    let mut psi_dpsi = a1.conj() * da1 + a2.conj() * da2 + own.psi_dpsi;
    let mut dpsi_dpsi = da1.norm_sqr() + da2.norm_sqr() + own.dpsi_dpsi.re;
    if gamma_t > eta {
        let y1: Vec<Mode> = x1.iter().map(|m| m.advanced(eta)).collect();
        let y2: Vec<Mode> = x2.iter().map(|m| m.advanced(eta)).collect();
        for cross in [
            pair_sums(&x1, &y2, gamma_t - eta, exec),
            pair_sums(&x2, &y1, gamma_t - eta, exec),
        ] {
            norm += (rot * cross.psi_psi).re;
            psi_dpsi += 0.5 * (rot * cross.psi_dpsi + (rot * cross.dpsi_psi).conj());
            dpsi_dpsi += (rot * cross.dpsi_dpsi).re;
        }
    }
    Ok(Overlaps {
        norm,
        psi_dpsi,
        dpsi_dpsi,
    })
}

/// `<Psi|d_delta Psi>`; purely imaginary for a normalised family.
pub fn overlap_psi_dpsi(
    params: &SystemParams,
    poles: &(PoleSet, PoleSet),
    dpoles: &(DerivativeSet, DerivativeSet),
    gamma_t: f64,
) -> Result<Complex64> {
    Ok(overlaps(params, poles, dpoles, gamma_t, Execution::default())?.psi_dpsi)
}

/// `<d_delta Psi|d_delta Psi>`.
pub fn overlap_dpsi_dpsi(
    params: &SystemParams,
    poles: &(PoleSet, PoleSet),
    dpoles: &(DerivativeSet, DerivativeSet),
    gamma_t: f64,
) -> Result<f64> {
    Ok(overlaps(params, poles, dpoles, gamma_t, Execution::default())?.dpsi_dpsi)
}

fn require_pure(params: &SystemParams) -> Result<()> {
    if params.beta == 1.0 {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "the Fisher information is only defined here for beta = 1",
        ))
    }
}

/// Poles, residues and their detuning derivatives for both emitters.
pub fn state_derivatives(
    params: &SystemParams,
    path: DetuningPath,
) -> Result<((PoleSet, PoleSet), (DerivativeSet, DerivativeSet))> {
    let (one, two) = find_pole_pair(params)?;
    let d1 = delta_derivatives(params, &one, path)?;
    let d2 = delta_derivatives(params, &two, path)?;
    Ok(((one, two), (d1, d2)))
}

/// `gamma^2 H(delta; t)` with the mean frequency held fixed.
pub fn qfi(params: &SystemParams, gamma_t: f64) -> Result<QfiPoint> {
    let mut points = qfi_at_times(
        params,
        &[gamma_t],
        DetuningPath::MeanFixed,
        Execution::default(),
    )?;
    Ok(points.remove(0))
}

/// [`qfi`] at several times, sharing one pole search.
pub fn qfi_at_times(
    params: &SystemParams,
    times: &[f64],
    path: DetuningPath,
    exec: Execution,
) -> Result<Vec<QfiPoint>> {
    params.validate()?;
    require_pure(params)?;
    for &t in times {
        check_time(t)?;
    }
    let (poles, dpoles) = state_derivatives(params, path)?;
    times
        .iter()
        .map(|&t| {
            let o = overlaps(params, &poles, &dpoles, t, exec)?;
            Ok(QfiPoint {
                eta: params.eta,
                delta: params.delta,
                gamma_t: t,
                h: o.qfi(),
            })
        })
        .collect()
}

/// `gamma^2 H(omega_m)` for one emitter radiating into its own waveguide,
/// `4 [1 - (e^{-t} + 2t) e^{-t}]`.
pub fn baseline_qfi(gamma_t: f64) -> f64 {
    let t = gamma_t.max(0.0);
    let e = (-t).exp();
    4.0 * (1.0 - (e + 2.0 * t) * e)
}

/// [`baseline_qfi`] from its overlaps, with the emitted pulse
/// `e^{-(1/2 + i w) u}` integrated by Gauss-Legendre quadrature.
pub fn baseline_qfi_quadrature(gamma_t: f64) -> f64 {
    let t = gamma_t.max(0.0);
    if t == 0.0 {
        return 0.0;
    }
    let panels = (t.ceil() as usize).max(1);
    // d/dw of the amplitude at age u is -i u times the amplitude
    let (mut psi_dpsi, mut dpsi_dpsi) = (0.0, 0.0);
    for (u, w) in gauss_legendre_nodes(0.0, t, panels) {
        let weight = w * (-u).exp();
        psi_dpsi += weight * u;
        dpsi_dpsi += weight * u * u;
    }
    let atom = (-t).exp();
    psi_dpsi += t * atom;
    dpsi_dpsi += t * t * atom;
    4.0 * (dpsi_dpsi - psi_dpsi * psi_dpsi)
}

/// The joint state sampled on a uniform frequency grid: emitter amplitudes
/// plus both channels, with trapezoid weights folded into the inner product.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledState {
    pub atoms: [Complex64; 2],
    pub omega_bar: Vec<f64>,
    pub channel_a: Vec<Complex64>,
    pub channel_b: Vec<Complex64>,
}

impl SampledState {
    pub fn inner(&self, other: &SampledState) -> Complex64 {
        let n = self.omega_bar.len();
        let h = if n > 1 {
            self.omega_bar[1] - self.omega_bar[0]
        } else {
            0.0
        };
        let mut field = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let w = if k == 0 || k + 1 == n { 0.5 * h } else { h };
            field += w
                * (self.channel_a[k].conj() * other.channel_a[k]
                    + self.channel_b[k].conj() * other.channel_b[k]);
        }
        self.atoms[0].conj() * other.atoms[0] + self.atoms[1].conj() * other.atoms[1] + field
    }

    /// Every `stride`-th frequency sample.
    pub fn thinned(&self, stride: usize) -> SampledState {
        let pick = |v: &[Complex64]| v.iter().step_by(stride).copied().collect();
        SampledState {
            atoms: self.atoms,
            omega_bar: self.omega_bar.iter().step_by(stride).copied().collect(),
            channel_a: pick(&self.channel_a),
            channel_b: pick(&self.channel_b),
        }
    }
}

/// Gauss-Legendre nodes on `[0, t]`, split at the feedback kinks `n eta`,
/// with panels short enough for `e^{i w u}` up to `|w| = half_width`.
fn time_nodes(eta: f64, gamma_t: f64, half_width: f64) -> Vec<(f64, f64)> {
    let panel = (20.0 / half_width).min(2.0);
    let mut cuts = vec![0.0];
    let mut k = eta;
    while k < gamma_t {
        cuts.push(k);
        k += eta;
    }
    cuts.push(gamma_t);
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .flat_map(|w| gauss_legendre_nodes(w[0], w[1], ((w[1] - w[0]) / panel).ceil() as usize))
        .collect()
}

/// Samples the states of several parameter sets (all sharing `eta` and the
/// reference frame of `path`) on `points` frequencies in `[-half_width, half_width]`.
///
/// Emitter amplitudes come from the round-trip series, and the channel
/// amplitudes from Gauss-Legendre quadrature of their Fourier integrals, so
/// nothing here uses poles.
pub fn sample_states(
    family: &[SystemParams],
    gamma_t: f64,
    path: DetuningPath,
    half_width: f64,
    points: usize,
    exec: Execution,
) -> Result<Vec<SampledState>> {
    check_time(gamma_t)?;
    if points < 2 || !(half_width > 0.0) {
        return Err(Error::InvalidParameter {
            name: "points",
            value: points as f64,
            reason: "need at least two samples on a non-empty window",
        });
    }
    let Some(first) = family.first() else {
        return Ok(Vec::new());
    };
    let eta = first.eta;
    let theta = path.reference_phase(first);
    let nodes = time_nodes(eta, gamma_t, half_width);
    let step = 2.0 * half_width / (points - 1) as f64;
    let omega_bar: Vec<f64> = (0..points).map(|k| -half_width + k as f64 * step).collect();
    let prefactor = 1.0 / (4.0 * PI).sqrt();

    let mut out = Vec::with_capacity(family.len());
    for params in family {
        params.validate()?;
        let frame = |emitter| Complex64::new(0.0, -path.frequency_rate(emitter) * params.delta);
        let (f1, f2) = (frame(Emitter::One), frame(Emitter::Two));
        let amp: Vec<(Complex64, Complex64)> = nodes
            .iter()
            .map(|&(u, w)| {
                let (c1, c2) = amplitudes_at(params, u);
                (w * c1 * (f1 * u).exp(), w * c2 * (f2 * u).exp())
            })
            .collect();
        // F_m(w) = int_0^t e^{i w u} a_m(u) du, in chunks of the frequency grid
        let chunk = 256;
        let chunks = map_indexed(exec, points.div_ceil(chunk), |c| {
            let lo = c * chunk;
            let hi = (lo + chunk).min(points);
            let mut f = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); hi - lo];
            for (&(u, _), &(g1, g2)) in nodes.iter().zip(&amp) {
                let mut phasor = Complex64::from_polar(1.0, omega_bar[lo] * u);
                let turn = Complex64::from_polar(1.0, step * u);
                for slot in f.iter_mut() {
                    slot.0 += g1 * phasor;
                    slot.1 += g2 * phasor;
                    phasor *= turn;
                }
            }
            f
        });
        let (c1, c2) = amplitudes_at(params, gamma_t);
        let mut channel_a = Vec::with_capacity(points);
        let mut channel_b = Vec::with_capacity(points);
        for (k, (fa, fb)) in chunks.into_iter().flatten().enumerate() {
            let retard = Complex64::from_polar(1.0, -theta - omega_bar[k] * eta);
            channel_a.push(prefactor * (fa + retard * fb));
            channel_b.push(prefactor * (fb + retard * fa));
        }
        out.push(SampledState {
            atoms: [c1 * (f1 * gamma_t).exp(), c2 * (f2 * gamma_t).exp()],
            omega_bar: omega_bar.clone(),
            channel_a,
            channel_b,
        });
    }
    Ok(out)
}

/// The probability outside the window is restored as `1 - <Psi|Psi>_window`,
/// taken to be common to both states: the far tails come from the onset of
/// emission, which does not depend on the detuning.
fn fidelity_qfi(lo: &SampledState, hi: &SampledState, d_delta: f64) -> f64 {
    let outside = 1.0 - 0.5 * (lo.inner(lo).re + hi.inner(hi).re);
    let overlap = (lo.inner(hi) + outside).norm();
    8.0 * (1.0 - overlap) / (d_delta * d_delta)
}

/// Independent estimate of `gamma^2 H` from the fidelity of the states at
/// `delta -+ d_delta/2`, `8 (1 - |<Psi_-|Psi_+>|) / d_delta^2`, with both
/// states sampled on [`ORACLE_POINTS`] frequencies in `|omega_bar| <= 10`.
/// While the emitters are still excited the field ends abruptly at the
/// emitters, and the detuning-dependent `1/omega` tail of that edge limits
/// the accuracy to about `|c(t)|^2 / 10`. Fails with
/// [`Error::GridResolution`] if a grid twice as dense disagrees by more than
/// [`ORACLE_GRID_TOL`].
pub fn qfi_fd_oracle(params: &SystemParams, gamma_t: f64, d_delta: f64) -> Result<f64> {
    qfi_fd_oracle_with(
        params,
        gamma_t,
        d_delta,
        DetuningPath::MeanFixed,
        Execution::default(),
    )
}

pub fn qfi_fd_oracle_with(
    params: &SystemParams,
    gamma_t: f64,
    d_delta: f64,
    path: DetuningPath,
    exec: Execution,
) -> Result<f64> {
    params.validate()?;
    require_pure(params)?;
    check_time(gamma_t)?;
    if !(1e-5..=1e-3).contains(&d_delta) {
        return Err(Error::InvalidParameter {
            name: "d_delta",
            value: d_delta,
            reason: "must lie in [1e-5, 1e-3]",
        });
    }
    if gamma_t == 0.0 {
        return Ok(0.0);
    }
    let family = [
        path.at(params, params.delta - 0.5 * d_delta)?,
        path.at(params, params.delta + 0.5 * d_delta)?,
    ];
    let fine = sample_states(
        &family,
        gamma_t,
        path,
        ORACLE_HALF_WIDTH,
        2 * ORACLE_POINTS - 1,
        exec,
    )?;
    let coarse = (fine[0].thinned(2), fine[1].thinned(2));
    let h = fidelity_qfi(&coarse.0, &coarse.1, d_delta);
    let refined = fidelity_qfi(&fine[0], &fine[1], d_delta);
    let relative = (h - refined).abs() / refined.abs().max(1e-3);
    if relative > ORACLE_GRID_TOL {
        return Err(Error::GridResolution { relative });
    }
    Ok(h)
}
