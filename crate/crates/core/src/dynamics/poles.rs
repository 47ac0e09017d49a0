use num_complex::Complex64;
use std::f64::consts::TAU;

use super::{AmplitudeTrace, Emitter, Method, SystemParams};
use crate::error::{Error, Result};
use crate::mathkit::{lambert_w, muller_root, MathError};
use crate::parallel::{try_map_indexed, Execution};

/// Relative residual every refined pole must meet.
pub const POLE_RESIDUAL_TOL: f64 = 1e-7;
const DUPLICATE_TOL: f64 = 1e-9;
const RIGHT_HALF_PLANE_SLACK: f64 = 1e-9;
const MULLER_TOL: f64 = 1e-7;
const MULLER_MAX_ITER: usize = 10_000;
const BRANCH_MATCH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchSign {
    Plus,
    Minus,
}

impl BranchSign {
    pub fn symbol(self) -> char {
        match self {
            BranchSign::Plus => '+',
            BranchSign::Minus => '-',
        }
    }

    fn factor(self) -> f64 {
        match self {
            BranchSign::Plus => 1.0,
            BranchSign::Minus => -1.0,
        }
    }
}

/// One pole of an emitter's Laplace amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoleEntry {
    pub sign: BranchSign,
    pub branch: i32,
    /// Zero-detuning pole from the Lambert W branch.
    pub seed: Complex64,
    /// Displacement of the pole caused by the detuning.
    pub shift: Complex64,
    pub pole: Complex64,
    pub residue: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    pub emitter: Emitter,
    pub entries: Vec<PoleEntry>,
}

impl PoleSet {
    /// `sum_j R_j e^{s_j t}`.
    pub fn evaluate(&self, t: f64) -> Complex64 {
        self.entries
            .iter()
            .map(|e| e.residue * (e.pole * t).exp())
            .sum()
    }

    /// `sum_j R_j s_j e^{s_j t}`.
    pub fn evaluate_derivative(&self, t: f64) -> Complex64 {
        self.entries
            .iter()
            .map(|e| e.residue * e.pole * (e.pole * t).exp())
            .sum()
    }

    pub fn residue_sum(&self) -> Complex64 {
        self.entries.iter().map(|e| e.residue).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub(crate) fn detuning_sign(emitter: Emitter) -> f64 {
    match emitter {
        Emitter::One => -1.0,
        Emitter::Two => 1.0,
    }
}

/// Phase of `emitter` reduced to `[0, 2 pi)` before the detuning is added.
pub(crate) fn reduced_phase(params: &SystemParams, emitter: Emitter) -> f64 {
    let phi2 = params.phi2.rem_euclid(TAU);
    match emitter {
        Emitter::One => phi2 + params.delta * params.eta,
        Emitter::Two => phi2,
    }
}

/// `beta^2 e^{2 i phi_m - 2 eta s} / 4`, the round-trip feedback term.
pub(crate) fn feedback(params: &SystemParams, emitter: Emitter, s: Complex64) -> Complex64 {
    let phi = reduced_phase(params, emitter);
    let b2 = params.beta * params.beta;
    0.25 * b2 * (Complex64::new(0.0, 2.0 * phi) - 2.0 * params.eta * s).exp()
}

/// Characteristic function `(s + 1/2)(s + 1/2 -+ i delta) - beta^2 e^{2 i phi_m - 2 eta s}/4`.
pub fn characteristic(params: &SystemParams, emitter: Emitter, s: Complex64) -> Complex64 {
    let shift = Complex64::new(0.0, detuning_sign(emitter) * params.delta);
    (s + 0.5) * (s + 0.5 + shift) - feedback(params, emitter, s)
}

pub fn characteristic_derivative(
    params: &SystemParams,
    emitter: Emitter,
    s: Complex64,
) -> Complex64 {
    let shift = Complex64::new(0.0, detuning_sign(emitter) * params.delta);
    2.0 * s + 1.0 + shift + 2.0 * params.eta * feedback(params, emitter, s)
}

/// Numerator of the Laplace amplitude for general initial conditions.
pub(crate) fn numerator(params: &SystemParams, emitter: Emitter, s: Complex64) -> Complex64 {
    let (own, other) = match emitter {
        Emitter::One => (params.c1_0, params.c2_0),
        Emitter::Two => (params.c2_0, params.c1_0),
    };
    let shift = Complex64::new(0.0, detuning_sign(emitter) * params.delta);
    let phi = reduced_phase(params, emitter);
    own * (s + 0.5 + shift)
        - 0.5 * params.beta * other * (Complex64::new(0.0, phi) - params.eta * s).exp()
}

/// Laplace transform of `c_m(t)` at `s`.
pub fn laplace_coefficient(params: &SystemParams, emitter: Emitter, s: Complex64) -> Complex64 {
    numerator(params, emitter, s) / characteristic(params, emitter, s)
}

fn relative_residual(params: &SystemParams, emitter: Emitter, s: Complex64) -> f64 {
    let shift = Complex64::new(0.0, detuning_sign(emitter) * params.delta);
    let scale = ((s + 0.5).norm() * (s + 0.5 + shift).norm()).max(1.0);
    characteristic(params, emitter, s).norm() / scale
}

fn branch_labels(j_cut: usize) -> Vec<(BranchSign, i32)> {
    let j = j_cut as i32;
    [BranchSign::Plus, BranchSign::Minus]
        .into_iter()
        .flat_map(|sign| (-j..=j).map(move |k| (sign, k)))
        .collect()
}

fn refine_branch(
    params: &SystemParams,
    emitter: Emitter,
    sign: BranchSign,
    k: i32,
) -> Result<PoleEntry> {
    let label_err = |source: MathError| Error::PoleSearch {
        emitter: emitter.index(),
        sign: sign.symbol(),
        branch: k,
        source,
    };
    let eta = params.eta;
    let phi = reduced_phase(params, emitter);
    let magnitude = 0.5 * eta * params.beta * (0.5 * eta).exp();
    let z = sign.factor() * Complex64::from_polar(magnitude, phi);
    let w = lambert_w(k, z).map_err(label_err)?;
    let seed = w / eta - 0.5;

    let pole = if params.delta == 0.0 {
        seed
    } else {
        let a = seed + 0.5;
        let ishift = Complex64::new(0.0, detuning_sign(emitter) * params.delta);
        let reframed = |alpha: Complex64| {
            alpha * alpha
                + 2.0 * alpha * a
                + a * a * (1.0 - (-2.0 * eta * alpha).exp())
                + ishift * (a + alpha)
        };
        let scale = params.delta / eta;
        let seeds = [
            Complex64::new(-0.05 * scale, 0.0),
            Complex64::new(-0.01 * scale, 0.0),
            Complex64::new(0.0, -0.01 * scale),
        ];
        let muller = muller_root(reframed, seeds, MULLER_TOL, MULLER_MAX_ITER)
            .map(|alpha| polish(params, emitter, seed + alpha));
        let chosen = match track_branch(params, emitter, seed) {
            Some(tracked) => match muller {
                Ok(found)
                    if (found - tracked).norm() <= BRANCH_MATCH_TOL * tracked.norm().max(1.0) =>
                {
                    found
                }
                _ => tracked,
            },
            None => muller.map_err(label_err)?,
        };
        polish(params, emitter, chosen)
    };
    let residual = relative_residual(params, emitter, pole);
    if !(residual <= POLE_RESIDUAL_TOL) {
        return Err(Error::PoleResidual {
            emitter: emitter.index(),
            sign: sign.symbol(),
            branch: k,
            residual,
        });
    }
    if pole.re > RIGHT_HALF_PLANE_SLACK {
        return Err(Error::RightHalfPlanePole {
            emitter: emitter.index(),
            sign: sign.symbol(),
            branch: k,
            pole,
        });
    }
    Ok(PoleEntry {
        sign,
        branch: k,
        seed,
        shift: pole - seed,
        pole,
        residue: Complex64::new(0.0, 0.0),
    })
}

/// Follows the branch from its zero-detuning seed to the actual detuning by
/// Newton continuation. The detuning runs along an arc in the complex plane,
/// `delta (tau + i kappa tau (1 - tau))`, which keeps clear of the isolated
/// points where two poles coalesce. `None` if both arcs fail.
#[inline(never)]
fn track_branch(params: &SystemParams, emitter: Emitter, seed: Complex64) -> Option<Complex64> {
    [0.5, -0.5]
        .into_iter()
        .find_map(|kappa| track_along(params, emitter, seed, kappa))
}

fn track_along(
    params: &SystemParams,
    emitter: Emitter,
    seed: Complex64,
    kappa: f64,
) -> Option<Complex64> {
    let reach = 0.2 * (std::f64::consts::PI / params.eta).min(1.0);
    let mut h = 1.0 / (16.0 + (8.0 * params.delta.abs() * (1.0 + params.eta)).ceil());
    let mut tau = 0.0_f64;
    let mut s = seed;
    while tau < 1.0 {
        if h < 1e-9 {
            return None;
        }
        let target = (tau + h).min(1.0);
        let delta = params.delta * Complex64::new(target, kappa * target * (1.0 - target));
        match newton_complex_detuning(params, emitter, delta, s) {
            Some(next) if (next - s).norm() <= reach => {
                s = next;
                tau = target;
                h *= 1.5;
            }
            _ => h *= 0.5,
        }
    }
    Some(s)
}

/// Newton on `(s + 1/2)(s + 1/2 -+ i delta) - feedback(s)` with the feedback
/// phase held at its actual value, so `delta = 0` reproduces the seeds.
fn newton_complex_detuning(
    params: &SystemParams,
    emitter: Emitter,
    delta: Complex64,
    mut s: Complex64,
) -> Option<Complex64> {
    let shift = Complex64::new(0.0, detuning_sign(emitter)) * delta;
    for _ in 0..30 {
        let fb = feedback(params, emitter, s);
        let f = (s + 0.5) * (s + 0.5 + shift) - fb;
        let df = 2.0 * s + 1.0 + shift + 2.0 * params.eta * fb;
        let step = f / df;
        if !(step.re.is_finite() && step.im.is_finite()) {
            return None;
        }
        s -= step;
        if step.norm() <= 1e-13 * s.norm().max(1.0) {
            return Some(s);
        }
    }
    None
}

/// A few Newton steps on the full characteristic function, kept only while
/// the residual improves.
#[inline(never)]
fn polish(params: &SystemParams, emitter: Emitter, mut s: Complex64) -> Complex64 {
    let mut best = characteristic(params, emitter, s).norm();
    for _ in 0..4 {
        let f = characteristic(params, emitter, s);
        let df = characteristic_derivative(params, emitter, s);
        if df.norm() == 0.0 {
            break;
        }
        let next = s - f / df;
        let r = characteristic(params, emitter, next).norm();
        if !(r < best) {
            break;
        }
        best = r;
        s = next;
    }
    s
}

fn check_duplicates(emitter: Emitter, entries: &[PoleEntry]) -> Result<()> {
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| entries[a].pole.im.total_cmp(&entries[b].pole.im));
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            if entries[b].pole.im - entries[a].pole.im > DUPLICATE_TOL {
                break;
            }
            if (entries[a].pole - entries[b].pole).norm() <= DUPLICATE_TOL {
                let (x, y) = if a < b { (a, b) } else { (b, a) };
                return Err(Error::DuplicatePole {
                    emitter: emitter.index(),
                    a_sign: entries[x].sign.symbol(),
                    a_branch: entries[x].branch,
                    b_sign: entries[y].sign.symbol(),
                    b_branch: entries[y].branch,
                });
            }
        }
    }
    Ok(())
}

/// Poles of emitter `emitter`'s Laplace amplitude on all branches `|k| <= j_cut`
/// of both signs. Residues are left at zero; see [`compute_residues`].
pub fn find_poles(params: &SystemParams, emitter: Emitter) -> Result<PoleSet> {
    find_poles_with(params, emitter, Execution::Sequential)
}

pub fn find_poles_with(
    params: &SystemParams,
    emitter: Emitter,
    exec: Execution,
) -> Result<PoleSet> {
    params.validate()?;
    let labels = branch_labels(params.j_cut);
    let entries = try_map_indexed(exec, labels.len(), |i| {
        let (sign, k) = labels[i];
        refine_branch(params, emitter, sign, k)
    })?;
    check_duplicates(emitter, &entries)?;
    Ok(PoleSet { emitter, entries })
}

/// Fills in the residues `N_m(s) / f_m'(s)` of a pole set.
pub fn compute_residues(params: &SystemParams, poles: PoleSet) -> Result<PoleSet> {
    let emitter = poles.emitter;
    let entries = poles
        .entries
        .into_iter()
        .map(|mut e| {
            let denom = characteristic_derivative(params, emitter, e.pole);
            if !(denom.norm() > 1e-12) {
                return Err(Error::DegenerateDenominator {
                    emitter: emitter.index(),
                    sign: e.sign.symbol(),
                    branch: e.branch,
                });
            }
            e.residue = numerator(params, emitter, e.pole) / denom;
            Ok(e)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PoleSet { emitter, entries })
}

/// Pole sets with residues for both emitters.
pub fn find_pole_pair(params: &SystemParams) -> Result<(PoleSet, PoleSet)> {
    let one = compute_residues(params, find_poles(params, Emitter::One)?)?;
    let two = compute_residues(params, find_poles(params, Emitter::Two)?)?;
    Ok((one, two))
}

/// `c_m(t) = sum_j R_j e^{s_j t}` truncated at `j_cut`.
pub fn amplitude_poles(params: &SystemParams, times: &[f64]) -> Result<AmplitudeTrace> {
    let (one, two) = find_pole_pair(params)?;
    Ok(AmplitudeTrace {
        times: times.to_vec(),
        c1: times.iter().map(|&t| one.evaluate(t)).collect(),
        c2: times.iter().map(|&t| two.evaluate(t)).collect(),
        method: Method::Poles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_detuning_poles_are_lambert_values() {
        let p = SystemParams::new(2.0, 0.0).unwrap().with_j_cut(20).unwrap();
        let set = find_poles(&p, Emitter::One).unwrap();
        assert_eq!(set.len(), 2 * 41);
        for e in &set.entries {
            assert_eq!(e.shift, Complex64::new(0.0, 0.0));
            assert_eq!(e.pole, e.seed);
        }
    }

    #[test]
    fn detuned_poles_satisfy_characteristic_equation() {
        let p = SystemParams::new(2.0, 1.0).unwrap();
        for emitter in [Emitter::One, Emitter::Two] {
            let set = find_poles(&p, emitter).unwrap();
            assert_eq!(set.len(), 2 * (2 * 250 + 1));
            for e in &set.entries {
                assert!(
                    relative_residual(&p, emitter, e.pole) <= POLE_RESIDUAL_TOL,
                    "{:?}",
                    e
                );
                assert!(e.pole.re <= 1e-9);
            }
        }
    }

    #[test]
    fn markovian_limit_has_dark_and_bright_poles() {
        let p = SystemParams::new(0.01, 0.0).unwrap().with_j_cut(5).unwrap();
        let set = find_poles(&p, Emitter::One).unwrap();
        let mut slow: Vec<Complex64> = set
            .entries
            .iter()
            .map(|e| e.pole)
            .filter(|s| s.re > -10.0)
            .collect();
        slow.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_eq!(slow.len(), 2);
        assert!((slow[0] + 1.0).norm() < 1e-2);
        assert!(slow[1].norm() < 1e-2);
    }

    #[test]
    fn duplicate_detection_names_branches() {
        let mk = |sign, branch, pole| PoleEntry {
            sign,
            branch,
            seed: pole,
            shift: Complex64::new(0.0, 0.0),
            pole,
            residue: Complex64::new(0.0, 0.0),
        };
        let entries = vec![
            mk(BranchSign::Plus, 0, Complex64::new(-1.0, 0.5)),
            mk(BranchSign::Minus, 3, Complex64::new(-2.0, 0.0)),
            mk(BranchSign::Minus, 4, Complex64::new(-1.0, 0.5 + 1e-12)),
        ];
        match check_duplicates(Emitter::One, &entries) {
            Err(Error::DuplicatePole {
                a_branch: 0,
                b_branch: 4,
                ..
            }) => {}
            other => panic!("{other:?}"),
        }
    }
}
