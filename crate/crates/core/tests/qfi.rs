use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

use wqed_core::dynamics::{amplitude_poles, find_pole_pair, Emitter, PoleSet, SystemParams};
use wqed_core::error::Error;
use wqed_core::parallel::Execution;
use wqed_core::qfi::{
    baseline_qfi, baseline_qfi_quadrature, delta_derivatives, overlap_dpsi_dpsi, overlap_psi_dpsi,
    overlaps, pole_delta_derivatives, qfi, qfi_at_times, qfi_fd_oracle, sample_states,
    state_derivatives, DetuningPath, SampledState,
};

const STEP: f64 = 1e-5;

fn pole_of(set: &PoleSet, sign: char, branch: i32) -> Complex64 {
    set.entries
        .iter()
        .find(|e| e.sign.symbol() == sign && e.branch == branch)
        .map(|e| e.pole)
        .unwrap()
}

fn residue_of(set: &PoleSet, sign: char, branch: i32) -> Complex64 {
    set.entries
        .iter()
        .find(|e| e.sign.symbol() == sign && e.branch == branch)
        .map(|e| e.residue)
        .unwrap()
}

fn neighbours(p: &SystemParams, path: DetuningPath, h: f64) -> (SystemParams, SystemParams) {
    (
        path.at(p, p.delta - h).unwrap(),
        path.at(p, p.delta + h).unwrap(),
    )
}

// phi2 = 0 sits on the wrap of the reduced phase, where a neighbouring
// detuning swaps the outermost branches of the truncated sum
fn base() -> SystemParams {
    SystemParams::new(2.0, 1.0).unwrap().with_phi2(0.3).unwrap()
}

#[test]
fn zero_detuning_pole_velocity_closed_form() {
    let i = Complex64::new(0.0, 1.0);
    for eta in [0.5, 2.0, 5.0] {
        let p = SystemParams::new(eta, 0.0).unwrap().with_phi2(0.2).unwrap();
        let (one, two) = find_pole_pair(&p).unwrap();
        let closed =
            |s: Complex64| i * (s + 0.5) / (2.0 * (s + 0.5) + 2.0 * eta * (s + 0.5) * (s + 0.5));
        // each emitter's own frequency held fixed
        let d1 = pole_delta_derivatives(&p, &one, DetuningPath::OneFixed).unwrap();
        for (e, d) in one.entries.iter().zip(&d1.entries) {
            assert!(
                (d.d_alpha - closed(e.pole)).norm() < 1e-10,
                "eta={eta} k={}",
                e.branch
            );
        }
        let d2 = pole_delta_derivatives(&p, &two, DetuningPath::TwoFixed).unwrap();
        for (e, d) in two.entries.iter().zip(&d2.entries) {
            assert!(
                (d.d_alpha + closed(e.pole)).norm() < 1e-10,
                "eta={eta} k={}",
                e.branch
            );
        }
        // with the mean fixed the lab-frame poles stand still, so the shift
        // follows the frame: +-i/2
        let m1 = pole_delta_derivatives(&p, &one, DetuningPath::MeanFixed).unwrap();
        let m2 = pole_delta_derivatives(&p, &two, DetuningPath::MeanFixed).unwrap();
        for (a, b) in m1.entries.iter().zip(&m2.entries) {
            assert!((a.d_alpha - 0.5 * i).norm() < 1e-10);
            assert!((b.d_alpha + 0.5 * i).norm() < 1e-10);
        }
    }
}

#[test]
fn pole_velocities_match_finite_differences() {
    let p = base();
    for path in [DetuningPath::MeanFixed, DetuningPath::TwoFixed] {
        let (one, two) = find_pole_pair(&p).unwrap();
        let (lo, hi) = neighbours(&p, path, STEP);
        let (lo1, lo2) = find_pole_pair(&lo).unwrap();
        let (hi1, hi2) = find_pole_pair(&hi).unwrap();
        for (set, lo, hi) in [(&one, &lo1, &hi1), (&two, &lo2, &hi2)] {
            let d = delta_derivatives(&p, set, path).unwrap();
            for sign in ['+', '-'] {
                for k in [-40, -7, -2, -1, 0, 1, 3, 12, 100] {
                    let j = set
                        .entries
                        .iter()
                        .position(|e| e.sign.symbol() == sign && e.branch == k)
                        .unwrap();
                    let fd = (pole_of(hi, sign, k) - pole_of(lo, sign, k)) / (2.0 * STEP);
                    assert!(
                        (fd - d.entries[j].d_alpha).norm() < 1e-5,
                        "{path:?} {sign}{k}: {fd}"
                    );
                    let fd = (residue_of(hi, sign, k) - residue_of(lo, sign, k)) / (2.0 * STEP);
                    assert!(
                        (fd - d.entries[j].script_r).norm() < 1e-5,
                        "{path:?} {sign}{k}: {fd}"
                    );
                }
            }
        }
    }
}

#[test]
fn amplitude_derivatives_match_finite_differences() {
    let p = base();
    let times = [1.0, 5.0, 20.0];
    for path in [DetuningPath::MeanFixed, DetuningPath::TwoFixed] {
        let ((one, two), (d1, d2)) = state_derivatives(&p, path).unwrap();
        let (lo, hi) = neighbours(&p, path, STEP);
        let lo = amplitude_poles(&lo, &times).unwrap();
        let hi = amplitude_poles(&hi, &times).unwrap();
        for (k, &t) in times.iter().enumerate() {
            let fd1 = (hi.c1[k] - lo.c1[k]) / (2.0 * STEP);
            let fd2 = (hi.c2[k] - lo.c2[k]) / (2.0 * STEP);
            assert!(
                (fd1 - d1.amplitude_derivative(&one, t)).norm() < 1e-5,
                "{path:?} t={t}"
            );
            assert!(
                (fd2 - d2.amplitude_derivative(&two, t)).norm() < 1e-5,
                "{path:?} t={t}"
            );
        }
    }
}

#[test]
fn rate_derivative_matches_finite_differences() {
    let p = base();
    let ((one, _), (d1, _)) = state_derivatives(&p, DetuningPath::TwoFixed).unwrap();
    let (lo, hi) = neighbours(&p, DetuningPath::TwoFixed, STEP);
    let (lo1, _) = find_pole_pair(&lo).unwrap();
    let (hi1, _) = find_pole_pair(&hi).unwrap();
    for t in [3.0, 7.5] {
        let fd = (hi1.evaluate_derivative(t) - lo1.evaluate_derivative(t)) / (2.0 * STEP);
        assert!((fd - d1.rate_derivative(&one, t)).norm() < 1e-5, "t={t}");
    }
}

#[test]
fn slow_branch_moves_in_frequency() {
    let p = SystemParams::new(2.0, 0.1).unwrap();
    let (one, two) = find_pole_pair(&p).unwrap();
    for set in [&one, &two] {
        let d = pole_delta_derivatives(&p, set, DetuningPath::MeanFixed).unwrap();
        for (e, d) in set.entries.iter().zip(&d.entries) {
            if e.branch == 0 {
                assert!(
                    d.d_alpha.re.abs() < d.d_alpha.im.abs(),
                    "{:?} {}",
                    set.emitter,
                    e.sign.symbol()
                );
            }
        }
    }
}

#[test]
fn residue_velocities_sum_to_zero() {
    for &(eta, delta) in &[(2.0, 1.0), (1.0, 0.5), (5.0, 0.2)] {
        let p = SystemParams::new(eta, delta)
            .unwrap()
            .with_phi2(0.3)
            .unwrap();
        let (_, (d1, d2)) = state_derivatives(&p, DetuningPath::MeanFixed).unwrap();
        for d in [&d1, &d2] {
            let sum: Complex64 = d.entries.iter().map(|e| e.script_r).sum();
            assert!(sum.norm() < 1e-3, "eta={eta} delta={delta}: {sum}");
        }
    }
}

#[test]
fn detuning_depletes_the_trapped_population() {
    // |c_1|^2 is even in delta, so the slope is taken just off zero
    let t = 20.0;
    for eta in [0.5, 1.0, 2.0] {
        let p = SystemParams::new(eta, 0.05)
            .unwrap()
            .with_phi2(0.2)
            .unwrap();
        let ((one, _), (d1, _)) = state_derivatives(&p, DetuningPath::OneFixed).unwrap();
        let c = one.evaluate(t);
        let slope = 2.0 * (c.conj() * d1.amplitude_derivative(&one, t)).re;
        assert!(slope < 0.0, "eta={eta}: {slope}");
    }
}

#[test]
fn normalisation_is_preserved_along_the_family() {
    for eta in [0.5, 1.0, 2.0, 3.5, 6.0] {
        for delta in [0.1, 0.5, 1.0, 2.0, 3.0] {
            let p = SystemParams::new(eta, delta).unwrap();
            let times = [5.0, 20.0, 100.0];
            let (poles, dpoles) = state_derivatives(&p, DetuningPath::MeanFixed).unwrap();
            for t in times {
                let o = overlaps(&p, &poles, &dpoles, t, Execution::default()).unwrap();
                assert!(
                    o.psi_dpsi.re.abs() < 1e-6,
                    "eta={eta} delta={delta} t={t}: {}",
                    o.psi_dpsi
                );
                assert!(o.dpsi_dpsi >= 0.0);
            }
        }
    }
}

fn difference(hi: &SampledState, lo: &SampledState, scale: f64) -> SampledState {
    let diff =
        |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| (x - y) * scale).collect();
    SampledState {
        atoms: [
            (hi.atoms[0] - lo.atoms[0]) * scale,
            (hi.atoms[1] - lo.atoms[1]) * scale,
        ],
        omega_bar: hi.omega_bar.clone(),
        channel_a: diff(&hi.channel_a, &lo.channel_a),
        channel_b: diff(&hi.channel_b, &lo.channel_b),
    }
}

fn sampled_overlaps(p: &SystemParams, t: f64, half_width: f64, points: usize) -> (Complex64, f64) {
    let path = DetuningPath::MeanFixed;
    let h = 1e-4;
    let (lo, hi) = neighbours(p, path, h);
    let s = sample_states(
        &[lo, *p, hi],
        t,
        path,
        half_width,
        points,
        Execution::default(),
    )
    .unwrap();
    let d = difference(&s[2], &s[0], 0.5 / h);
    (s[1].inner(&d), d.inner(&d).re)
}

#[test]
fn overlaps_match_the_frequency_grid() {
    // the window has to be wide at gamma t = 5: the field ends abruptly at
    // the still-excited emitters and its derivative decays only like 1/omega
    let p = SystemParams::new(2.0, 1.0).unwrap();
    let t = 5.0;
    let (poles, dpoles) = state_derivatives(&p, DetuningPath::MeanFixed).unwrap();
    let psi_dpsi = overlap_psi_dpsi(&p, &poles, &dpoles, t).unwrap();
    let dpsi_dpsi = overlap_dpsi_dpsi(&p, &poles, &dpoles, t).unwrap();
    let (grid_pd, grid_dd) = sampled_overlaps(&p, t, 400.0, 40_001);
    assert!(
        (grid_pd - psi_dpsi).norm() < 1e-4,
        "{grid_pd} vs {psi_dpsi}"
    );
    assert!(
        (grid_dd - dpsi_dpsi).abs() < 1e-4,
        "{grid_dd} vs {dpsi_dpsi}"
    );
}

#[test]
#[ignore = "2e4 points on |omega| <= 10 truncate the 1/omega tail: errors 1.1e-3 and 2.5e-3 at gamma t = 5"]
fn overlaps_match_a_narrow_frequency_grid() {
    let p = SystemParams::new(2.0, 1.0).unwrap();
    let t = 5.0;
    let (poles, dpoles) = state_derivatives(&p, DetuningPath::MeanFixed).unwrap();
    let psi_dpsi = overlap_psi_dpsi(&p, &poles, &dpoles, t).unwrap();
    let dpsi_dpsi = overlap_dpsi_dpsi(&p, &poles, &dpoles, t).unwrap();
    let (grid_pd, grid_dd) = sampled_overlaps(&p, t, 10.0, 20_000);
    assert!(
        (grid_pd - psi_dpsi).norm() < 1e-4,
        "{grid_pd} vs {psi_dpsi}"
    );
    assert!(
        (grid_dd - dpsi_dpsi).abs() < 1e-4,
        "{grid_dd} vs {dpsi_dpsi}"
    );
}

#[test]
fn initial_state_carries_no_information() {
    let p = SystemParams::new(2.0, 1.0).unwrap();
    let (poles, dpoles) = state_derivatives(&p, DetuningPath::MeanFixed).unwrap();
    assert_eq!(
        overlap_psi_dpsi(&p, &poles, &dpoles, 0.0).unwrap(),
        Complex64::new(0.0, 0.0)
    );
    assert_eq!(overlap_dpsi_dpsi(&p, &poles, &dpoles, 0.0).unwrap(), 0.0);
    assert_eq!(qfi(&p, 0.0).unwrap().h, 0.0);
    assert_eq!(qfi_fd_oracle(&p, 0.0, 1e-4).unwrap(), 0.0);
}

#[test]
fn information_grows_towards_a_steady_value() {
    let p = SystemParams::new(2.0, 1.0).unwrap();
    let h = qfi_at_times(
        &p,
        &[5.0, 100.0, 5000.0],
        DetuningPath::MeanFixed,
        Execution::default(),
    )
    .unwrap();
    assert!(h[1].h > h[0].h);
    assert!(h[2].h >= h[1].h, "{} < {}", h[2].h, h[1].h);
    assert!((h[2].h - h[1].h).abs() < 1e-6);
}

#[test]
fn lossy_coupling_is_unsupported() {
    let p = SystemParams::new(2.0, 1.0).unwrap().with_beta(0.9).unwrap();
    assert!(matches!(qfi(&p, 10.0), Err(Error::Unsupported(_))));
    assert!(matches!(
        qfi_fd_oracle(&p, 10.0, 1e-4),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn oracle_step_is_range_checked() {
    let p = SystemParams::new(2.0, 1.0).unwrap();
    for d in [1e-6, 2e-3] {
        assert!(matches!(
            qfi_fd_oracle(&p, 10.0, d),
            Err(Error::InvalidParameter {
                name: "d_delta",
                ..
            })
        ));
    }
}

#[test]
fn oracle_agrees_at_late_time() {
    let p = SystemParams::new(2.0, 1.0).unwrap();
    let h = qfi(&p, 100.0).unwrap().h;
    let o = qfi_fd_oracle(&p, 100.0, 1e-4).unwrap();
    assert!((o - h).abs() / h < 1e-3, "{o} vs {h}");
}

#[test]
fn oracle_agrees_on_a_ridge() {
    let p = SystemParams::new(1.5 * PI, 1.0).unwrap();
    let h = qfi(&p, 1000.0).unwrap().h;
    let o = qfi_fd_oracle(&p, 1000.0, 1e-4).unwrap();
    assert!((o - h).abs() / h < 1e-2, "{o} vs {h}");
}

#[test]
fn detuning_sign_symmetry_is_reported() {
    // open question: nothing is asserted beyond finiteness
    let t = 100.0;
    for &(eta, delta) in &[(2.0, 1.0), (1.5 * PI, 1.0), (3.0, 0.3)] {
        let plus = qfi(&SystemParams::new(eta, delta).unwrap(), t).unwrap().h;
        let minus = qfi(&SystemParams::new(eta, -delta).unwrap(), t).unwrap().h;
        println!("eta={eta} delta=+-{delta}: h = {plus} / {minus}");
        assert!(plus.is_finite() && minus.is_finite());
    }
}

#[test]
fn baseline_closed_form_values() {
    assert_eq!(baseline_qfi(0.0), 0.0);
    let e = (-1.0f64).exp();
    assert!((baseline_qfi(1.0) - 4.0 * (1.0 - (e + 2.0) * e)).abs() < 1e-15);
    assert!((baseline_qfi(1.0) - 0.5156).abs() < 1e-4);
    assert!((baseline_qfi(20.0) - 4.0).abs() < 1e-6);
}

#[test]
fn baseline_matches_its_overlap_quadrature() {
    for k in 1..=100 {
        let t = 0.1 * k as f64;
        let closed = baseline_qfi(t);
        let numeric = baseline_qfi_quadrature(t);
        assert!(
            (numeric - closed).abs() <= 1e-8 * closed,
            "t={t}: {numeric} vs {closed}"
        );
    }
}

#[test]
#[ignore = "steady h at eta delta = 3 pi / 2 is about 2, not above 40"]
fn ridges_beat_the_baseline_tenfold() {
    for delta in [0.5, 1.0, 1.5] {
        let p = SystemParams::new(1.5 * PI / delta, delta).unwrap();
        let h = qfi(&p, 5000.0).unwrap().h;
        assert!(h >= 40.0, "delta={delta}: {h}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn information_is_non_negative(eta in 0.3f64..8.0, delta in -3.0f64..3.0, t in 0.0f64..400.0) {
        let p = SystemParams::new(eta, delta).unwrap().with_j_cut(60).unwrap();
        let h = qfi(&p, t).unwrap().h;
        prop_assert!(h >= -1e-9, "h = {}", h);
    }

    #[test]
    fn worker_count_does_not_change_the_overlaps(eta in 0.5f64..5.0, delta in 0.1f64..2.0, t in 1.0f64..50.0) {
        let p = SystemParams::new(eta, delta).unwrap().with_j_cut(40).unwrap();
        let (poles, dpoles) = state_derivatives(&p, DetuningPath::MeanFixed).unwrap();
        let seq = overlaps(&p, &poles, &dpoles, t, Execution::Sequential).unwrap();
        let par = overlaps(&p, &poles, &dpoles, t, Execution::default()).unwrap();
        prop_assert_eq!(seq, par);
    }
}

#[test]
fn emitter_labels_follow_the_pole_sets() {
    let p = SystemParams::new(2.0, 1.0).unwrap();
    let ((one, two), (d1, d2)) = state_derivatives(&p, DetuningPath::MeanFixed).unwrap();
    assert_eq!((one.emitter, two.emitter), (Emitter::One, Emitter::Two));
    assert_eq!((d1.emitter, d2.emitter), (Emitter::One, Emitter::Two));
    assert_eq!(d1.entries.len(), one.len());
}

#[test]
#[ignore = "at eta = 3 pi / 2, delta = 1 the steady h is 2.36 / 1.92 / 1.78 at 0.8 / 1 / 1.2 times the ridge detuning"]
fn ridge_beats_offset_detunings() {
    let eta = 1.5 * PI;
    let ridge = 1.0;
    let h = |delta: f64| {
        qfi(&SystemParams::new(eta, delta).unwrap(), 5000.0)
            .unwrap()
            .h
    };
    let on = h(ridge);
    for off in [0.8 * ridge, 1.2 * ridge] {
        assert!(on > h(off), "delta={off}");
    }
}
