use proptest::prelude::*;
use std::f64::consts::PI;

use wqed_core::dynamics::{find_pole_pair, SystemParams};
use wqed_core::fieldspace::{
    field_probability_poles, loss_rate, loss_rate_gradient, loss_rate_gradient_poles,
    loss_rate_gradient_with, loss_rate_with, region_probability, spatial_amplitudes, Arrival,
    LossModel, KAPPA,
};
use wqed_core::mathkit::gauss_legendre;
use wqed_core::parallel::Execution;
use wqed_core::spectrum::spectrum_g;

fn region_norm(params: &SystemParams, gamma_t: f64) -> f64 {
    // x is integrated in units of v/gamma, so dx = eta d(x/d)
    let density = |u: f64| {
        let (a, b) = spatial_amplitudes(params, u, gamma_t).unwrap();
        a.norm_sqr() + b.norm_sqr()
    };
    // split at the light fronts, where the field switches on
    let mut cuts = vec![-0.5, 0.5];
    for front in [-0.5 + gamma_t / params.eta, 0.5 - gamma_t / params.eta] {
        if front > -0.5 && front < 0.5 {
            cuts.push(front);
        }
    }
    cuts.sort_by(f64::total_cmp);
    let total: f64 = cuts
        .windows(2)
        .map(|w| gauss_legendre(&density, w[0], w[1], 200))
        .sum();
    KAPPA * params.eta * total
}

#[test]
fn first_light_cone_carries_only_the_rightward_field() {
    let p = SystemParams::new(3.0, 0.4).unwrap();
    let t = 1.0;
    let (a, b) = spatial_amplitudes(&p, -0.45, t).unwrap();
    assert!(a.norm() > 0.0);
    assert_eq!(b.norm(), 0.0);
    // the front is at x/d = -1/2 + t/eta
    for u in [-0.1, 0.2, 0.5] {
        let (a, b) = spatial_amplitudes(&p, u, t).unwrap();
        assert_eq!((a.norm(), b.norm()), (0.0, 0.0), "x/d = {u}");
    }
}

#[test]
fn positions_outside_the_region_are_rejected() {
    let p = SystemParams::new(2.0, 0.0).unwrap();
    assert!(spatial_amplitudes(&p, 0.51, 1.0).is_err());
    assert!(spatial_amplitudes(&p, 0.0, -1.0).is_err());
}

#[test]
fn spatial_norm_matches_the_region_probability() {
    for &(eta, delta, t) in &[(2.0, 0.0, 6.0), (2.0, 1.0, 3.3), (5.0, 0.5, 2.0)] {
        let p = SystemParams::new(eta, delta).unwrap();
        let from_space = region_norm(&p, t);
        let from_time = region_probability(&p, t).unwrap().p_field;
        assert!(
            (from_space - from_time).abs() <= 1e-9,
            "eta={eta} t={t}: {from_space} vs {from_time}"
        );
    }
}

#[test]
fn trapped_field_forms_a_standing_wave() {
    // phi2 = 4 pi puts the mean frequency at 2 pi, so the fringe period pi/omega_0 is 1/2
    let p = SystemParams::new(2.0, 0.0)
        .unwrap()
        .with_phi2(4.0 * PI)
        .unwrap();
    let t = 6.0;
    let fringes: Vec<f64> = (0..=2000)
        .map(|k| {
            let (a, b) = spatial_amplitudes(&p, -0.5 + k as f64 / 2000.0, t).unwrap();
            (a.conj() * b).re
        })
        .collect();
    let crossings = fringes
        .windows(2)
        .filter(|w| w[0].signum() != w[1].signum())
        .count();
    // d / (pi/omega_0) = 4 periods, two sign changes each
    assert!((7..=9).contains(&crossings), "{crossings}");
}

#[test]
fn everything_starts_in_emitter_one() {
    let p = SystemParams::new(2.0, 1.0).unwrap();
    let r = region_probability(&p, 0.0).unwrap();
    assert_eq!((r.p_total, r.p_atoms, r.p_field), (1.0, 1.0, 0.0));
    assert_eq!(r.kappa, 4.0 * PI);
    let later = region_probability(&p, 1e-9).unwrap();
    assert!((later.p_total - 1.0).abs() < 1e-9);
}

#[test]
fn bound_state_keeps_what_the_spectrum_does_not_radiate() {
    let p = SystemParams::new(2.0, 0.0).unwrap();
    let r = region_probability(&p, 1e3).unwrap();
    let width = 2000.0;
    let n = 2_000_000;
    let h = 2.0 * width / n as f64;
    let grid: Vec<f64> = (0..n).map(|k| -width + (k as f64 + 0.5) * h).collect();
    // G falls off as 1/(2 pi w^2), so the two tails hold 1/(pi width)
    let escaped = spectrum_g(&p, &grid).unwrap().g.iter().sum::<f64>() * h + 1.0 / (PI * width);
    assert!(r.p_total > 0.2);
    assert!(
        (r.p_total - (1.0 - escaped)).abs() <= 1e-3,
        "{} vs {}",
        r.p_total,
        1.0 - escaped
    );
}

#[test]
fn detuning_empties_the_region() {
    let p = SystemParams::new(2.0, 2.0).unwrap();
    assert!(region_probability(&p, 1e3).unwrap().p_total < 0.05);
}

#[test]
fn isolated_emitter_keeps_half_of_its_loss_in_the_region() {
    let p = SystemParams::new(5.0, 0.7)
        .unwrap()
        .with_beta(1e-9)
        .unwrap();
    for t in [0.3, 1.0, 2.5, 4.9] {
        let g = loss_rate(&p, t).unwrap();
        assert_eq!(g.regime, Arrival::Before);
        assert!((g.gamma_rate + 0.5 * (-t).exp()).abs() <= 1e-12, "t={t}");
    }
}

#[test]
fn perfect_bound_state_does_not_leak() {
    let p = SystemParams::new(2.0, 0.0).unwrap();
    assert!(loss_rate(&p, 1e3).unwrap().gamma_rate.abs() <= 1e-8);
}

#[test]
fn first_arrival_is_the_only_jump() {
    let p = SystemParams::new(2.0, 0.6).unwrap();
    let eps = 1e-9;
    let jump =
        loss_rate(&p, 2.0 + eps).unwrap().gamma_rate - loss_rate(&p, 2.0).unwrap().gamma_rate;
    // half the initial population starts leaving through emitter 2
    assert!((jump + 0.5).abs() <= 1e-6, "{jump}");
    assert_eq!(loss_rate(&p, 2.0).unwrap().regime, Arrival::Before);
    for t in [4.0, 6.0, 1.0, 3.0] {
        let left = loss_rate(&p, t - eps).unwrap().gamma_rate;
        let right = loss_rate(&p, t + eps).unwrap().gamma_rate;
        assert!((left - right).abs() <= 1e-6, "t={t}");
    }
}

#[test]
fn bookkeeping_identity_holds() {
    let h = 1e-4;
    for &(eta, delta) in &[(2.0, 1.0), (0.5, 0.0), (5.0, 0.3), (1.0, 2.5)] {
        let p = SystemParams::new(eta, delta).unwrap();
        let mut worst = 0.0_f64;
        for k in 0..540 {
            let t = 0.1 + 0.037 * k as f64;
            if (t - (t / eta).round() * eta).abs() <= 2.0 * h {
                continue;
            }
            let up = region_probability(&p, t + h).unwrap().p_total;
            let down = region_probability(&p, t - h).unwrap().p_total;
            let rate = loss_rate(&p, t).unwrap().gamma_rate;
            worst = worst.max(((up - down) / (2.0 * h) - rate).abs());
        }
        assert!(worst <= 1e-5, "eta={eta} delta={delta}: {worst:e}");
    }
}

#[test]
fn pole_sums_reproduce_the_field_after_transients() {
    for &(eta, delta) in &[(2.0, 1.0), (2.0, 0.0), (1.0, 0.5)] {
        let p = SystemParams::new(eta, delta).unwrap();
        let (one, two) = find_pole_pair(&p).unwrap();
        for t in [5.0, 10.0, 20.0] {
            let closed =
                field_probability_poles(&[&one, &two], eta, t, Execution::default()).unwrap();
            let quad = region_probability(&p, t).unwrap().p_field;
            assert!(
                (closed - quad).abs() <= 1e-8,
                "eta={eta} t={t}: {closed} vs {quad}"
            );
            let rate = loss_rate_with(&p, t, LossModel::Poles).unwrap().gamma_rate;
            assert!((rate - loss_rate(&p, t).unwrap().gamma_rate).abs() <= 1e-8);
        }
    }
}

#[test]
fn resonant_gradient_vanishes() {
    let p = SystemParams::new(2.0, 0.0).unwrap();
    for t in [2.001, 3.5, 7.0] {
        assert!(
            loss_rate_gradient(&p, t, 1e-4).unwrap().abs() <= 1e-3,
            "t={t}"
        );
    }
}

#[test]
fn gradient_step_must_be_positive() {
    let p = SystemParams::new(2.0, 0.5).unwrap();
    assert!(loss_rate_gradient(&p, 3.0, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn region_probability_is_bounded_and_never_grows(
        eta in 0.3f64..6.0,
        delta in -3.0f64..3.0,
        t in 0.0f64..25.0,
    ) {
        let p = SystemParams::new(eta, delta).unwrap();
        let r = region_probability(&p, t).unwrap();
        prop_assert!(r.p_total >= 0.0 && r.p_total <= 1.0 + 1e-6);
        prop_assert!(loss_rate(&p, t).unwrap().gamma_rate <= 1e-12);
    }

    #[test]
    fn field_vanishes_outside_the_light_cones(
        eta in 0.5f64..6.0,
        delta in -2.0f64..2.0,
        u in -0.5f64..0.5,
        frac in 0.0f64..1.0,
    ) {
        let p = SystemParams::new(eta, delta).unwrap();
        // before the first arrival emitter 2 is dark and emitter 1's front is at u = -1/2 + t/eta
        let t = frac * eta;
        let (a, b) = spatial_amplitudes(&p, u, t).unwrap();
        prop_assert_eq!(b.norm(), 0.0);
        if u > -0.5 + t / eta {
            prop_assert_eq!(a.norm(), 0.0);
        }
    }
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    for &(eta, delta, t) in &[
        (2.0, 1.0, 5.3),
        (1.0, 0.5, 3.7),
        (3.0, 2.0, 8.1),
        (5.0, 0.3, 12.2),
        (0.7, 1.4, 2.2),
    ] {
        let p = SystemParams::new(eta, delta)
            .unwrap()
            .with_phi2(0.3)
            .unwrap();
        let analytic = loss_rate_gradient_poles(&p, t).unwrap();
        let fd = loss_rate_gradient_with(&p, t, 1e-4, LossModel::Poles).unwrap();
        assert!(
            (analytic - fd).abs() < 1e-4,
            "eta={eta} delta={delta} t={t}: {analytic} vs {fd}"
        );
    }
}
