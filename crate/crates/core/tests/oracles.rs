//! Reference values from closed forms and independent computations.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use thinfilm::analysis::{classify_outcome, growth_factor, References};
use thinfilm::evolution::{cn_step, evolve_run, EvolutionState, Outcome, Probes, StepControls};
use thinfilm::fdsteady::{fd_residual, fd_steady_state, fd_steady_state_svd, max_abs};
use thinfilm::spectral::{coefficients, resample};
use thinfilm::steady::{
    compute_e0, droplet_length, scale_with_bond, solve_canonical, solve_canonical_sampled, DEFAULT_TOL,
};
use thinfilm::{make_grid, ModelParams, PeriodicField};

#[test]
fn q1_orbits_are_harmonic() {
    // k'' + k - 1 = 0: period 2 pi and mean 1 for every minimum
    for alpha in [0.1, 0.5, 0.9] {
        let c = solve_canonical(1.0, alpha, DEFAULT_TOL).unwrap();
        assert_relative_eq!(c.period, 2.0 * PI, max_relative = 1e-10);
        assert_relative_eq!(c.area, 2.0 * PI, max_relative = 1e-10);
        let x = c.profile.x(c.profile.len() / 4);
        assert_relative_eq!(c.profile.values()[c.profile.len() / 4], 1.0 - (1.0 - alpha) * x.cos(), epsilon = 1e-9);
    }
}

#[test]
fn near_constant_orbits_have_the_linear_period() {
    for q in [-3.0, 0.5, 1.5, 2.5, 4.0] {
        let c = solve_canonical(q, 0.999, DEFAULT_TOL).unwrap();
        assert_relative_eq!(c.period, 2.0 * PI, max_relative = 1e-5);
    }
}

#[test]
fn e0_at_q2p5_agrees_with_the_inverted_droplet_length() {
    // E0 = B P^(3-q) A^(q-1) with the tabulated q = 2.5 droplet values
    let inverted = 1.561 * 5.287f64.powf(0.5) * 4.335f64.powf(1.5);
    let e0 = compute_e0(2.5, DEFAULT_TOL).unwrap();
    assert_relative_eq!(e0, inverted, max_relative = 2e-3);
    assert_relative_eq!(droplet_length(2.5, 1.561, 4.335).unwrap(), 5.287, epsilon = 0.01);
}

#[test]
fn rescaled_profile_keeps_its_mass_and_period() {
    let c = solve_canonical_sampled(2.5, 0.2145, DEFAULT_TOL, 512).unwrap();
    let s = scale_with_bond(&c, 1.3, 2.0 * PI).unwrap();
    assert_relative_eq!(s.profile.mass(), s.area, max_relative = 1e-8);
    assert_relative_eq!(s.profile.period_length(), 2.0 * PI);
}

#[test]
fn bordered_newton_matches_the_svd_route() {
    let c = solve_canonical_sampled(1.5, 0.2145, DEFAULT_TOL, 64).unwrap();
    let s = thinfilm::steady::scale_to_period(&c, 2.0 * PI).unwrap();
    let bordered = fd_steady_state(&s, 64).unwrap();
    let seed = resample(&s.profile, 64).unwrap();
    let svd = fd_steady_state_svd(&seed, &s.params).unwrap();
    assert!(bordered.profile.max_abs_diff(&svd.profile) < 1e-9);
    assert!(max_abs(&fd_residual(bordered.profile.values(), bordered.profile.dx(), &s.params)) < 1e-12);
    assert_relative_eq!(bordered.profile.mass(), seed.mass(), max_relative = 1e-13);
}

#[test]
fn linearly_unstable_mode_grows_as_predicted() {
    // k = 1 sits inside the unstable band for hbar = 1.05, q = 1.5, B = 1.2
    let params = ModelParams::from_q(1.0, 1.5, 1.2).unwrap();
    let hbar = 1.05;
    let dt = 1e-2;
    let sigma = growth_factor(1.0, dt, hbar, &params).unwrap();
    assert!(sigma > 1.0);
    let h = make_grid(2.0 * PI, 4096, |x| hbar + 1e-10 * x.cos()).unwrap();
    let next = cn_step(&EvolutionState::new(h.clone(), params, dt), dt).unwrap();
    let amp = |f: &PeriodicField| coefficients(&f.values().iter().map(|v| v - hbar).collect::<Vec<_>>())[1].re;
    assert_relative_eq!(amp(&next) / amp(&h), sigma, max_relative = 1e-6);
}

#[test]
fn stable_constant_relaxes_and_is_classified() {
    let params = ModelParams::from_q(1.0, 2.5, 1.0).unwrap();
    let h = make_grid(2.0 * PI, 64, |x| 0.7 + 1e-3 * x.cos()).unwrap();
    let controls = StepControls { epsilon: 1e-9, dt_max: 1.0, t_max: 200.0, ..Default::default() };
    let probes = Probes { stop_when_flat: Some(1e-10), ..Default::default() };
    let record = evolve_run(&h, &params, &controls, &probes).unwrap();
    let outcome = classify_outcome(&record, &References::default(), 1e-6).unwrap();
    match outcome {
        Outcome::RelaxedToConstant { value, distance } => {
            assert_relative_eq!(value, 0.7, epsilon = 1e-12);
            assert!(distance < 1e-6);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn fd_steady_state_is_a_fixed_point_of_one_step() {
    let c = solve_canonical_sampled(1.5, 0.2145, DEFAULT_TOL, 128).unwrap();
    let s = thinfilm::steady::scale_to_period(&c, 2.0 * PI).unwrap();
    let fd = fd_steady_state(&s, 128).unwrap();
    let next = cn_step(&EvolutionState::new(fd.profile.clone(), fd.params, 0.1), 0.1).unwrap();
    assert!(next.max_abs_diff(&fd.profile) < 1e-12);
}
