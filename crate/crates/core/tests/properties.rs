use std::f64::consts::PI;

use proptest::prelude::*;
use thinfilm::analysis::{
    best_shift, energy_unchecked, estimate_singularity_time, growth_factor, landau, shift_field, Bifurcation,
    EnergyParams,
};
use thinfilm::banded::{solve_pentadiagonal_periodic, CyclicBanded};
use thinfilm::evolution::{adaptive_step, cn_step, EvolutionState, StepControls};
use thinfilm::perturb::{PerturbationKind, PerturbationSpec};
use thinfilm::steady::{scale_to_period, scale_with_bond, solve_canonical_sampled, DEFAULT_TOL};
use thinfilm::{make_grid, ModelParams};

fn smooth(hbar: f64, a1: f64, a2: f64, phase: f64) -> impl Fn(f64) -> f64 {
    move |x| hbar + a1 * (x + phase).cos() + a2 * (2.0 * x).sin()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cn_step_conserves_mass(
        q in -3.0f64..4.0,
        n in 0.0f64..3.0,
        a1 in 0.0f64..0.3,
        a2 in 0.0f64..0.2,
        dt in 1e-4f64..1e-1,
    ) {
        let params = ModelParams::from_q(n, q, 1.0).unwrap();
        let h = make_grid(2.0 * PI, 64, smooth(1.0, a1, a2, 0.3)).unwrap();
        let next = cn_step(&EvolutionState::new(h.clone(), params, dt), dt).unwrap();
        prop_assert!(((next.mass() - h.mass()) / h.mass()).abs() < 1e-13);
    }

    #[test]
    fn controlled_steps_do_not_raise_energy(
        q in prop::sample::select(vec![-3.0, 0.5, 1.5, 2.5, 4.0]),
        a1 in 0.01f64..0.2,
        a2 in 0.0f64..0.1,
        phase in 0.0f64..6.0,
    ) {
        let n = if q == -3.0 { 3.0 } else { 1.0 };
        let params = ModelParams::from_q(n, q, 1.0).unwrap();
        let ep = EnergyParams::new(params);
        let h = make_grid(2.0 * PI, 64, smooth(1.0, a1, a2, phase)).unwrap();
        let controls = StepControls { epsilon: 1e-9, ..Default::default() };
        let mut state = EvolutionState::new(h, params, controls.dt_initial);
        let mut e = energy_unchecked(&state.current, &ep);
        for _ in 0..40 {
            state = adaptive_step(&state, &controls).unwrap().state;
            let e_next = energy_unchecked(&state.current, &ep);
            prop_assert!(e_next - e <= 1e-10, "energy rose by {}", e_next - e);
            e = e_next;
        }
    }

    #[test]
    fn growth_factor_is_bounded_on_the_stable_band(
        q in -3.0f64..4.0,
        n in 0.0f64..3.0,
        hbar in 0.2f64..3.0,
        bond in 0.01f64..10.0,
        k in 1u32..=64,
        log_dt in -4.0f64..0.0,
    ) {
        let params = ModelParams::from_q(n, q, bond).unwrap();
        let k = k as f64;
        prop_assume!(k * k >= params.ratio(hbar));
        let sigma = growth_factor(k, 10f64.powf(log_dt), hbar, &params).unwrap();
        prop_assert!(sigma.abs() <= 1.0);
    }

    #[test]
    fn landau_sign_follows_the_two_roots(q in -2.0f64..4.0, sigma in 0.01f64..5.0) {
        let l = landau(q, sigma).unwrap();
        let supercritical = q > 1.0 && q < 1.75;
        prop_assert_eq!(l.bifurcation == Bifurcation::Supercritical, supercritical);
        prop_assert_eq!(l.kappa > 0.0, supercritical);
    }

    #[test]
    fn singularity_time_is_exact_on_power_laws(
        p in prop::sample::select(vec![0.2, -1.0 / 7.0, 1.0]),
        t_c in 0.5f64..20.0,
        c in 0.1f64..10.0,
        gap in 0.05f64..0.4,
    ) {
        let t1 = t_c * (1.0 - gap);
        let t2 = t_c * (1.0 - 0.5 * gap);
        let v = |t: f64| c * (t_c - t).powf(p);
        let est = estimate_singularity_time(&[(t1, v(t1)), (t2, v(t2))], p).unwrap();
        prop_assert!(((est.t_c - t_c) / t_c).abs() < 1e-12, "{} vs {}", est.t_c, t_c);
    }

    #[test]
    fn shift_is_recovered_to_a_tenth_of_a_cell(s in 0.0f64..(2.0 * PI), a2 in 0.0f64..0.3) {
        let g = make_grid(2.0 * PI, 128, smooth(1.0, 0.4, a2, 0.0)).unwrap();
        let h = shift_field(&g, s);
        let (found, dist) = best_shift(&h, &g).unwrap();
        let err = (found - s).abs();
        let err = err.min(2.0 * PI - err);
        prop_assert!(err < g.dx() / 10.0, "shift {} found {}", s, found);
        prop_assert!(dist < 1e-2);
    }

    #[test]
    fn perturbation_shapes_have_zero_mean_and_unit_sup(
        amplitude in -1e-2f64..1e-2,
        decay in 0.1f64..2.0,
        seed in 0u64..1000,
        which in 0usize..3,
    ) {
        prop_assume!(amplitude.abs() > 1e-8);
        let kind = match which {
            0 => PerturbationKind::SecondDerivative,
            1 => PerturbationKind::FirstDerivative,
            _ => PerturbationKind::Random { decay, seed },
        };
        let base = make_grid(2.0 * PI, 128, smooth(1.0, 0.3, 0.1, 0.2)).unwrap();
        let phi = PerturbationSpec::new(kind, amplitude).unwrap().shape(&base).unwrap();
        prop_assert!(phi.mean().abs() < 1e-14);
        let sup = phi.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!((sup - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rescaling_keeps_the_invariant(
        q in prop::sample::select(vec![-3.0, 0.5, 1.5, 2.5, 4.0]),
        alpha in 0.1f64..0.8,
        bond in 0.2f64..3.0,
    ) {
        let c = solve_canonical_sampled(q, alpha, DEFAULT_TOL, 256).unwrap();
        let e = c.scale_invariant;
        let by_period = scale_to_period(&c, 2.0 * PI).unwrap();
        let by_bond = scale_with_bond(&c, bond, 2.0 * PI).unwrap();
        prop_assert!(((by_period.scale_invariant() - e) / e).abs() < 1e-10);
        prop_assert!(((by_bond.scale_invariant() - e) / e).abs() < 1e-10);
    }

    #[test]
    fn cyclic_pentadiagonal_solve_has_small_residual(
        seed in prop::collection::vec(-1.0f64..1.0, 5 * 24),
        rhs in prop::collection::vec(-1.0f64..1.0, 24),
    ) {
        let n = 24;
        let mut a = CyclicBanded::zeros(n, 2, 2);
        for (o, chunk) in (-2isize..=2).zip(seed.chunks(n)) {
            let d = a.diag_mut(o);
            for (i, v) in chunk.iter().enumerate() {
                d[i] = if o == 0 { 6.0 + v } else { *v };
            }
        }
        let bands: Vec<Vec<f64>> = (-2isize..=2).map(|o| a.diag_mut(o).to_vec()).collect();
        let x = solve_pentadiagonal_periodic(
            [&bands[0], &bands[1], &bands[2], &bands[3], &bands[4]],
            &rhs,
        )
        .unwrap();
        let ax = a.matvec(&x);
        let r = ax.iter().zip(&rhs).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        prop_assert!(r < 1e-10);
    }
}
