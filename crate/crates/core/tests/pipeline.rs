use padic_pme::evolve::{contraction_gap, linear_exact, run};
use padic_pme::harmonic::{forward, inverse};
use padic_pme::initial::InitialCondition;
use padic_pme::monotone::{prox_step, psi_functional};
use padic_pme::sobolev::{h1_norm, hminus1_norm};
use padic_pme::vladimirov::eigenfunction_psi0;
use padic_pme::{BallGrid, GridFunction, PowerLaw, ProxConfig, SolverConfig, Vladimirov};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn ground_state_decay_in_hminus1() {
    let g = BallGrid::new(3, 1, 2).unwrap();
    let d = Vladimirov::new(g, 0.8).unwrap();
    let nl = PowerLaw::new(1.0).unwrap();
    let cfg = SolverConfig::new(0.25, 2.0).unwrap();
    let traj = run(&eigenfunction_psi0(g), &cfg, &d, &nl).unwrap();
    let l0 = d.lambda0();
    for (n, diag) in traj.diagnostics.iter().enumerate() {
        let expected = l0.powf(-0.5) * (1.0 + 0.25 * l0).powi(-(n as i32));
        assert!((diag.hminus1 - expected).abs() < 1e-10 * expected);
    }
}

#[test]
fn operator_is_an_isometry_from_h1_to_hminus1() {
    let g = BallGrid::new(5, 0, 2).unwrap();
    let d = Vladimirov::new(g, 0.4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let f = GridFunction::random_complex(g, &mut rng);
        let lhs = hminus1_norm(&d.apply_spectral(&f), &d);
        assert!((lhs - h1_norm(&f, &d)).abs() < 1e-10 * lhs);
    }
}

#[test]
fn solver_handles_every_generator() {
    let g = BallGrid::new(2, 0, 4).unwrap();
    let d = Vladimirov::new(g, 0.5).unwrap();
    let nl = PowerLaw::new(2.0).unwrap();
    let cfg = SolverConfig::new(0.1, 0.5).unwrap();
    for spec in ["psi0", "random", "indicator", "character:3"] {
        let ic: InitialCondition = spec.parse().unwrap();
        let u0 = ic.build(g, 5).unwrap();
        let traj = run(&u0, &cfg, &d, &nl).unwrap();
        assert!(traj.is_complete(), "{spec}");
        assert_eq!(traj.states.len(), 6);
        assert!(traj.max_increase(|s| s.psi) <= 1e-10);
    }
}

#[test]
fn fast_and_direct_transforms_agree_on_a_large_grid() {
    let g = BallGrid::new(2, 1, 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = GridFunction::random_complex(g, &mut rng);
    assert!(inverse(&forward(&f)).max_abs_diff(&f) < 1e-12);
}

#[test]
fn linear_solver_tracks_exact_flow() {
    let g = BallGrid::new(2, 1, 3).unwrap();
    let d = Vladimirov::new(g, 0.5).unwrap();
    let nl = PowerLaw::new(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let u0 = GridFunction::random_real(g, &mut rng);
    let errs: Vec<f64> = [0.02, 0.01]
        .iter()
        .map(|&tau| {
            let traj = run(&u0, &SolverConfig::new(tau, 1.0).unwrap(), &d, &nl).unwrap();
            traj.last().max_abs_diff(&linear_exact(&u0, 1.0, &d))
        })
        .collect();
    assert!(errs[1] < 0.6 * errs[0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn prox_descent_for_any_exponent(m in 0.3f64..4.0, tau in 0.01f64..2.0, seed in any::<u64>()) {
        let g = BallGrid::new(3, 0, 2).unwrap();
        let d = Vladimirov::new(g, 0.6).unwrap();
        let nl = PowerLaw::new(m).unwrap();
        let f = GridFunction::random_real(g, &mut ChaCha8Rng::seed_from_u64(seed));
        let r = prox_step(&d, &nl, tau, &f, &ProxConfig::default()).unwrap();
        prop_assert!(r.residual_hminus1 < 1e-10);
        let lhs = psi_functional(&r.u, &nl) + hminus1_norm(&r.u.sub(&f).unwrap(), &d).powi(2) / (2.0 * tau);
        prop_assert!(lhs <= psi_functional(&f, &nl) + 1e-9);
    }

    #[test]
    fn trajectories_contract(m in 0.4f64..3.5, seed in any::<u64>()) {
        let g = BallGrid::new(2, 1, 2).unwrap();
        let d = Vladimirov::new(g, 0.7).unwrap();
        let nl = PowerLaw::new(m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u0 = GridFunction::random_real(g, &mut rng).scale(3.0);
        let v0 = GridFunction::random_real(g, &mut rng);
        let r = contraction_gap(&u0, &v0, &SolverConfig::new(0.2, 1.0).unwrap(), &d, &nl).unwrap();
        prop_assert!(r.gap <= 1e-8);
    }
}
