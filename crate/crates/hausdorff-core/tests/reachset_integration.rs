//! Integration tests for the reach-set distance machinery: the satellite
//! system against its closed-form kernel, the bound chain, quadrature
//! stability, and the time-varying path.

use approx::assert_relative_eq;
use hausdorff_core::norms::ExtendedReal;
use hausdorff_core::reachset::{
    integral_of_suprema, reach_bound, reach_distance, reach_profile, satellite_phi_b,
    LinearSystem, QuadratureSpec, ReachProblem,
};
use hausdorff_core::sphere_opt::SphereOptConfig;
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn satellite_problem(horizon: f64, order: usize) -> ReachProblem {
    ReachProblem::new(
        LinearSystem::satellite(3.0),
        ExtendedReal::TWO,
        ExtendedReal::Infinity,
        horizon,
        QuadratureSpec::gauss_legendre(order).unwrap(),
    )
    .unwrap()
}

fn cfg(starts: usize) -> SphereOptConfig {
    SphereOptConfig { starts, ..Default::default() }
}

#[test]
fn satellite_kernel_matches_closed_form_at_random_times() {
    let omega = 3.0;
    let sys = LinearSystem::satellite(omega);
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for _ in 0..100 {
        let t = rng.random_range(0.0..2.0);
        let tau = rng.random_range(0.0..=t);
        let numeric = sys.phi_b(t, tau).unwrap();
        let exact = satellite_phi_b(omega, t - tau);
        for (x, y) in numeric.iter().zip(exact.iter()) {
            assert_relative_eq!(x, y, epsilon = 1e-8);
        }
    }
}

#[test]
fn bound_chain_holds_along_the_profile() {
    // distance <= integral of per-node suprema <= operator-norm bound
    let prob = satellite_problem(2.0, 32);
    let cfg = cfg(16);
    for t in [0.5, 1.25, 2.0] {
        let sub = ReachProblem { horizon: t, ..prob.clone() };
        let distance = reach_distance(&sub, &cfg).unwrap().best_value;
        let middle = integral_of_suprema(&sub, t, &cfg).unwrap();
        let bound = reach_bound(&sub, &cfg).unwrap();
        assert!(
            distance <= middle + 1e-6,
            "t = {t}: distance {distance} above per-node integral {middle}"
        );
        assert!(
            middle <= bound.value + 1e-6,
            "t = {t}: per-node integral {middle} above bound {}",
            bound.value
        );
        assert!(!bound.estimated);
    }
}

#[test]
fn quadrature_refinement_is_stable() {
    let cfg = cfg(16);
    let coarse = reach_distance(&satellite_problem(2.0, 64), &cfg).unwrap().best_value;
    let fine = reach_distance(&satellite_problem(2.0, 128), &cfg).unwrap().best_value;
    assert!(
        (coarse - fine).abs() < 1e-6,
        "order 64 -> 128 moved the distance by {}",
        (coarse - fine).abs()
    );
    // Simpson cross-check within quadrature error of the Gauss value
    let simpson = ReachProblem {
        quadrature: QuadratureSpec::composite_simpson(200).unwrap(),
        ..satellite_problem(2.0, 64)
    };
    let s = reach_distance(&simpson, &cfg).unwrap().best_value;
    assert_relative_eq!(s, fine, epsilon = 1e-6);
}

#[test]
fn profile_is_dominated_and_nondecreasing() {
    let prob = satellite_problem(1.0, 32);
    let cfg = cfg(12);
    let grid: Vec<f64> = (0..6).map(|i| i as f64 * 0.2).collect();
    let profile = reach_profile(&prob, &grid, &cfg).unwrap();
    assert_eq!(profile.len(), 6);
    assert_eq!(profile[0].distance, 0.0);
    assert_eq!(profile[0].bound, 0.0);
    for pt in &profile {
        assert!(pt.distance <= pt.bound + 1e-6);
        assert_eq!(pt.bound_flag, "exact");
    }
    for pair in profile.windows(2) {
        assert!(pair[1].distance >= pair[0].distance - 1e-9);
        assert!(pair[1].bound >= pair[0].bound - 1e-9);
    }
}

#[test]
fn ltv_wrapper_agrees_with_lti_satellite() {
    let omega = 3.0;
    let lti = LinearSystem::satellite(omega);
    let (a, b) = match &lti {
        LinearSystem::Lti { a, b } => (a.clone(), b.clone()),
        _ => unreachable!(),
    };
    let bc = b.clone();
    let ltv = LinearSystem::ltv(
        Arc::new(move |_| a.clone()),
        Arc::new(move |_| bc.clone()),
        4,
        2,
    )
    .unwrap();
    for &(t, tau) in &[(0.8, 0.1), (1.6, 0.9)] {
        let from_ode = ltv.phi_b(t, tau).unwrap();
        let from_expm = lti.phi_b(t, tau).unwrap();
        for (x, y) in from_ode.iter().zip(from_expm.iter()) {
            assert_relative_eq!(x, y, epsilon = 1e-7);
        }
    }
}

#[test]
fn closed_form_kernel_system_runs_end_to_end() {
    let omega = 3.0;
    let sys = LinearSystem::closed_form_phi_b(
        Arc::new(move |t, tau| satellite_phi_b(omega, t - tau)),
        4,
        2,
    )
    .unwrap();
    let prob = ReachProblem::new(
        sys,
        ExtendedReal::TWO,
        ExtendedReal::Infinity,
        1.0,
        QuadratureSpec::gauss_legendre(32).unwrap(),
    )
    .unwrap();
    let cfg = cfg(12);
    let direct = reach_distance(&satellite_problem(1.0, 32), &cfg).unwrap().best_value;
    let through_kernel = reach_distance(&prob, &cfg).unwrap().best_value;
    assert_relative_eq!(direct, through_kernel, epsilon = 1e-7);
}

#[test]
fn zero_input_kernel_gives_identically_zero_profile() {
    let prob = ReachProblem::new(
        LinearSystem::lti(DMatrix::zeros(3, 3), DMatrix::zeros(3, 2)).unwrap(),
        ExtendedReal::TWO,
        ExtendedReal::Infinity,
        1.0,
        QuadratureSpec::default(),
    )
    .unwrap();
    let profile = reach_profile(&prob, &[0.0, 0.5, 1.0], &cfg(4)).unwrap();
    for pt in profile {
        assert_eq!(pt.distance, 0.0);
        assert_eq!(pt.bound, 0.0);
    }
}
