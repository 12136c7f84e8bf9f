use nls_profile::solver::{newton_solve, newton_solve_with, shoot_residual};
use nls_profile::IntegratorSettings;

#[test]
fn restart_from_root_is_a_fixed_point() {
    let s = IntegratorSettings::default();
    let root = newton_solve((1.9, 0.9), 50.0, 1e-8, 50).unwrap();
    assert!(root.converged);
    let again = newton_solve_with((root.rho0, root.a), 50.0, 1e-8, 50, &s).unwrap();
    assert!(again.converged);
    assert!(again.iterations <= 2);
    assert!((again.rho0 - root.rho0).abs() < 1e-9);
}

#[test]
fn converged_results_are_reproducible() {
    let a = newton_solve((1.9, 0.9), 50.0, 1e-8, 50).unwrap();
    let b = newton_solve((1.9, 0.9), 50.0, 1e-8, 50).unwrap();
    assert_eq!(a, b);
    assert!(a.residual_norm <= 1e-8);
}

#[test]
fn reference_point_is_a_local_minimum_at_radius_100() {
    let s = IntegratorSettings::default();
    let w = |r: f64, a: f64| shoot_residual(r, a, 100.0, &s).unwrap().norm();
    let centre = w(1.885, 0.918);
    for dr in [-0.01, 0.0, 0.01] {
        for da in [-0.01, 0.0, 0.01] {
            if (dr, da) != (0.0, 0.0) {
                let v = w(1.885 + dr, 0.918 + da);
                assert!(v > centre, "({dr},{da}): {v} <= {centre}");
            }
        }
    }
}

#[test]
fn far_start_never_panics() {
    let r = newton_solve((0.1, 5.0), 50.0, 1e-8, 20).unwrap();
    assert!(!r.converged || (r.rho0 > 0.0 && r.a > 0.0));
}
