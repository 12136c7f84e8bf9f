use nls_profile::functionals::{
    budd_lhs_cartesian, budd_lhs_polar, energy_series, far_field_residual,
};
use nls_profile::integrator::integrate_gauged;
use nls_profile::{integrate, make_params, Form, IntegratorSettings};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn rotated_start_rotates_the_solution(
        rho0 in 0.5f64..3.0, a in 0.4f64..1.5, phi in -3.0f64..3.0,
    ) {
        let p = make_params(a, rho0, 3.0).unwrap();
        let s = IntegratorSettings::default().with_form(Form::Cartesian);
        let base = integrate(&p, 30.0, &s).unwrap();
        let turned = integrate_gauged(&p, 30.0, &s, phi).unwrap();
        let rot = Complex64::from_polar(1.0, phi);
        for (x, y) in base.samples().iter().zip(turned.samples()) {
            prop_assert_eq!(x.zeta(), y.zeta());
            let scale = 1.0 + x.cartesian.q.norm();
            prop_assert!((y.cartesian.q - x.cartesian.q * rot).norm() < 1e-10 * scale);
            prop_assert!((y.cartesian.rho() - x.cartesian.rho()).abs() < 1e-10 * scale);
        }
        let w0 = far_field_residual(&base.last().cartesian, a);
        let w1 = far_field_residual(&turned.last().cartesian, a);
        prop_assert!((w1 - w0 * rot).norm() < 1e-10 * (1.0 + w0.norm()));
        prop_assert!((w1.norm() - w0.norm()).abs() < 1e-10 * (1.0 + w0.norm()));
    }

    #[test]
    fn energy_strictly_decreases(rho0 in 0.3f64..3.5, a in 0.2f64..2.0) {
        let p = make_params(a, rho0, 3.0).unwrap();
        let traj = integrate(&p, 40.0, &IntegratorSettings::default()).unwrap();
        let e = energy_series(&traj);
        prop_assert!(e.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn budd_lhs_agrees_between_representations(rho0 in 0.3f64..3.5, a in 0.2f64..2.0) {
        let p = make_params(a, rho0, 3.0).unwrap();
        let traj = integrate(&p, 30.0, &IntegratorSettings::default()).unwrap();
        for s in traj.samples().iter().step_by(37) {
            let c = budd_lhs_cartesian(&s.cartesian);
            let q = budd_lhs_polar(&s.polar);
            prop_assert!((c - q).abs() < 1e-10 * (1.0 + c.abs()), "{} vs {}", c, q);
        }
    }

    #[test]
    fn tighter_tolerances_move_the_endpoint_little(rho0 in 0.5f64..3.0, a in 0.4f64..1.5) {
        let p = make_params(a, rho0, 3.0).unwrap();
        let loose = IntegratorSettings::default().with_tolerances(1e-8, 1e-10);
        let tight = loose.with_tolerances(5e-9, 5e-11);
        let r1 = integrate(&p, 50.0, &loose).unwrap().last().polar.rho();
        let r2 = integrate(&p, 50.0, &tight).unwrap().last().polar.rho();
        prop_assert!((r1 - r2).abs() < 100.0 * 1e-8, "{} vs {}", r1, r2);
    }

    #[test]
    fn series_regime_phase_slope(rho0 in 0.3f64..3.5, a in 0.2f64..2.0) {
        let p = make_params(a, rho0, 3.0).unwrap();
        let s = IntegratorSettings::default().with_spacing(0.005);
        let traj = integrate(&p, 2.0, &s).unwrap();
        for smp in traj.samples().iter().filter(|s| s.zeta() <= 0.1) {
            let z = smp.zeta();
            let tp = smp.polar.theta_prime();
            prop_assert!((tp + a * z / 3.0).abs() < 0.01 * a * z, "zeta={} theta'={}", z, tp);
        }
    }
}
