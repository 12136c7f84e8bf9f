//! Right-hand sides of the profile equation
//! `Q'' + (N−1)/ζ Q' − Q + ia(Q + ζQ') + Q|Q|² = 0`
//! in Cartesian and bounded-polar form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::state::{BoundedPolarState, CartesianState, ComplexPair};

/// Derivatives of a Cartesian state: `(Q', Q'')`.
pub fn rhs_cartesian(
    state: &CartesianState,
    params: &Params,
) -> Result<(ComplexPair, ComplexPair)> {
    if !(state.zeta > 0.0) {
        return Err(Error::SingularPoint);
    }
    let y = state.to_array();
    let d = cartesian_field(state.zeta, &y, params);
    Ok((Complex64::new(d[0], d[1]), Complex64::new(d[2], d[3])))
}

/// Derivatives `(p1', p2', p3', θ')` of a bounded-polar state.
pub fn rhs_bounded_polar(
    state: &BoundedPolarState,
    params: &Params,
) -> Result<(f64, f64, f64, f64)> {
    if !(state.zeta > 0.0) {
        return Err(Error::SingularPoint);
    }
    if !(state.p1 > 0.0) {
        return Err(Error::RhoNonPositive {
            zeta: state.zeta,
            p1: state.p1,
        });
    }
    let d = polar_field(state.zeta, &state.to_array(), params);
    Ok((d[0], d[1], d[2], d[3]))
}

/// Unchecked Cartesian field on `[Re Q, Im Q, Re Q', Im Q']`.
#[inline]
pub(crate) fn cartesian_field(zeta: f64, y: &[f64; 4], params: &Params) -> [f64; 4] {
    let q = Complex64::new(y[0], y[1]);
    let p = Complex64::new(y[2], y[3]);
    let i_a = Complex64::new(0.0, params.a);
    let dp = -p * ((params.dim - 1.0) / zeta) + q - i_a * (q + p * zeta) - q * q.norm_sqr();
    [y[2], y[3], dp.re, dp.im]
}

/// Unchecked bounded-polar field on `[p1, p2, p3, θ]`.
///
/// For `N ≠ 3` the terms `(3−N)(p2 − p1/ζ)/ζ` and `(3−N)p3/ζ` appear; they
/// vanish identically in three dimensions.
#[inline]
pub(crate) fn polar_field(zeta: f64, y: &[f64; 4], params: &Params) -> [f64; 4] {
    let [p1, p2, p3, _] = *y;
    let a = params.a;
    let theta_p = p3 / (p1 * p1);
    let rho = p1 / zeta;
    let bracket = theta_p * theta_p + a * zeta * theta_p + 1.0 - rho * rho;
    let mut dp2 = p1 * bracket;
    let mut dp3 = -a * zeta * p1 * p2;
    let excess = 3.0 - params.dim;
    if excess != 0.0 {
        dp2 += excess * (p2 - rho) / zeta;
        dp3 += excess * p3 / zeta;
    }
    [p2, dp2, dp3, theta_p]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;
    use crate::state::{cartesian_to_polar, polar_to_cartesian};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cartesian_direct_substitution() {
        let p = make_params(1.0, 1.0, 3.0).unwrap();
        let (dq, dp) =
            rhs_cartesian(&CartesianState::new(1.0, c(1.0, 0.0), c(0.0, 0.0)), &p).unwrap();
        assert_eq!(dq, c(0.0, 0.0));
        assert_abs_diff_eq!(dp.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dp.im, -1.0, epsilon = 1e-15);

        let (dq, dp) =
            rhs_cartesian(&CartesianState::new(1.0, c(0.0, 0.0), c(1.0, 0.0)), &p).unwrap();
        assert_eq!(dq, c(1.0, 0.0));
        assert_abs_diff_eq!(dp.re, -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dp.im, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn cartesian_hand_fixture() {
        // ζ=0.5, Q=1.8+0.1i, Q'=-0.2, a=0.9, N=3, expanded by hand:
        //   -(2/ζ)Q'            =  0.8
        //   +Q                  =  1.8 + 0.1i
        //   -ia(Q + ζQ')        = -0.9i(1.7 + 0.1i) = 0.09 - 1.53i
        //   -Q|Q|², |Q|²=3.25   = -5.85 - 0.325i
        //   sum                 = -3.16 - 1.755i
        let p = make_params(0.9, 1.8, 3.0).unwrap();
        let s = CartesianState::new(0.5, c(1.8, 0.1), c(-0.2, 0.0));
        let (dq, dp) = rhs_cartesian(&s, &p).unwrap();
        assert_eq!(dq, c(-0.2, 0.0));
        assert_abs_diff_eq!(dp.re, -3.16, epsilon = 1e-13);
        assert_abs_diff_eq!(dp.im, -1.755, epsilon = 1e-13);
    }

    #[test]
    fn cartesian_rejects_origin() {
        let p = make_params(1.0, 1.0, 3.0).unwrap();
        let err =
            rhs_cartesian(&CartesianState::new(0.0, c(1.0, 0.0), c(0.0, 0.0)), &p).unwrap_err();
        assert_eq!(err.to_string(), "singular point; use series_start");
    }

    #[test]
    fn polar_stationary_bracket() {
        let p = make_params(1.0, 1.0, 3.0).unwrap();
        let d = rhs_bounded_polar(&BoundedPolarState::new(1.0, 1.0, 0.0, 0.0, 0.0), &p).unwrap();
        assert_eq!(d, (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn polar_phase_flux() {
        let p = make_params(2.0, 1.0, 3.0).unwrap();
        let d = rhs_bounded_polar(&BoundedPolarState::new(1.0, 1.0, 1.0, 0.0, 0.0), &p).unwrap();
        assert_eq!(d.2, -2.0);
    }

    #[test]
    fn polar_rejects_nonpositive_p1() {
        let p = make_params(1.0, 1.0, 3.0).unwrap();
        let r = rhs_bounded_polar(&BoundedPolarState::new(1.0, -0.1, 0.0, 0.0, 0.0), &p);
        assert!(matches!(r, Err(Error::RhoNonPositive { .. })));
    }

    /// Chain rule: map the Cartesian derivatives through the change of
    /// variables and compare with the polar field.
    fn chain_rule_mismatch(s: &BoundedPolarState, params: &Params) -> f64 {
        let cart = polar_to_cartesian(s).unwrap();
        let (dq, dp) = rhs_cartesian(&cart, params).unwrap();
        let z = s.zeta;
        let q = cart.q;
        let rho2 = q.norm_sqr();
        // p1 = ζ|Q|, p2 = |Q| + ζ Re(Q'Q̄)/|Q|, p3 = ζ² Im(Q'Q̄), θ' = Im(Q'Q̄)/|Q|²
        let rho = rho2.sqrt();
        let w = dq * q.conj();
        let rho_p = w.re / rho;
        let rho_pp = ((dp * q.conj()).re + dq.norm_sqr()) / rho - rho_p * rho_p / rho;
        let d_im_w = (dp * q.conj()).im;
        let expect = [
            rho + z * rho_p,
            2.0 * rho_p + z * rho_pp,
            2.0 * z * w.im + z * z * d_im_w,
            w.im / rho2,
        ];
        let got = polar_field(z, &s.to_array(), params);
        expect
            .iter()
            .zip(got.iter())
            .map(|(e, g)| (e - g).abs() / (1.0 + e.abs()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn polar_and_cartesian_fields_agree_in_other_dims() {
        let params = make_params(0.7, 1.3, 2.5).unwrap();
        let s = BoundedPolarState::new(0.8, 0.9, 0.4, -0.3, 1.1);
        assert!(chain_rule_mismatch(&s, &params) < 1e-12);
        let back = cartesian_to_polar(&polar_to_cartesian(&s).unwrap(), Some(1.0)).unwrap();
        assert_abs_diff_eq!(back.p3, s.p3, epsilon = 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(256))]

            #[test]
            fn fields_agree_under_change_of_variables(
                zeta in 0.05f64..20.0,
                p1 in 0.05f64..3.0,
                p2 in -2.0f64..2.0,
                p3 in -2.0f64..2.0,
                theta in -6.0f64..6.0,
                a in 0.1f64..2.0,
                dim in prop_oneof![Just(3.0f64), 2.1f64..3.9],
            ) {
                let params = make_params(a, 1.0, dim).unwrap();
                let s = BoundedPolarState::new(zeta, p1, p2, p3, theta);
                prop_assert!(chain_rule_mismatch(&s, &params) < 1e-12);
            }
        }
    }
}
