//! Power-series start at the regular singular point `ζ = 0`.
//!
//! Regularity forces `Q'(0) = 0` and `N·Q''(0) = Q₀ − iaQ₀ − Q₀³`; the
//! expansion is truncated after the quadratic term.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::Params;
use crate::state::{BoundedPolarState, CartesianState, ComplexPair};

pub const DEFAULT_ZETA0: f64 = 1e-4;
pub const MAX_ZETA0: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesStart {
    pub zeta0: f64,
    pub cartesian: CartesianState,
    pub polar: BoundedPolarState,
}

/// `Q''(0)` for initial amplitude `rho0`.
pub fn second_derivative_at_origin(params: &Params) -> ComplexPair {
    let q0 = params.rho0;
    Complex64::new(q0 - q0 * q0 * q0, -params.a * q0) / params.dim
}

/// Starting states at `zeta0` for both representations.
pub fn series_start(params: &Params, zeta0: f64) -> Result<SeriesStart> {
    if !(zeta0 > 0.0 && zeta0 <= MAX_ZETA0) {
        return Err(invalid("zeta0", format!("must lie in (0, {MAX_ZETA0}]")));
    }
    let n = params.dim;
    let a = params.a;
    let q0 = params.rho0;
    let qpp = second_derivative_at_origin(params);
    let z = zeta0;

    let cartesian = CartesianState {
        zeta: z,
        q: Complex64::new(q0, 0.0) + qpp * (0.5 * z * z),
        p: qpp * z,
    };

    let rho_pp = q0 * (1.0 - q0 * q0) / n;
    let rho = q0 + 0.5 * rho_pp * z * z;
    let rho_p = rho_pp * z;
    let theta_p = -a * z / n;
    let p1 = z * rho;
    let polar = BoundedPolarState {
        zeta: z,
        p1,
        p2: rho + z * rho_p,
        p3: p1 * p1 * theta_p,
        theta: -a * z * z / (2.0 * n),
    };

    Ok(SeriesStart {
        zeta0: z,
        cartesian,
        polar,
    })
}

/// Leading-order values of the running integrals over `[0, zeta0]`, used to
/// complete quadratures that start at the handoff point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct SeriesIntegrals {
    /// `∫ s ρ⁴ ds`
    pub s_rho4: f64,
    /// `∫ (sρ)² ds`
    pub s2_rho2: f64,
    /// `∫ s²(|Q'|² − ½|Q|⁴) ds`
    pub hamiltonian: f64,
}

pub(crate) fn series_integrals(params: &Params, zeta0: f64) -> SeriesIntegrals {
    let q0 = params.rho0;
    let z = zeta0;
    let qpp2 = second_derivative_at_origin(params).norm_sqr();
    let r4 = q0.powi(4);
    SeriesIntegrals {
        s_rho4: 0.5 * r4 * z * z,
        s2_rho2: q0 * q0 * z.powi(3) / 3.0,
        hamiltonian: qpp2 * z.powi(5) / 5.0 - 0.5 * r4 * z.powi(3) / 3.0,
    }
}
