//! The two equivalent representations of `(Q, Q')` along the self-similar
//! radius and the conversions between them.
//!
//! The bounded-polar variables are `p1 = ζρ`, `p2 = (ζρ)'`, `p3 = ζ²ρ²θ'`
//! together with the accumulated phase `θ`, where `Q = ρ e^{iθ}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Complex value with finite components (`Q`, `Q'`, fit coefficients, ...).
pub type ComplexPair = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianState {
    pub zeta: f64,
    pub q: ComplexPair,
    pub p: ComplexPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundedPolarState {
    pub zeta: f64,
    /// `ζρ`
    pub p1: f64,
    /// `(ζρ)'`
    pub p2: f64,
    /// `ζ²ρ²θ'`
    pub p3: f64,
    pub theta: f64,
}

impl CartesianState {
    pub fn new(zeta: f64, q: ComplexPair, p: ComplexPair) -> Self {
        Self { zeta, q, p }
    }

    pub fn is_finite(&self) -> bool {
        self.zeta.is_finite() && self.zeta >= 0.0 && self.q.is_finite() && self.p.is_finite()
    }

    pub fn rho(&self) -> f64 {
        self.q.norm()
    }

    /// `ζQ' + Q`
    pub fn scaled_derivative(&self) -> ComplexPair {
        self.p * self.zeta + self.q
    }

    /// Rotates the state by `e^{iφ}`; the profile equation is invariant under it.
    pub fn rotated(&self, phi: f64) -> Self {
        let r = Complex64::from_polar(1.0, phi);
        Self {
            zeta: self.zeta,
            q: self.q * r,
            p: self.p * r,
        }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.q.re, self.q.im, self.p.re, self.p.im]
    }

    pub fn from_array(zeta: f64, y: &[f64; 4]) -> Self {
        Self {
            zeta,
            q: Complex64::new(y[0], y[1]),
            p: Complex64::new(y[2], y[3]),
        }
    }
}

impl BoundedPolarState {
    pub fn new(zeta: f64, p1: f64, p2: f64, p3: f64, theta: f64) -> Self {
        Self {
            zeta,
            p1,
            p2,
            p3,
            theta,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.zeta.is_finite()
            && self.p1.is_finite()
            && self.p2.is_finite()
            && self.p3.is_finite()
            && self.theta.is_finite()
    }

    fn check(&self) -> Result<()> {
        if !(self.zeta > 0.0) {
            return Err(Error::SingularPoint);
        }
        if !(self.p1 > 0.0) {
            return Err(Error::RhoNonPositive {
                zeta: self.zeta,
                p1: self.p1,
            });
        }
        Ok(())
    }

    /// `ρ = p1 / ζ`
    pub fn rho(&self) -> f64 {
        self.p1 / self.zeta
    }

    /// `θ' = p3 / p1²`
    pub fn theta_prime(&self) -> f64 {
        self.p3 / (self.p1 * self.p1)
    }

    /// `ρ' = p2/ζ − p1/ζ²`, from `p2 = ρ + ζρ'`.
    pub fn rho_prime(&self) -> f64 {
        (self.p2 - self.p1 / self.zeta) / self.zeta
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.p1, self.p2, self.p3, self.theta]
    }

    pub fn from_array(zeta: f64, y: &[f64; 4]) -> Self {
        Self::new(zeta, y[0], y[1], y[2], y[3])
    }
}

/// Converts bounded-polar variables to `(Q, Q')`.
pub fn polar_to_cartesian(state: &BoundedPolarState) -> Result<CartesianState> {
    state.check()?;
    let rho = state.rho();
    let rho_p = state.rho_prime();
    let theta_p = state.theta_prime();
    let phase = Complex64::from_polar(1.0, state.theta);
    Ok(CartesianState {
        zeta: state.zeta,
        q: phase * rho,
        p: Complex64::new(rho_p, rho * theta_p) * phase,
    })
}

/// Converts `(Q, Q')` to bounded-polar variables.
///
/// The phase is taken on the branch closest to `theta_hint` when one is
/// given (for continuity along a trajectory), otherwise the principal value.
pub fn cartesian_to_polar(
    state: &CartesianState,
    theta_hint: Option<f64>,
) -> Result<BoundedPolarState> {
    if !(state.zeta > 0.0) {
        return Err(Error::SingularPoint);
    }
    let rho2 = state.q.norm_sqr();
    if !(rho2 > 0.0) {
        return Err(Error::RhoNonPositive {
            zeta: state.zeta,
            p1: 0.0,
        });
    }
    if !state.is_finite() {
        return Err(invalid("state", "must be finite"));
    }
    let rho = rho2.sqrt();
    let z = state.zeta;
    // Q' conj(Q) = ρρ' + iρ²θ'
    let w = state.p * state.q.conj();
    let rho_p = w.re / rho;
    let mut theta = state.q.arg();
    if let Some(h) = theta_hint {
        theta = unwrap_near(theta, h);
    }
    Ok(BoundedPolarState {
        zeta: z,
        p1: z * rho,
        p2: rho + z * rho_p,
        p3: z * z * w.im,
        theta,
    })
}

/// Shifts `angle` by a multiple of 2π so that it is within π of `reference`.
pub fn unwrap_near(angle: f64, reference: f64) -> f64 {
    let turns = ((reference - angle) / (2.0 * PI)).round();
    angle + turns * 2.0 * PI
}
