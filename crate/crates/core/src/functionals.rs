//! Functionals and integral identities evaluated along trajectories.
//!
//! * `E = ((ζρ)')² + (ζρ)²(θ'² − 1) + ½ζ²ρ⁴` with `E' = −ζρ⁴` (in three
//!   dimensions), `E(0) = ρ₀²`;
//! * the identity `|ζQ'+Q|² + ½ζ²|Q|⁴ − ζ²|Q|² = |Q(0)|² − ∫₀^ζ s|Q|⁴ ds`;
//! * the phase identity `ζ²ρ²(θ' + aζ/2) = (a/2)∫₀^ζ (tρ)² dt`;
//! * the far-field residual `Z = |ζQ' + (1 + i/a)Q|`;
//! * the truncated Hamiltonian `∫₀^ζmax η²(|Q'|² − ½|Q|⁴) dη` with a modelled tail.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{Sample, Trajectory};
use crate::params::Params;
use crate::quadrature::{cumulative_simpson, five_point_derivative, simpson_segment};
use crate::series::series_integrals;
use crate::state::{BoundedPolarState, CartesianState};
use crate::tail::{default_window, tail_fit};

/// `E` at a bounded-polar state.
pub fn energy_e(state: &BoundedPolarState) -> Result<f64> {
    if !(state.zeta > 0.0) {
        return Err(Error::SingularPoint);
    }
    if !(state.p1 > 0.0) {
        return Err(Error::RhoNonPositive {
            zeta: state.zeta,
            p1: state.p1,
        });
    }
    Ok(energy_unchecked(state))
}

pub(crate) fn energy_unchecked(s: &BoundedPolarState) -> f64 {
    let tp = s.theta_prime();
    s.p2 * s.p2 + s.p1 * s.p1 * (tp * tp - 1.0) + 0.5 * s.p1.powi(4) / (s.zeta * s.zeta)
}

/// `E` at every stored sample.
pub fn energy_series(traj: &Trajectory) -> Vec<f64> {
    traj.samples()
        .iter()
        .map(|s| energy_unchecked(&s.polar))
        .collect()
}

/// Maximum over interior nodes of `|dE/dζ + ζρ⁴| / (1 + ζρ⁴)`, with `dE/dζ`
/// from five-point differences of the sampled `E`.
pub fn energy_derivative_residual(traj: &Trajectory) -> Result<f64> {
    let samples = traj.samples();
    if samples.len() < 5 {
        return Err(Error::InsufficientData(
            "energy derivative needs at least 5 samples".into(),
        ));
    }
    let z: Vec<f64> = samples.iter().map(Sample::zeta).collect();
    let e = energy_series(traj);
    let mut worst: f64 = 0.0;
    for i in 2..samples.len() - 2 {
        let flux = z[i] * samples[i].polar.rho().powi(4);
        let de = five_point_derivative(&z, &e, i);
        worst = worst.max((de + flux).abs() / (1.0 + flux));
    }
    Ok(worst)
}

/// `|ζQ' + Q|² + ½ζ²|Q|⁴ − ζ²|Q|²` from a Cartesian state.
pub fn budd_lhs_cartesian(state: &CartesianState) -> f64 {
    let z = state.zeta;
    let r2 = state.q.norm_sqr();
    state.scaled_derivative().norm_sqr() + 0.5 * z * z * r2 * r2 - z * z * r2
}

/// The same quantity from the polar variables, using
/// `|ζQ' + Q|² = ((ζρ)')² + (ζρθ')²`. It coincides with `E`.
pub fn budd_lhs_polar(state: &BoundedPolarState) -> f64 {
    let z = state.zeta;
    let zrtp = state.p3 / state.p1;
    state.p2 * state.p2 + zrtp * zrtp + 0.5 * state.p1.powi(4) / (z * z) - state.p1 * state.p1
}

/// Which stored representation feeds a residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Cartesian,
    Polar,
}

/// Running integral `∫₀^ζ f` where `f` is evaluated on samples; the piece on
/// `[0, ζ₀]` is supplied by `head`.
fn integral_to<F>(traj: &Trajectory, zeta: f64, head: f64, f: F) -> Result<f64>
where
    F: Fn(&BoundedPolarState, &CartesianState) -> f64,
{
    let (lo, hi) = traj.zeta_range();
    if !(zeta >= lo && zeta <= hi) {
        return Err(Error::OutOfRange { zeta, lo, hi });
    }
    let samples = traj.samples();
    let j = traj.index_at_or_below(zeta);
    let x: Vec<f64> = samples[..=j].iter().map(Sample::zeta).collect();
    let y: Vec<f64> = samples[..=j]
        .iter()
        .map(|s| f(&s.polar, &s.cartesian))
        .collect();
    let mut total = head + cumulative_simpson(&x, &y)[j];
    let zj = x[j];
    if zeta > zj {
        let mid = 0.5 * (zj + zeta);
        let (pm, cm) = traj.sample(mid)?;
        let (pe, ce) = traj.sample(zeta)?;
        total += simpson_segment(zj, zeta, y[j], f(&pm, &cm), f(&pe, &ce));
    }
    Ok(total)
}

/// `∫₀^ζ s ρ⁴ ds`
pub fn quartic_flux_integral(traj: &Trajectory, zeta: f64) -> Result<f64> {
    let head = series_integrals(&traj.params, traj.first().zeta()).s_rho4;
    integral_to(traj, zeta, head, |p, _| p.zeta * p.rho().powi(4))
}

/// `∫₀^ζ (tρ)² dt`
pub fn mass_moment_integral(traj: &Trajectory, zeta: f64) -> Result<f64> {
    let head = series_integrals(&traj.params, traj.first().zeta()).s2_rho2;
    integral_to(traj, zeta, head, |p, _| p.p1 * p.p1)
}

/// [`budd_residual`] at every stored sample, from one cumulative quadrature.
pub fn budd_residual_series(traj: &Trajectory) -> Vec<f64> {
    let samples = traj.samples();
    let head = series_integrals(&traj.params, traj.first().zeta()).s_rho4;
    let x: Vec<f64> = samples.iter().map(Sample::zeta).collect();
    let y: Vec<f64> = samples
        .iter()
        .map(|s| s.cartesian.zeta * s.cartesian.q.norm_sqr().powi(2))
        .collect();
    let rho0_sq = traj.params.rho0 * traj.params.rho0;
    cumulative_simpson(&x, &y)
        .into_iter()
        .zip(samples)
        .map(|(c, s)| (budd_lhs_cartesian(&s.cartesian) - (rho0_sq - head - c)).abs())
        .collect()
}

/// Absolute residual of the `|ζQ'+Q|²` identity at `zeta`, LHS from the
/// Cartesian samples.
pub fn budd_residual(traj: &Trajectory, zeta: f64) -> Result<f64> {
    budd_residual_in(traj, zeta, Representation::Cartesian)
}

pub fn budd_residual_in(traj: &Trajectory, zeta: f64, repr: Representation) -> Result<f64> {
    let rho0 = traj.params.rho0;
    let (pol, car) = traj.sample(zeta)?;
    let (lhs, rhs) = match repr {
        Representation::Cartesian => {
            let head = series_integrals(&traj.params, traj.first().zeta()).s_rho4;
            let integral = integral_to(traj, zeta, head, |_, c| c.zeta * c.q.norm_sqr().powi(2))?;
            (budd_lhs_cartesian(&car), rho0 * rho0 - integral)
        }
        Representation::Polar => (
            budd_lhs_polar(&pol),
            rho0 * rho0 - quartic_flux_integral(traj, zeta)?,
        ),
    };
    Ok((lhs - rhs).abs())
}

/// `|p3 + (aζ/2)p1² − (a/2)∫₀^ζ (tρ)² dt|`
pub fn theta_prime_identity_residual(traj: &Trajectory, zeta: f64) -> Result<f64> {
    let a = traj.params.a;
    let (pol, _) = traj.sample(zeta)?;
    let integral = mass_moment_integral(traj, zeta)?;
    Ok((pol.p3 + 0.5 * a * zeta * pol.p1 * pol.p1 - 0.5 * a * integral).abs())
}

/// `Z = |ζQ' + (1 + i/a)Q|`
pub fn zero_energy_residual(state: &CartesianState, params: &Params) -> f64 {
    far_field_residual(state, params.a).norm()
}

/// The complex residual `W = ζQ' + (1 + i/a)Q`.
pub fn far_field_residual(state: &CartesianState, a: f64) -> Complex64 {
    state.p * state.zeta + state.q * Complex64::new(1.0, 1.0 / a)
}

/// Truncated Hamiltonian and the modelled contribution of `[ζmax, ∞)`.
///
/// The tail assumes `Q ~ kζ^{-1-i/a}` with `|k| = ζρ(ζmax)`, giving
/// `(|k|²(1 + 1/a²) − ½|k|⁴)/ζmax`.
pub fn hamiltonian_truncated(traj: &Trajectory, params: &Params) -> Result<(f64, f64)> {
    hamiltonian_truncated_at(traj, params, traj.last().zeta())
}

/// [`hamiltonian_truncated`] with the cut placed at `zeta` inside the trajectory.
pub fn hamiltonian_truncated_at(
    traj: &Trajectory,
    params: &Params,
    zeta: f64,
) -> Result<(f64, f64)> {
    if !params.is_dim3() {
        return Err(Error::Unsupported(
            "truncated Hamiltonian is implemented for dim = 3 only".into(),
        ));
    }
    let head = series_integrals(params, traj.first().zeta()).hamiltonian;
    let h = integral_to(traj, zeta, head, |_, c| {
        let z2 = c.zeta * c.zeta;
        z2 * (c.p.norm_sqr() - 0.5 * c.q.norm_sqr().powi(2))
    })?;
    let (cut, _) = traj.sample(zeta)?;
    let k = cut.p1;
    let a = params.a;
    let tail = (k * k * (1.0 + 1.0 / (a * a)) - 0.5 * k.powi(4)) / zeta;
    Ok((h, tail))
}

/// Four independent estimates of the far-field amplitude `|k|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KConsistency {
    /// `|c₁|` from the tail fit.
    pub k_tail: f64,
    /// `ζρ` at `ζmax`.
    pub k_plateau: f64,
    /// `√(−E(ζmax))`, undefined while `E ≥ 0`.
    pub k_energy: Option<f64>,
    /// `√(∫₀^ζmax tρ⁴ dt − ρ₀²)`, undefined while the radicand is not positive.
    pub k_integral: Option<f64>,
}

impl KConsistency {
    /// Largest pairwise relative spread `|x − y| / max(x, y)` among the
    /// defined estimators.
    pub fn max_pairwise_spread(&self) -> f64 {
        let vals: Vec<f64> = [
            Some(self.k_tail),
            Some(self.k_plateau),
            self.k_energy,
            self.k_integral,
        ]
        .into_iter()
        .flatten()
        .collect();
        let mut worst: f64 = 0.0;
        for i in 0..vals.len() {
            for j in i + 1..vals.len() {
                let m = vals[i].max(vals[j]);
                if m > 0.0 {
                    worst = worst.max((vals[i] - vals[j]).abs() / m);
                }
            }
        }
        worst
    }

    pub fn all_defined(&self) -> bool {
        self.k_energy.is_some() && self.k_integral.is_some()
    }
}

pub fn k_consistency(traj: &Trajectory, params: &Params) -> Result<KConsistency> {
    let last = traj.last();
    let zmax = last.zeta();
    let fit = tail_fit(traj, params, default_window(traj))?;
    let e = energy_unchecked(&last.polar);
    let radicand = quartic_flux_integral(traj, zmax)? - params.rho0 * params.rho0;
    Ok(KConsistency {
        k_tail: fit.c1.norm(),
        k_plateau: last.polar.p1,
        k_energy: (e < 0.0).then(|| (-e).sqrt()),
        k_integral: (radicand > 0.0).then(|| radicand.sqrt()),
    })
}
