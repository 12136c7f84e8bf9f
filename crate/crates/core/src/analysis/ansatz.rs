use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::integrator::Trajectory;
use crate::params::Params;
use crate::rhs::cartesian_field;

/// Finite-difference steps as a fraction of the local scales.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Substeps used to carry a stored state to an off-node abscissa.
const LOCAL_STEPS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzCheck {
    /// `max |iψ_t + ψ_rr + ((N−1)/r)ψ_r + ψ|ψ|²|` over the grid.
    pub max_residual: f64,
    /// `max |ψ|` over the grid.
    pub max_psi: f64,
    /// `max_residual / max_psi³`
    pub normalized: f64,
    pub fd_step: f64,
}

/// PDE residual of the self-similar field built from `traj`, with
/// finite-difference steps `10⁻⁴` of the local scales.
pub fn ansatz_residual_check(
    traj: &Trajectory,
    params: &Params,
    t_blowup: f64,
    r_points: &[f64],
    t_points: &[f64],
) -> Result<AnsatzCheck> {
    ansatz_residual_check_with_step(traj, params, t_blowup, r_points, t_points, DEFAULT_FD_STEP)
}

/// The field is `ψ = L⁻¹ exp((i/2a) ln(T/(T−t))) Q(r/L)` with
/// `L = √(2a(T−t))`. With `ζ = r/L` and the local wavenumber
/// `κ = max(1, aζ)` of the far-field oscillation, spatial steps are
/// `fd_step·min(r, L/κ)` and time steps `fd_step·(T−t)/max(1, ζκ)`.
pub fn ansatz_residual_check_with_step(
    traj: &Trajectory,
    params: &Params,
    t_blowup: f64,
    r_points: &[f64],
    t_points: &[f64],
    fd_step: f64,
) -> Result<AnsatzCheck> {
    if traj.params != *params {
        return Err(invalid("params", "must match the trajectory"));
    }
    if !(fd_step > 0.0 && fd_step < 0.5) {
        return Err(invalid("fd_step", "must lie in (0, 0.5)"));
    }
    if !(t_blowup > 0.0) || !t_blowup.is_finite() {
        return Err(invalid("T", "must be positive"));
    }
    if t_points.iter().any(|&t| t >= t_blowup) {
        return Err(Error::AnsatzSingular);
    }
    if r_points.iter().any(|&r| !(r > 0.0)) {
        return Err(invalid("r_points", "must be positive"));
    }
    if r_points.is_empty() || t_points.is_empty() {
        return Err(Error::InsufficientData("empty (r, t) grid".into()));
    }
    let field = Field {
        traj,
        params,
        t_blowup,
    };
    let mut max_residual: f64 = 0.0;
    let mut max_psi: f64 = 0.0;
    for &t in t_points {
        for &r in r_points {
            let (res, psi) = field.residual(r, t, fd_step)?;
            max_residual = max_residual.max(res);
            max_psi = max_psi.max(psi);
        }
    }
    Ok(AnsatzCheck {
        max_residual,
        max_psi,
        normalized: max_residual / max_psi.powi(3),
        fd_step,
    })
}

struct Field<'a> {
    traj: &'a Trajectory,
    params: &'a Params,
    t_blowup: f64,
}

impl Field<'_> {
    fn length(&self, t: f64) -> f64 {
        (2.0 * self.params.a * (self.t_blowup - t)).sqrt()
    }

    /// Residual modulus and `|ψ|` at one grid point.
    fn residual(&self, r: f64, t: f64, step: f64) -> Result<(f64, f64)> {
        let l = self.length(t);
        let zeta = r / l;
        let kappa = (self.params.a * zeta).max(1.0);
        let hr = step * r.min(l / kappa);
        let ht = step * (self.t_blowup - t) / (zeta * kappa).max(1.0);
        // Every stencil value is propagated from the node nearest the centre,
        // so the evaluation error varies smoothly across the stencil.
        let node = self.nearest_node(zeta);
        let psi = |rr: f64, tt: f64| self.psi(node, rr, tt);
        let c = psi(r, t)?;
        let rp = psi(r + hr, t)?;
        let rm = psi(r - hr, t)?;
        let tp = psi(r, t + ht)?;
        let tm = psi(r, t - ht)?;
        let psi_t = (tp - tm) / (2.0 * ht);
        let psi_r = (rp - rm) / (2.0 * hr);
        let psi_rr = (rp - 2.0 * c + rm) / (hr * hr);
        let n = self.params.dim;
        let res = Complex64::i() * psi_t + psi_rr + psi_r * ((n - 1.0) / r) + c * c.norm_sqr();
        Ok((res.norm(), c.norm()))
    }

    fn nearest_node(&self, zeta: f64) -> usize {
        let s = self.traj.samples();
        let i = self.traj.index_at_or_below(zeta);
        if i + 1 < s.len() && (s[i + 1].zeta() - zeta).abs() < (zeta - s[i].zeta()).abs() {
            i + 1
        } else {
            i
        }
    }

    fn psi(&self, node: usize, r: f64, t: f64) -> Result<Complex64> {
        let l = self.length(t);
        let phase = (self.t_blowup / (self.t_blowup - t)).ln() / (2.0 * self.params.a);
        let q = self.q_from(node, r / l)?;
        Ok(Complex64::from_polar(1.0 / l, phase) * q)
    }

    /// `Q(zeta)` by fixed-step RK4 from the stored node.
    fn q_from(&self, node: usize, zeta: f64) -> Result<Complex64> {
        let (lo, hi) = self.traj.zeta_range();
        if !(zeta >= lo && zeta <= hi) {
            return Err(Error::OutOfRange { zeta, lo, hi });
        }
        let start = &self.traj.samples()[node].cartesian;
        let mut y = start.to_array();
        let mut z = start.zeta;
        let h = (zeta - z) / LOCAL_STEPS as f64;
        let f = |z: f64, y: &[f64; 4]| cartesian_field(z, y, self.params);
        let axpy = |y: &[f64; 4], k: &[f64; 4], s: f64| {
            let mut o = *y;
            o.iter_mut().zip(k).for_each(|(a, b)| *a += s * b);
            o
        };
        for _ in 0..LOCAL_STEPS {
            let k1 = f(z, &y);
            let k2 = f(z + 0.5 * h, &axpy(&y, &k1, 0.5 * h));
            let k3 = f(z + 0.5 * h, &axpy(&y, &k2, 0.5 * h));
            let k4 = f(z + h, &axpy(&y, &k3, h));
            for j in 0..4 {
                y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
            z += h;
        }
        Ok(Complex64::new(y[0], y[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{integrate, IntegratorSettings};
    use crate::params::make_params;

    fn grid() -> (Vec<f64>, Vec<f64>) {
        let r = (1..=10).map(|k| 0.2 * k as f64).collect();
        let t = (0..10).map(|k| 0.11 * k as f64).collect();
        (r, t)
    }

    #[test]
    fn singular_time_rejected() {
        let p = make_params(0.918, 1.885, 3.0).unwrap();
        let traj = integrate(&p, 30.0, &IntegratorSettings::default()).unwrap();
        let err = ansatz_residual_check(&traj, &p, 1.0, &[0.5], &[0.0, 1.0]).unwrap_err();
        assert_eq!(err.to_string(), "ansatz singular at t=T");
    }

    #[test]
    fn stencil_outside_trajectory_rejected() {
        let p = make_params(0.918, 1.885, 3.0).unwrap();
        let traj = integrate(&p, 5.0, &IntegratorSettings::default()).unwrap();
        let err = ansatz_residual_check(&traj, &p, 1.0, &[2.0], &[0.99]).unwrap_err();
        assert!(matches!(err, Error::OutOfRange { .. }));
    }

    #[test]
    fn residual_small_for_exact_profile() {
        let p = make_params(0.918, 1.885, 3.0).unwrap();
        let traj = integrate(&p, 30.0, &IntegratorSettings::default()).unwrap();
        let (r, t) = grid();
        let chk = ansatz_residual_check(&traj, &p, 1.0, &r, &t).unwrap();
        assert!(chk.normalized < 1e-4, "{chk:?}");
    }

    #[test]
    fn second_order_in_the_step() {
        let p = make_params(0.918, 1.885, 3.0).unwrap();
        let traj = integrate(&p, 30.0, &IntegratorSettings::default()).unwrap();
        let (r, t) = grid();
        let coarse = ansatz_residual_check_with_step(&traj, &p, 1.0, &r, &t, 1e-2).unwrap();
        let fine = ansatz_residual_check_with_step(&traj, &p, 1.0, &r, &t, 5e-3).unwrap();
        let ratio = coarse.max_residual / fine.max_residual;
        assert!(ratio > 3.5 && ratio < 4.5, "ratio={ratio}");
    }

    #[test]
    fn linear_regime_scales_down() {
        let (r, t) = grid();
        let s = IntegratorSettings::default();
        let big = make_params(0.918, 1.885, 3.0).unwrap();
        let small = make_params(0.918, 1e-6, 3.0).unwrap();
        let tb = integrate(&big, 30.0, &s).unwrap();
        let ts = integrate(&small, 30.0, &s).unwrap();
        let rb = ansatz_residual_check_with_step(&tb, &big, 1.0, &r, &t, 1e-2).unwrap();
        let rs = ansatz_residual_check_with_step(&ts, &small, 1.0, &r, &t, 1e-2).unwrap();
        assert!(rs.max_residual <= 1e-4 * rb.max_residual, "{rs:?} {rb:?}");
    }
}
