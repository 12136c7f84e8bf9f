//! Shooting on `(ρ₀, a)` for the finite-interval condition `W(ζmax) = 0`,
//! continuation in `a`, and root searches seeded from parameter sweeps.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{sweep_with, CellStatus};
use crate::error::{invalid, Error, Result};
use crate::functionals::far_field_residual;
use crate::integrator::{count_bumps, integrate, IntegratorSettings, Status};
use crate::params::make_params;

pub const DEFAULT_SHOOT_ZETA_MAX: f64 = 50.0;
pub const MIN_SHOOT_ZETA_MAX: f64 = 50.0;
/// Relative step of the central-difference Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-6;
pub const MAX_HALVINGS: usize = 8;
/// Increasing damping levels tried once step halving is exhausted.
const LM_TRIES: usize = 12;
/// Iterates with smaller `ρ₀` are rejected; `ρ₀ → 0` is the trivial root.
pub const MIN_RHO0: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingResult {
    pub rho0: f64,
    pub a: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub bump_count: usize,
    pub zeta_max: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    /// Bump count of the first member.
    pub label: usize,
    pub a_step: f64,
    pub members: Vec<ShootingResult>,
    /// Set when a member failed to converge and the walk stopped.
    pub stopped_early: bool,
}

/// `W = ζQ' + (1 + i/a)Q` at `zeta_max` for the profile started at `ρ₀`.
pub fn shoot_residual(
    rho0: f64,
    a: f64,
    zeta_max: f64,
    settings: &IntegratorSettings,
) -> Result<Complex64> {
    if !(zeta_max >= MIN_SHOOT_ZETA_MAX) {
        return Err(invalid(
            "zeta_max",
            format!("must be at least {MIN_SHOOT_ZETA_MAX}"),
        ));
    }
    let params = make_params(a, rho0, 3.0)?;
    let traj = integrate(&params, zeta_max, settings)?;
    if traj.status != Status::Completed {
        return Err(Error::Integration(format!(
            "stopped at zeta={} ({})",
            traj.last().zeta(),
            traj.status
        )));
    }
    Ok(far_field_residual(&traj.last().cartesian, a))
}

/// Damped Newton with default integrator settings.
pub fn newton_solve(
    start: (f64, f64),
    zeta_max: f64,
    tol: f64,
    max_iter: usize,
) -> Result<ShootingResult> {
    newton_solve_with(
        start,
        zeta_max,
        tol,
        max_iter,
        &IntegratorSettings::default(),
    )
}

pub fn newton_solve_with(
    start: (f64, f64),
    zeta_max: f64,
    tol: f64,
    max_iter: usize,
    settings: &IntegratorSettings,
) -> Result<ShootingResult> {
    newton_core(start, zeta_max, tol, max_iter, settings, None)
}

/// Newton iteration on `F(ρ₀, a) = (Re W̃, Im W̃)` with `W̃ = W·`[`demodulation`]. With `a_box`, iterates are
/// confined to `a ∈ [lo, hi]`; steps leaving it are halved like steps leaving
/// the positive quadrant.
fn newton_core(
    start: (f64, f64),
    zeta_max: f64,
    tol: f64,
    max_iter: usize,
    settings: &IntegratorSettings,
    a_box: Option<(f64, f64)>,
) -> Result<ShootingResult> {
    let (mut r, mut a) = start;
    if !(r > 0.0 && a > 0.0) {
        return Err(invalid("start", "must lie in the positive quadrant"));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    // Iterates also may not move either parameter by more than half its value.
    let admissible = |r: f64, a: f64, r0: f64, a0: f64| {
        r >= MIN_RHO0
            && a > 0.0
            && (r - r0).abs() <= 0.5 * r0
            && (a - a0).abs() <= 0.5 * a0
            && a_box.is_none_or(|(lo, hi)| a >= lo && a <= hi)
    };
    let f = |r: f64, a: f64| {
        shoot_residual(r, a, zeta_max, settings).map(|w| w * demodulation(a, zeta_max))
    };
    let mut w = f(r, a)?;
    let mut iterations = 0;
    while w.norm() > tol && iterations < max_iter {
        let Some(jac) = jacobian(r, a, &f) else {
            break;
        };
        let mut accepted = None;
        if let Some(step) = jac.newton_step(w) {
            let mut lambda = 1.0;
            for _ in 0..=MAX_HALVINGS {
                let (rc, ac) = (r + lambda * step.0, a + lambda * step.1);
                if admissible(rc, ac, r, a) {
                    if let Ok(wc) = f(rc, ac) {
                        if wc.norm() < w.norm() {
                            accepted = Some((rc, ac, wc));
                            break;
                        }
                    }
                }
                lambda *= 0.5;
            }
        }
        if accepted.is_none() {
            // Halving exhausted: Levenberg–Marquardt steps with growing damping
            // follow the gradient of |W|² in nearly singular valleys.
            let mut mu = 1e-3 * jac.scale();
            for _ in 0..LM_TRIES {
                let step = jac.damped_step(w, mu);
                let (rc, ac) = (r + step.0, a + step.1);
                if admissible(rc, ac, r, a) {
                    if let Ok(wc) = f(rc, ac) {
                        if wc.norm() < w.norm() {
                            accepted = Some((rc, ac, wc));
                            break;
                        }
                    }
                }
                mu *= 10.0;
            }
        }
        let Some((rc, ac, wc)) = accepted else {
            break;
        };
        r = rc;
        a = ac;
        w = wc;
        iterations += 1;
    }
    let params = make_params(a, r, 3.0)?;
    let traj = integrate(&params, zeta_max, settings)?;
    let residual_norm = w.norm();
    Ok(ShootingResult {
        rho0: r,
        a,
        residual_norm,
        iterations,
        bump_count: count_bumps(&traj),
        zeta_max,
        converged: residual_norm <= tol,
    })
}

/// Unit factor removing the far-field phase `ln ζ / a − aζ²/2` from `W`.
///
/// `W` rotates through `ζmax²/2` radians per unit change of `a`, which makes
/// `(Re W, Im W)` strongly nonlinear in `a`; the product has the same modulus
/// and zero set and varies slowly.
pub fn demodulation(a: f64, zeta_max: f64) -> Complex64 {
    Complex64::from_polar(1.0, 0.5 * a * zeta_max * zeta_max - zeta_max.ln() / a)
}

/// Columns `∂W/∂ρ₀` and `∂W/∂a`.
struct Jacobian {
    dr: Complex64,
    da: Complex64,
}

impl Jacobian {
    /// Solves `J d = −W`.
    fn newton_step(&self, w: Complex64) -> Option<(f64, f64)> {
        let (dr, da) = (self.dr, self.da);
        let det = dr.re * da.im - da.re * dr.im;
        if !(det.abs() > 0.0) || !det.is_finite() {
            return None;
        }
        Some((
            (-w.re * da.im + w.im * da.re) / det,
            (-dr.re * w.im + dr.im * w.re) / det,
        ))
    }

    /// Solves `(JᵀJ + μI) d = −JᵀW`.
    fn damped_step(&self, w: Complex64, mu: f64) -> (f64, f64) {
        let (dr, da) = (self.dr, self.da);
        let a11 = dr.norm_sqr() + mu;
        let a22 = da.norm_sqr() + mu;
        let a12 = dr.re * da.re + dr.im * da.im;
        let g1 = -(dr.re * w.re + dr.im * w.im);
        let g2 = -(da.re * w.re + da.im * w.im);
        let det = a11 * a22 - a12 * a12;
        ((a22 * g1 - a12 * g2) / det, (a11 * g2 - a12 * g1) / det)
    }

    fn scale(&self) -> f64 {
        self.dr.norm_sqr() + self.da.norm_sqr()
    }
}

/// Central differences with relative step [`JACOBIAN_STEP`]; the four
/// integrations run concurrently.
fn jacobian<F>(r: f64, a: f64, f: &F) -> Option<Jacobian>
where
    F: Fn(f64, f64) -> Result<Complex64> + Sync,
{
    let hr = JACOBIAN_STEP * r;
    let ha = JACOBIAN_STEP * a;
    let ((rp, rm), (ap, am)) = rayon::join(
        || rayon::join(|| f(r + hr, a), || f(r - hr, a)),
        || rayon::join(|| f(r, a + ha), || f(r, a - ha)),
    );
    Some(Jacobian {
        dr: (rp.ok()? - rm.ok()?) / (2.0 * hr),
        da: (ap.ok()? - am.ok()?) / (2.0 * ha),
    })
}

/// Minimises `|W(·, a)|` over `ρ₀` in `[lo, hi]` by golden-section search.
fn valley_minimum(
    a: f64,
    lo: f64,
    hi: f64,
    zeta_max: f64,
    settings: &IntegratorSettings,
) -> Result<(f64, f64)> {
    const GOLD: f64 = 0.618_033_988_749_894_9;
    let g = |r: f64| shoot_residual(r, a, zeta_max, settings).map(|w| w.norm());
    let (mut x0, mut x3) = (lo, hi);
    let mut x1 = x3 - GOLD * (x3 - x0);
    let mut x2 = x0 + GOLD * (x3 - x0);
    let (mut f1, mut f2) = (g(x1)?, g(x2)?);
    for _ in 0..40 {
        if f1 < f2 {
            x3 = x2;
            x2 = x1;
            f2 = f1;
            x1 = x3 - GOLD * (x3 - x0);
            f1 = g(x1)?;
        } else {
            x0 = x1;
            x1 = x2;
            f1 = f2;
            x2 = x0 + GOLD * (x3 - x0);
            f2 = g(x2)?;
        }
    }
    Ok(if f1 < f2 { (x1, f1) } else { (x2, f2) })
}

/// Walks `n_steps` shifts of `a_step` from a converged seed.
///
/// Each member first minimises `|W|` over `ρ₀` at the shifted `a` (a
/// one-dimensional valley search around the previous `ρ₀`), then polishes
/// with Newton on `(ρ₀, a)` restricted to `|a − a_shifted| ≤ |a_step|/2`.
/// The walk stops at the first member that does not reach `tol`.
pub fn continue_branch(
    seed: &ShootingResult,
    a_step: f64,
    n_steps: usize,
    tol: f64,
    settings: &IntegratorSettings,
) -> Result<Branch> {
    if a_step == 0.0 || !a_step.is_finite() {
        return Err(invalid("a_step", "must be nonzero"));
    }
    if !seed.converged {
        return Err(Error::Integration("seed is not converged".into()));
    }
    let half = 0.5 * a_step.abs();
    let mut members = Vec::with_capacity(n_steps);
    let mut prev = *seed;
    let mut stopped_early = false;
    for _ in 0..n_steps {
        let a_target = prev.a + a_step;
        if !(a_target > 0.0) {
            stopped_early = true;
            break;
        }
        let width = 0.25 * prev.rho0;
        let (r_valley, _) = valley_minimum(
            a_target,
            prev.rho0 - width,
            prev.rho0 + width,
            seed.zeta_max,
            settings,
        )?;
        let polished = newton_core(
            (r_valley, a_target),
            seed.zeta_max,
            tol,
            20,
            settings,
            Some((a_target - half, a_target + half)),
        )?;
        if !polished.converged {
            members.push(polished);
            stopped_early = true;
            break;
        }
        members.push(polished);
        prev = polished;
    }
    Ok(Branch {
        label: seed.bump_count,
        a_step,
        members,
        stopped_early,
    })
}

/// Newton solves seeded from the grid-local minima of `|W(ζmax)|` on a sweep.
/// Returns the distinct converged roots ordered by decreasing `a`.
#[allow(clippy::too_many_arguments)]
pub fn roots_from_sweep(
    rho0_range: (f64, f64),
    a_range: (f64, f64),
    grid_counts: (usize, usize),
    zeta_max: f64,
    tol: f64,
    max_iter: usize,
    settings: &IntegratorSettings,
    threads: Option<usize>,
) -> Result<Vec<ShootingResult>> {
    use rayon::prelude::*;
    let cells = sweep_with(
        rho0_range,
        a_range,
        grid_counts,
        zeta_max,
        settings,
        threads,
    )?;
    let (nr, na) = grid_counts;
    let z = |i: usize, j: usize| {
        let c = &cells[i * na + j];
        if c.status == CellStatus::Completed {
            c.z_final
        } else {
            f64::INFINITY
        }
    };
    let mut seeds = Vec::new();
    for i in 0..nr {
        for j in 0..na {
            let v = z(i, j);
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= nr as i64 || jj >= na as i64
                    {
                        continue;
                    }
                    if z(ii as usize, jj as usize) < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                let c = &cells[i * na + j];
                seeds.push((c.rho0, c.a));
            }
        }
    }
    let solved: Vec<ShootingResult> = seeds
        .par_iter()
        .filter_map(|&s| newton_solve_with(s, zeta_max, tol, max_iter, settings).ok())
        .filter(|r| r.converged)
        .collect();
    let mut roots: Vec<ShootingResult> = Vec::new();
    for r in solved {
        let dup = roots
            .iter()
            .any(|q| (q.rho0 - r.rho0).abs() < 1e-6 * q.rho0 && (q.a - r.a).abs() < 1e-6 * q.a);
        if !dup {
            roots.push(r);
        }
    }
    roots.sort_by(|x, y| y.a.total_cmp(&x.a).then(x.rho0.total_cmp(&y.rho0)));
    Ok(roots)
}

/// Roots of the truncated problem at successive `ζmax`, each warm-started
/// from the previous one.
pub fn refinement_report(
    start: (f64, f64),
    zeta_list: &[f64],
    tol: f64,
    max_iter: usize,
    settings: &IntegratorSettings,
) -> Result<Vec<ShootingResult>> {
    let mut out = Vec::with_capacity(zeta_list.len());
    let mut guess = start;
    for &zm in zeta_list {
        let r = newton_solve_with(guess, zm, tol, max_iter, settings)?;
        if r.converged {
            guess = (r.rho0, r.a);
        }
        out.push(r);
    }
    Ok(out)
}
