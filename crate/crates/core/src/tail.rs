//! Far-field decomposition of `Q` on the two asymptotic solutions of the
//! linearised profile equation,
//! `Q₁ ~ ζ^{-1-i/a}` and `Q₂ ~ ζ^{-2+i/a} e^{-iaζ²/2}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::integrator::Trajectory;
use crate::params::Params;
use crate::state::ComplexPair;

/// Fits with a worse basis conditioning than this are rejected.
pub const MAX_FIT_CONDITION: f64 = 1e8;
pub const MIN_WINDOW_SAMPLES: usize = 50;
pub const MIN_WINDOW_START: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailDecomposition {
    pub c1: ComplexPair,
    pub c2: ComplexPair,
    pub window: (f64, f64),
    /// Root-mean-square misfit over the window.
    pub fit_residual: f64,
    /// Ratio of the singular values of the basis matrix.
    pub condition: f64,
    pub samples: usize,
}

/// Slowly decaying basis element `ζ^{-1-i/a}`.
pub fn q1_form(zeta: f64, a: f64) -> Complex64 {
    Complex64::from_polar(1.0 / zeta, -zeta.ln() / a)
}

/// Rapidly oscillating basis element `ζ^{-2+i/a} e^{-iaζ²/2}`.
pub fn q2_form(zeta: f64, a: f64) -> Complex64 {
    Complex64::from_polar(1.0 / (zeta * zeta), zeta.ln() / a - 0.5 * a * zeta * zeta)
}

/// Derivative of [`q1_form`].
pub fn q1_form_derivative(zeta: f64, a: f64) -> Complex64 {
    q1_form(zeta, a) * Complex64::new(-1.0, -1.0 / a) / zeta
}

/// Derivative of [`q2_form`].
pub fn q2_form_derivative(zeta: f64, a: f64) -> Complex64 {
    q2_form(zeta, a) * (Complex64::new(-2.0, 1.0 / a) / zeta - Complex64::new(0.0, a * zeta))
}

/// `[ζmax/2, ζmax]`
pub fn default_window(traj: &Trajectory) -> (f64, f64) {
    let z = traj.last().zeta();
    (0.5 * z, z)
}

/// Complex least squares of the sampled `Q` onto `{Q₁, Q₂}` over `window`.
pub fn tail_fit(
    traj: &Trajectory,
    params: &Params,
    window: (f64, f64),
) -> Result<TailDecomposition> {
    let (lo, hi) = window;
    let (first, last) = traj.zeta_range();
    if !(lo < hi) || lo < first || hi > last {
        return Err(invalid(
            "window",
            format!("({lo}, {hi}) must be ordered and inside [{first}, {last}]"),
        ));
    }
    if lo < MIN_WINDOW_START {
        return Err(invalid(
            "window",
            format!("must start at zeta >= {MIN_WINDOW_START}"),
        ));
    }
    let a = params.a;
    let (zetas, values): (Vec<f64>, Vec<Complex64>) = traj
        .samples()
        .iter()
        .filter(|s| s.zeta() >= lo && s.zeta() <= hi)
        .map(|s| (s.zeta(), s.cartesian.q))
        .unzip();
    if zetas.len() < MIN_WINDOW_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "tail window holds {} samples, need {MIN_WINDOW_SAMPLES}",
            zetas.len()
        )));
    }
    let b1: Vec<Complex64> = zetas.iter().map(|&z| q1_form(z, a)).collect();
    let b2: Vec<Complex64> = zetas.iter().map(|&z| q2_form(z, a)).collect();
    let fit = two_column_least_squares(&b1, &b2, &values)?;
    Ok(TailDecomposition {
        c1: fit.0,
        c2: fit.1,
        window,
        fit_residual: fit.2,
        condition: fit.3,
        samples: zetas.len(),
    })
}

fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(x, y)| x.conj() * y).sum()
}

fn norm(u: &[Complex64]) -> f64 {
    u.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Solves `min ‖c₁b₁ + c₂b₂ − y‖` by Gram–Schmidt QR with one
/// re-orthogonalisation pass. Returns `(c₁, c₂, rms residual, condition)`.
fn two_column_least_squares(
    b1: &[Complex64],
    b2: &[Complex64],
    y: &[Complex64],
) -> Result<(Complex64, Complex64, f64, f64)> {
    let r11 = norm(b1);
    if r11 == 0.0 {
        return Err(Error::IllConditioned {
            condition: f64::INFINITY,
        });
    }
    let u1: Vec<Complex64> = b1.iter().map(|x| x / r11).collect();
    let mut r12 = dot(&u1, b2);
    let mut v: Vec<Complex64> = b2.iter().zip(&u1).map(|(x, u)| x - u * r12).collect();
    let corr = dot(&u1, &v);
    r12 += corr;
    v.iter_mut().zip(&u1).for_each(|(x, u)| *x -= u * corr);
    let r22 = norm(&v);

    // Singular values of R = [[r11, r12], [0, r22]].
    let t = r11 * r11 + r12.norm_sqr() + r22 * r22;
    let det = r11 * r22;
    let disc = (t * t - 4.0 * det * det).max(0.0).sqrt();
    let s_max = (0.5 * (t + disc)).sqrt();
    let s_min = if s_max > 0.0 { det / s_max } else { 0.0 };
    let condition = if s_min > 0.0 {
        s_max / s_min
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_FIT_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }

    let u2: Vec<Complex64> = v.iter().map(|x| x / r22).collect();
    let d1 = dot(&u1, y);
    let d2 = dot(&u2, y);
    let c2 = d2 / r22;
    let c1 = (d1 - r12 * c2) / r11;
    let ss: f64 = b1
        .iter()
        .zip(b2)
        .zip(y)
        .map(|((p, q), v)| (p * c1 + q * c2 - v).norm_sqr())
        .sum();
    Ok((c1, c2, (ss / y.len() as f64).sqrt(), condition))
}
