//! Counting the bumps (local maxima) of the profile modulus `ρ(ζ)`.

use super::Trajectory;

/// Minimum prominence of a counted maximum, relative to `ρ₀`.
pub const BUMP_PROMINENCE: f64 = 1e-6;

/// Number of local maxima of `ρ` on `[0, ζmax]`.
///
/// `ζ = 0` counts as a maximum when `Re Q''(0) < 0`, i.e. `ρ₀ > 1`.
pub fn count_bumps(traj: &Trajectory) -> usize {
    let (zetas, rhos) = modulus_series(traj);
    let rho0 = traj.params.rho0;
    count_maxima(&zetas, &rhos, rho0 > 1.0, BUMP_PROMINENCE * rho0)
}

/// Refined abscissae of the counted maxima (quadratic fit through the three
/// samples around each discrete peak). The origin peak is reported as 0.
pub fn bump_locations(traj: &Trajectory) -> Vec<f64> {
    let (zetas, rhos) = modulus_series(traj);
    let rho0 = traj.params.rho0;
    peak_indices(&rhos, rho0 > 1.0, BUMP_PROMINENCE * rho0)
        .into_iter()
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                refine_peak(&zetas[i - 1..=i + 1], &rhos[i - 1..=i + 1])
            }
        })
        .collect()
}

fn modulus_series(traj: &Trajectory) -> (Vec<f64>, Vec<f64>) {
    traj.samples()
        .iter()
        .map(|s| (s.zeta(), s.polar.rho()))
        .unzip()
}

/// Counts maxima of a sampled signal whose topographic prominence exceeds
/// `min_prominence`. The first sample is a candidate only when
/// `include_start` is set (a maximum at the left boundary).
pub fn count_maxima(
    zetas: &[f64],
    values: &[f64],
    include_start: bool,
    min_prominence: f64,
) -> usize {
    debug_assert_eq!(zetas.len(), values.len());
    peak_indices(values, include_start, min_prominence).len()
}

fn peak_indices(v: &[f64], include_start: bool, min_prominence: f64) -> Vec<usize> {
    let n = v.len();
    let mut peaks = Vec::new();
    if n == 0 {
        return peaks;
    }
    if include_start && (n == 1 || v[0] >= v[1]) {
        // Left boundary: only the right-hand base is defined.
        let base = right_base(v, 0);
        if v[0] - base > min_prominence {
            peaks.push(0);
        }
    }
    let mut i = 1;
    while i + 1 < n {
        if v[i] > v[i - 1] {
            // Skip across a flat top.
            let mut j = i;
            while j + 1 < n && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < n && v[j + 1] < v[i] {
                let left = left_base(v, i);
                let right = right_base(v, j);
                if v[i] - left.max(right) > min_prominence {
                    peaks.push(i);
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}

fn left_base(v: &[f64], i: usize) -> f64 {
    let peak = v[i];
    let mut lowest = peak;
    for k in (0..i).rev() {
        if v[k] > peak {
            return lowest;
        }
        lowest = lowest.min(v[k]);
    }
    lowest
}

fn right_base(v: &[f64], i: usize) -> f64 {
    let peak = v[i];
    let mut lowest = peak;
    for &x in &v[i + 1..] {
        if x > peak {
            return lowest;
        }
        lowest = lowest.min(x);
    }
    lowest
}

fn refine_peak(z: &[f64], v: &[f64]) -> f64 {
    // Vertex of the interpolating parabola through three points.
    let (x0, x1, x2) = (z[0], z[1], z[2]);
    let (y0, y1, y2) = (v[0], v[1], v[2]);
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let curv = (d12 - d01) / (x2 - x0);
    if curv >= 0.0 {
        return x1;
    }
    let x = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
    x.clamp(x0, x2)
}
