//! Composite Simpson quadrature on (possibly non-uniform) sample grids.

/// Integral of the interpolating quadratic through `(x0,f0),(x1,f1),(x2,f2)`
/// over `[x0, x2]`.
fn simpson_pair(x0: f64, x1: f64, x2: f64, f0: f64, f1: f64, f2: f64) -> f64 {
    let h0 = x1 - x0;
    let h1 = x2 - x1;
    let h = h0 + h1;
    h / 6.0 * ((2.0 - h1 / h0) * f0 + h * h / (h0 * h1) * f1 + (2.0 - h0 / h1) * f2)
}

/// Integral over `[xa, xb]` of the quadratic through three points.
fn quadratic_segment(x: [f64; 3], f: [f64; 3], xa: f64, xb: f64) -> f64 {
    // Newton form about x[0].
    let d01 = (f[1] - f[0]) / (x[1] - x[0]);
    let d12 = (f[2] - f[1]) / (x[2] - x[1]);
    let d012 = (d12 - d01) / (x[2] - x[0]);
    // p(t) = f0 + d01 (t - x0) + d012 (t - x0)(t - x1)
    let anti = |t: f64| {
        let u = t - x[0];
        f[0] * u + 0.5 * d01 * u * u + d012 * (u * u * u / 3.0 - 0.5 * (x[1] - x[0]) * u * u)
    };
    anti(xb) - anti(xa)
}

/// Running integral `∫_{x_0}^{x_i} f` at every node.
pub fn cumulative_simpson(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert_eq!(n, f.len());
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * (x[1] - x[0]) * (f[0] + f[1]);
        return out;
    }
    let mut i = 0;
    while i + 2 < n {
        let pair = simpson_pair(x[i], x[i + 1], x[i + 2], f[i], f[i + 1], f[i + 2]);
        let half = quadratic_segment(
            [x[i], x[i + 1], x[i + 2]],
            [f[i], f[i + 1], f[i + 2]],
            x[i],
            x[i + 1],
        );
        out[i + 1] = out[i] + half;
        out[i + 2] = out[i] + pair;
        i += 2;
    }
    if i + 1 < n {
        // One interval left over: use the quadratic through the last three nodes.
        let k = n - 3;
        out[n - 1] = out[n - 2]
            + quadratic_segment(
                [x[k], x[k + 1], x[k + 2]],
                [f[k], f[k + 1], f[k + 2]],
                x[n - 2],
                x[n - 1],
            );
    }
    out
}

/// `∫_{xa}^{xb} f` by the three-point Simpson rule with a midpoint value.
pub fn simpson_segment(xa: f64, xb: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (xb - xa) / 6.0 * (fa + 4.0 * fm + fb)
}

/// Centered second-order derivative on a non-uniform grid at interior nodes.
pub fn centered_derivative(x: &[f64], f: &[f64], i: usize) -> f64 {
    let h0 = x[i] - x[i - 1];
    let h1 = x[i + 1] - x[i];
    -h1 / (h0 * (h0 + h1)) * f[i - 1]
        + (h1 - h0) / (h0 * h1) * f[i]
        + h0 / (h1 * (h0 + h1)) * f[i + 1]
}

/// Derivative at `x[i]` of the polynomial through the nodes `x[i-2..=i+2]`
/// (fourth order on smooth data, any node spacing).
pub fn five_point_derivative(x: &[f64], f: &[f64], i: usize) -> f64 {
    let xs = &x[i - 2..=i + 2];
    let fs = &f[i - 2..=i + 2];
    let xc = x[i];
    let mut d = 0.0;
    for j in 0..5 {
        if j == 2 {
            // l_2'(x_2) = sum over k != 2 of 1/(x_2 - x_k)
            let w: f64 = (0..5).filter(|&k| k != 2).map(|k| 1.0 / (xc - xs[k])).sum();
            d += w * fs[2];
        } else {
            // l_j'(x_2) = prod_{k != j, 2}(x_2 - x_k) / prod_{k != j}(x_j - x_k)
            let num: f64 = (0..5)
                .filter(|&k| k != j && k != 2)
                .map(|k| xc - xs[k])
                .product();
            let den: f64 = (0..5).filter(|&k| k != j).map(|k| xs[j] - xs[k]).product();
            d += num / den * fs[j];
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_quadratics_on_uneven_grid() {
        let x: Vec<f64> = (0..11).map(|k| (k as f64 * 0.3).powf(1.3)).collect();
        let f: Vec<f64> = x.iter().map(|t| 1.0 + 2.0 * t - 0.5 * t * t).collect();
        let anti = |t: f64| t + t * t - t * t * t / 6.0;
        let c = cumulative_simpson(&x, &f);
        for (xi, ci) in x.iter().zip(&c) {
            assert!((ci - anti(*xi)).abs() < 1e-12, "{xi}: {ci}");
        }
        // even node count leaves one interval for the tail rule
        let c = cumulative_simpson(&x[..10], &f[..10]);
        assert!((c[9] - anti(x[9])).abs() < 1e-12);
    }

    #[test]
    fn fourth_order_on_smooth_integrand() {
        let err = |n: usize| {
            let x: Vec<f64> = (0..=n).map(|k| 3.0 * k as f64 / n as f64).collect();
            let f: Vec<f64> = x.iter().map(|t| t.sin()).collect();
            let c = cumulative_simpson(&x, &f);
            (c[n] - (1.0 - 3.0f64.cos())).abs()
        };
        let ratio = err(20) / err(40);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio={ratio}");
    }

    #[test]
    fn five_point_is_exact_for_quartics_and_fourth_order() {
        let x: Vec<f64> = (0..5).map(|k| 1.0 + (k as f64 * 0.1).powf(1.2)).collect();
        let f: Vec<f64> = x.iter().map(|t| t.powi(4) - 2.0 * t * t).collect();
        let exact = 4.0 * x[2].powi(3) - 4.0 * x[2];
        assert!((five_point_derivative(&x, &f, 2) - exact).abs() < 1e-9);
        let err = |h: f64| {
            let x: Vec<f64> = (0..5)
                .map(|k| 0.7 + h * k as f64 * (1.0 + 0.1 * k as f64))
                .collect();
            let f: Vec<f64> = x.iter().map(|t| t.exp()).collect();
            (five_point_derivative(&x, &f, 2) - x[2].exp()).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!(ratio > 12.0 && ratio < 20.0, "ratio={ratio}");
    }

    #[test]
    fn derivative_is_second_order() {
        let x = [0.9, 1.0, 1.12];
        let f: Vec<f64> = x.iter().map(|t| t * t).collect();
        assert!((centered_derivative(&x, &f, 1) - 2.0).abs() < 1e-12);
    }
}
