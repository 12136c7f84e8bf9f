//! Dormand–Prince 5(4) embedded pair with PI step-size control and the
//! fourth-order continuous extension of Hairer, Nørsett & Wanner.

#![allow(clippy::needless_range_loop)]

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

type Vector<const D: usize> = [f64; D];

/// Continuous extension over one accepted step.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const D: usize> {
    pub t0: f64,
    pub h: f64,
    r1: Vector<D>,
    r2: Vector<D>,
    r3: Vector<D>,
    r4: Vector<D>,
    r5: Vector<D>,
}

impl<const D: usize> DenseStep<D> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> Vector<D> {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut out = [0.0; D];
        for i in 0..D {
            out[i] = self.r1[i]
                + th * (self.r2[i] + th1 * (self.r3[i] + th * (self.r4[i] + th1 * self.r5[i])));
        }
        out
    }
}

/// Outcome of one attempted step.
pub enum StepOutcome<const D: usize> {
    Accepted(DenseStep<D>),
    Rejected,
}

/// Adaptive DOPRI5 stepper. The caller owns the loop so it can impose
/// position-dependent step caps and monitors.
pub struct Dopri5<const D: usize, F>
where
    F: Fn(f64, &Vector<D>) -> Vector<D>,
{
    f: F,
    pub t: f64,
    pub y: Vector<D>,
    k1: Vector<D>,
    pub h: f64,
    rtol: f64,
    atol: f64,
    fac_old: f64,
    last_rejected: bool,
    pub n_eval: usize,
    pub n_accept: usize,
    pub n_reject: usize,
}

fn axpy<const D: usize>(y: &Vector<D>, h: f64, terms: &[(f64, &Vector<D>)]) -> Vector<D> {
    let mut out = *y;
    for &(c, k) in terms {
        if c != 0.0 {
            for i in 0..D {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

impl<const D: usize, F> Dopri5<D, F>
where
    F: Fn(f64, &Vector<D>) -> Vector<D>,
{
    pub fn new(f: F, t0: f64, y0: Vector<D>, h0: f64, rtol: f64, atol: f64) -> Self {
        let k1 = f(t0, &y0);
        Self {
            f,
            t: t0,
            y: y0,
            k1,
            h: h0,
            rtol,
            atol,
            fac_old: 1e-4,
            last_rejected: false,
            n_eval: 1,
            n_accept: 0,
            n_reject: 0,
        }
    }

    /// Hairer's starting-step heuristic for a fifth-order method.
    pub fn initial_step(&self, h_max: f64) -> f64 {
        let sk = |i: usize| self.atol + self.rtol * self.y[i].abs();
        let mut dnf = 0.0;
        let mut dny = 0.0;
        for i in 0..D {
            dnf += (self.k1[i] / sk(i)).powi(2);
            dny += (self.y[i] / sk(i)).powi(2);
        }
        let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
            1e-6
        } else {
            (dny / dnf).sqrt() * 0.01
        };
        h = h.min(h_max);
        let y1 = axpy(&self.y, h, &[(1.0, &self.k1)]);
        let f1 = (self.f)(self.t + h, &y1);
        let mut der2 = 0.0;
        for i in 0..D {
            der2 += ((f1[i] - self.k1[i]) / sk(i)).powi(2);
        }
        let der2 = der2.sqrt() / h;
        let der12 = der2.abs().max(dnf.sqrt());
        let h1 = if der12 <= 1e-15 {
            (1e-6f64).max(h.abs() * 1e-3)
        } else {
            (0.01 / der12).powf(0.2)
        };
        (100.0 * h).min(h1).min(h_max)
    }

    /// Attempts one step of size `min(self.h, h_cap)`.
    pub fn step(&mut self, h_cap: f64) -> StepOutcome<D> {
        let h = self.h.min(h_cap);
        let (t, y, k1) = (self.t, self.y, self.k1);
        let f = &self.f;

        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(
            t + C4 * h,
            &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y1 = axpy(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let k7 = f(t + h, &y1);
        self.n_eval += 6;

        let mut err = 0.0;
        for i in 0..D {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = self.atol + self.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sk).powi(2);
        }
        let err = (err / D as f64).sqrt();

        if !err.is_finite() || !y1.iter().all(|v| v.is_finite()) {
            self.n_reject += 1;
            self.last_rejected = true;
            self.h = h * FAC_MIN;
            return StepOutcome::Rejected;
        }

        let fac11 = err.powf(EXPO);
        if err <= 1.0 {
            let fac =
                (fac11 / self.fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if self.last_rejected {
                h_new = h_new.min(h);
            }
            self.fac_old = err.max(1e-4);
            self.last_rejected = false;

            let mut dense = DenseStep {
                t0: t,
                h,
                r1: y,
                r2: [0.0; D],
                r3: [0.0; D],
                r4: [0.0; D],
                r5: [0.0; D],
            };
            for i in 0..D {
                let ydiff = y1[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                dense.r2[i] = ydiff;
                dense.r3[i] = bspl;
                dense.r4[i] = ydiff - h * k7[i] - bspl;
                dense.r5[i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }

            self.t = t + h;
            self.y = y1;
            self.k1 = k7;
            self.h = h_new;
            self.n_accept += 1;
            StepOutcome::Accepted(dense)
        } else {
            self.h = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
            self.last_rejected = true;
            self.n_reject += 1;
            StepOutcome::Rejected
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_harmonic(rtol: f64) -> (f64, Vec<DenseStep<2>>) {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut s = Dopri5::new(f, 0.0, [1.0, 0.0], 0.0, rtol, rtol * 1e-2);
        s.h = s.initial_step(1.0);
        let mut steps = Vec::new();
        let t_end = 10.0;
        while s.t < t_end {
            let cap = t_end - s.t;
            if let StepOutcome::Accepted(d) = s.step(cap) {
                steps.push(d);
            }
        }
        (
            (s.y[0] - t_end.cos())
                .abs()
                .max((s.y[1] + t_end.sin()).abs()),
            steps,
        )
    }

    #[test]
    fn harmonic_oscillator_meets_tolerance() {
        let (err, _) = run_harmonic(1e-10);
        assert!(err < 1e-8, "err={err}");
    }

    #[test]
    fn tighter_tolerance_reduces_error() {
        let (loose, _) = run_harmonic(1e-6);
        let (tight, _) = run_harmonic(1e-10);
        assert!(tight < loose / 100.0, "{loose} vs {tight}");
    }

    #[test]
    fn dense_output_is_exact_at_step_ends_and_accurate_inside() {
        let (_, steps) = run_harmonic(1e-10);
        let mut worst: f64 = 0.0;
        for d in &steps {
            let y0 = d.eval(d.t0);
            assert_eq!(y0, d.r1);
            for k in 1..4 {
                let t = d.t0 + d.h * k as f64 / 4.0;
                let y = d.eval(t);
                worst = worst.max((y[0] - t.cos()).abs());
            }
        }
        assert!(worst < 1e-7, "worst={worst}");
    }

    #[test]
    fn linear_decay_is_fifth_order() {
        // Fixed step sizes: error ratio for h and h/2 should approach 2^5.
        let err_at = |n: usize| {
            let f = |_t: f64, y: &[f64; 1]| [-y[0]];
            let mut s = Dopri5::new(f, 0.0, [1.0], 1.0 / n as f64, 1.0, 1.0);
            for _ in 0..n {
                let h = 1.0 / n as f64;
                s.h = h;
                match s.step(h) {
                    StepOutcome::Accepted(_) => {}
                    StepOutcome::Rejected => unreachable!(),
                }
            }
            (s.y[0] - (-1.0f64).exp()).abs()
        };
        let ratio = err_at(8) / err_at(16);
        assert!(ratio > 25.0 && ratio < 40.0, "ratio={ratio}");
    }
}
