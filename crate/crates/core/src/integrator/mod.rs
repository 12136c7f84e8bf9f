//! Adaptive integration of the profile equation from the series handoff
//! point out to `zeta_max`, in either representation.

pub mod bumps;
pub mod dopri;
pub mod grid;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::params::Params;
use crate::rhs::{cartesian_field, polar_field};
use crate::series::{series_start, DEFAULT_ZETA0};
use crate::state::{cartesian_to_polar, polar_to_cartesian, BoundedPolarState, CartesianState};

pub use bumps::{bump_locations, count_bumps, count_maxima, BUMP_PROMINENCE};
pub use dopri::{DenseStep, Dopri5, StepOutcome};
pub use grid::SampleGrid;

/// Upper bound on stored samples per trajectory.
pub const MAX_SAMPLES: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    Cartesian,
    BoundedPolar,
}

impl std::fmt::Display for Form {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Form::Cartesian => "cartesian",
            Form::BoundedPolar => "polar",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub rtol: f64,
    pub atol: f64,
    /// Steps are capped at `max_step_factor / (1 + aζ)`.
    pub max_step_factor: f64,
    pub form: Form,
    /// Base output spacing `Δζ` near the origin.
    pub sample_spacing: f64,
    /// Series handoff abscissa.
    pub zeta0: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_step_factor: 0.1,
            form: Form::BoundedPolar,
            sample_spacing: 0.05,
            zeta0: DEFAULT_ZETA0,
        }
    }
}

impl IntegratorSettings {
    pub fn with_form(mut self, form: Form) -> Self {
        self.form = form;
        self
    }

    pub fn with_spacing(mut self, spacing: f64) -> Self {
        self.sample_spacing = spacing;
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return Err(invalid("rtol", "must be positive"));
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return Err(invalid("atol", "must be positive"));
        }
        if !(self.sample_spacing > 0.0 && self.sample_spacing.is_finite()) {
            return Err(invalid("sample_spacing", "must be positive"));
        }
        if !(self.max_step_factor > 0.0 && self.max_step_factor.is_finite()) {
            return Err(invalid("max_step_factor", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Completed,
    RhoHitZero,
    StepUnderflow,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Completed => "completed",
            Status::RhoHitZero => "rho_hit_zero",
            Status::StepUnderflow => "step_underflow",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub polar: BoundedPolarState,
    pub cartesian: CartesianState,
}

impl Sample {
    pub fn zeta(&self) -> f64 {
        self.polar.zeta
    }
}

/// A sampled solution. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: Params,
    pub settings: IntegratorSettings,
    pub zeta_max: f64,
    pub status: Status,
    pub grid: SampleGrid,
    pub accepted_steps: usize,
    samples: Vec<Sample>,
}

impl Trajectory {
    /// Builds a trajectory from externally supplied samples (synthetic
    /// signals, re-read files). Samples must be strictly increasing in ζ.
    pub fn from_samples(
        params: Params,
        settings: IntegratorSettings,
        samples: Vec<Sample>,
        status: Status,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InsufficientData("no samples".into()));
        }
        if samples.windows(2).any(|w| !(w[1].zeta() > w[0].zeta())) {
            return Err(invalid("samples", "must be strictly increasing in zeta"));
        }
        let zeta_max = samples.last().map(Sample::zeta).unwrap_or_default();
        let grid = SampleGrid::for_params(samples[0].zeta(), settings.sample_spacing, &params);
        Ok(Self {
            params,
            settings,
            zeta_max,
            status,
            grid,
            accepted_steps: 0,
            samples,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory is never empty")
    }

    pub fn zeta_range(&self) -> (f64, f64) {
        (self.first().zeta(), self.last().zeta())
    }

    pub fn is_completed(&self) -> bool {
        self.status == Status::Completed
    }

    /// Index of the last sample with `ζ ≤ zeta`.
    pub fn index_at_or_below(&self, zeta: f64) -> usize {
        self.samples
            .partition_point(|s| s.zeta() <= zeta)
            .saturating_sub(1)
    }

    /// Interpolated state at `zeta`; exact at stored nodes.
    pub fn sample(&self, zeta: f64) -> Result<(BoundedPolarState, CartesianState)> {
        sample(self, zeta)
    }
}

/// Integrates from the series start to `zeta_max`.
///
/// Monitor events (ρ reaching zero, step underflow) end the run early and are
/// reported through [`Trajectory::status`] rather than as errors.
pub fn integrate(
    params: &Params,
    zeta_max: f64,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    integrate_gauged(params, zeta_max, settings, 0.0)
}

/// [`integrate`] from the series start rotated by `e^{iφ}`.
pub fn integrate_gauged(
    params: &Params,
    zeta_max: f64,
    settings: &IntegratorSettings,
    phi: f64,
) -> Result<Trajectory> {
    if !(zeta_max > 1.0) || !zeta_max.is_finite() {
        return Err(invalid("zeta_max", "must exceed 1"));
    }
    if !phi.is_finite() {
        return Err(invalid("phi", "must be finite"));
    }
    settings.validate()?;
    let mut start = series_start(params, settings.zeta0)?;
    if phi != 0.0 {
        start.cartesian = start.cartesian.rotated(phi);
        start.polar.theta += phi;
    }
    let grid = SampleGrid::for_params(settings.zeta0, settings.sample_spacing, params);
    match settings.form {
        Form::BoundedPolar => {
            let p = *params;
            let field = move |z: f64, y: &[f64; 4]| polar_field(z, y, &p);
            run(
                params,
                settings,
                zeta_max,
                grid,
                start.polar.to_array(),
                field,
                |z, y, _prev| {
                    let polar = BoundedPolarState::from_array(z, y);
                    if !(polar.p1 > 0.0) {
                        return None;
                    }
                    polar_to_cartesian(&polar)
                        .ok()
                        .map(|cartesian| Sample { polar, cartesian })
                },
            )
        }
        Form::Cartesian => {
            let p = *params;
            let field = move |z: f64, y: &[f64; 4]| cartesian_field(z, y, &p);
            run(
                params,
                settings,
                zeta_max,
                grid,
                start.cartesian.to_array(),
                field,
                |z, y, prev| {
                    let cartesian = CartesianState::from_array(z, y);
                    let hint = prev.map(|s: &Sample| s.polar.theta);
                    cartesian_to_polar(&cartesian, hint)
                        .ok()
                        .map(|polar| Sample { polar, cartesian })
                },
            )
        }
    }
}

fn run<F, M>(
    params: &Params,
    settings: &IntegratorSettings,
    zeta_max: f64,
    grid: SampleGrid,
    y0: [f64; 4],
    field: F,
    make_sample: M,
) -> Result<Trajectory>
where
    F: Fn(f64, &[f64; 4]) -> [f64; 4],
    M: Fn(f64, &[f64; 4], Option<&Sample>) -> Option<Sample>,
{
    let a = params.a;
    let step_cap = |z: f64| settings.max_step_factor / (1.0 + a * z);
    let zeta0 = settings.zeta0;

    let s_end = grid.s_of(zeta_max);
    let last_node = s_end.floor() as usize;
    if !(s_end < MAX_SAMPLES as f64) {
        return Err(Error::Unsupported(format!(
            "sample grid would hold {s_end:.3e} nodes (limit {MAX_SAMPLES}); raise sample_spacing or lower zeta_max"
        )));
    }
    let capacity = last_node + 2;
    let mut samples = Vec::with_capacity(capacity);

    let first = make_sample(zeta0, &y0, None)
        .ok_or_else(|| Error::Integration("degenerate start state".into()))?;
    samples.push(first);

    let mut stepper = Dopri5::new(field, zeta0, y0, 0.0, settings.rtol, settings.atol);
    stepper.h = stepper.initial_step(step_cap(zeta0));

    let mut next_node = 1usize;
    let mut next_zeta = node_zeta(&grid, next_node, last_node, zeta_max);
    let mut status = Status::Completed;

    'outer: while stepper.t < zeta_max {
        let t = stepper.t;
        let remaining = zeta_max - t;
        let cap = step_cap(t).min(remaining);
        if stepper.h.min(cap) < 1e-14 * t.max(1.0) && remaining > 1e-14 * t.max(1.0) {
            status = classify_failure(&settings.form, &stepper.y, t);
            break;
        }
        match stepper.step(cap) {
            StepOutcome::Rejected => continue,
            StepOutcome::Accepted(dense) => {
                let t1 = if (zeta_max - dense.t1()).abs() <= 1e-12 * zeta_max {
                    stepper.t = zeta_max;
                    zeta_max
                } else {
                    dense.t1()
                };
                while next_zeta <= t1 {
                    let y = if next_zeta == t1 {
                        stepper.y
                    } else {
                        dense.eval(next_zeta)
                    };
                    match make_sample(next_zeta, &y, samples.last()) {
                        Some(s) => samples.push(s),
                        None => {
                            status = Status::RhoHitZero;
                            break 'outer;
                        }
                    }
                    if next_zeta >= zeta_max {
                        break;
                    }
                    next_node += 1;
                    next_zeta = node_zeta(&grid, next_node, last_node, zeta_max);
                }
                if matches!(settings.form, Form::BoundedPolar) && !(stepper.y[0] > 0.0) {
                    status = Status::RhoHitZero;
                    break;
                }
            }
        }
    }

    Ok(Trajectory {
        params: *params,
        settings: *settings,
        zeta_max,
        status,
        grid,
        accepted_steps: stepper.n_accept,
        samples,
    })
}

/// Node abscissae: `ζ(k)` for whole `k`, ending exactly at `zeta_max`.
fn node_zeta(grid: &SampleGrid, k: usize, last_node: usize, zeta_max: f64) -> f64 {
    if k > last_node {
        return zeta_max;
    }
    let z = grid.zeta_of(k as f64);
    // Fold a node that lands on top of zeta_max into the end point.
    if zeta_max - z < 1e-9 * grid.local_spacing(zeta_max) {
        zeta_max
    } else {
        z
    }
}

fn classify_failure(form: &Form, y: &[f64; 4], zeta: f64) -> Status {
    let rho = match form {
        Form::BoundedPolar => y[0] / zeta,
        Form::Cartesian => y[0].hypot(y[1]),
    };
    if rho < 1e-8 {
        Status::RhoHitZero
    } else {
        Status::StepUnderflow
    }
}

fn hermite<const D: usize>(
    h: f64,
    t: f64,
    y0: &[f64; D],
    d0: &[f64; D],
    y1: &[f64; D],
    d1: &[f64; D],
) -> [f64; D] {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let mut out = [0.0; D];
    for i in 0..D {
        out[i] = h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i];
    }
    out
}

/// Cubic Hermite interpolation of both stored representations, using the
/// ODE right-hand side for nodal derivatives.
pub fn sample(traj: &Trajectory, zeta: f64) -> Result<(BoundedPolarState, CartesianState)> {
    let (lo, hi) = traj.zeta_range();
    if !(zeta >= lo && zeta <= hi) {
        return Err(Error::OutOfRange { zeta, lo, hi });
    }
    let samples = traj.samples();
    let i = traj.index_at_or_below(zeta);
    let s0 = &samples[i];
    if s0.zeta() == zeta || i + 1 == samples.len() {
        return Ok((s0.polar, s0.cartesian));
    }
    let s1 = &samples[i + 1];
    let (z0, z1) = (s0.zeta(), s1.zeta());
    let h = z1 - z0;
    let t = (zeta - z0) / h;
    let p = &traj.params;

    let (pa, pb) = (s0.polar.to_array(), s1.polar.to_array());
    let pol = hermite(
        h,
        t,
        &pa,
        &polar_field(z0, &pa, p),
        &pb,
        &polar_field(z1, &pb, p),
    );
    let (ca, cb) = (s0.cartesian.to_array(), s1.cartesian.to_array());
    let car = hermite(
        h,
        t,
        &ca,
        &cartesian_field(z0, &ca, p),
        &cb,
        &cartesian_field(z1, &cb, p),
    );
    Ok((
        BoundedPolarState::from_array(zeta, &pol),
        CartesianState::from_array(zeta, &car),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    #[test]
    fn rejects_short_horizon() {
        let p = make_params(1.0, 1.0, 3.0).unwrap();
        let err = integrate(&p, 0.5, &IntegratorSettings::default()).unwrap_err();
        assert_eq!(err.to_string(), "zeta_max must exceed 1");
    }

    #[test]
    fn rejects_bad_settings() {
        let p = make_params(1.0, 1.0, 3.0).unwrap();
        let s = IntegratorSettings::default().with_tolerances(0.0, 1e-12);
        assert!(integrate(&p, 5.0, &s).is_err());
        let s = IntegratorSettings::default().with_spacing(-1.0);
        assert!(integrate(&p, 5.0, &s).is_err());
    }

    #[test]
    fn samples_cover_the_interval() {
        let p = make_params(1.0, 1.0, 3.0).unwrap();
        let traj = integrate(&p, 10.0, &IntegratorSettings::default()).unwrap();
        assert!(traj.is_completed());
        assert_eq!(traj.first().zeta(), 1e-4);
        assert_eq!(traj.last().zeta(), 10.0);
        assert!(traj.samples().windows(2).all(|w| w[1].zeta() > w[0].zeta()));
    }

    #[test]
    fn stored_representations_agree() {
        for form in [Form::BoundedPolar, Form::Cartesian] {
            let p = make_params(0.918, 1.885, 3.0).unwrap();
            let s = IntegratorSettings::default().with_form(form);
            let traj = integrate(&p, 20.0, &s).unwrap();
            for smp in traj.samples() {
                let back = polar_to_cartesian(&smp.polar).unwrap();
                let scale = 1.0 + smp.cartesian.q.norm() + smp.cartesian.p.norm();
                assert!((back.q - smp.cartesian.q).norm() <= 10.0 * s.rtol * scale);
                assert!((back.p - smp.cartesian.p).norm() <= 10.0 * s.rtol * scale);
            }
        }
    }

    #[test]
    fn sample_is_exact_at_nodes_and_errors_outside() {
        let p = make_params(1.0, 1.0, 3.0).unwrap();
        let traj = integrate(&p, 5.0, &IntegratorSettings::default()).unwrap();
        let node = traj.samples()[37];
        let (pol, car) = traj.sample(node.zeta()).unwrap();
        assert_eq!(pol, node.polar);
        assert_eq!(car, node.cartesian);
        assert!(matches!(traj.sample(5.5), Err(Error::OutOfRange { .. })));
        assert!(traj.sample(0.0).is_err());
    }
}
