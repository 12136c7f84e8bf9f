use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::functionals::{energy_unchecked, zero_energy_residual};
use crate::integrator::{count_bumps, integrate, IntegratorSettings, Status};
use crate::params::{make_params, Params};

/// Environment variable capping the number of sweep worker threads.
pub const THREADS_ENV: &str = "PROFILE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Completed,
    RhoHitZero,
    StepUnderflow,
    Failed,
}

impl From<Status> for CellStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Completed => CellStatus::Completed,
            Status::RhoHitZero => CellStatus::RhoHitZero,
            Status::StepUnderflow => CellStatus::StepUnderflow,
        }
    }
}

impl std::fmt::Display for CellStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CellStatus::Completed => "completed",
            CellStatus::RhoHitZero => "rho_hit_zero",
            CellStatus::StepUnderflow => "step_underflow",
            CellStatus::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub rho0: f64,
    pub a: f64,
    pub bump_count: usize,
    pub e_final: f64,
    pub k_plateau: f64,
    pub z_final: f64,
    pub status: CellStatus,
    pub error: Option<String>,
}

/// `n` equally spaced points on `[lo, hi]`; a single point is `lo`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Grid sweep with default settings, parallelism capped by `PROFILE_THREADS`.
pub fn sweep(
    rho0_range: (f64, f64),
    a_range: (f64, f64),
    grid_counts: (usize, usize),
    zeta_max: f64,
) -> Result<Vec<SweepCell>> {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    sweep_with(
        rho0_range,
        a_range,
        grid_counts,
        zeta_max,
        &IntegratorSettings::default(),
        threads,
    )
}

/// Cells are ordered by `ρ₀` then `a`, whatever the thread count.
pub fn sweep_with(
    rho0_range: (f64, f64),
    a_range: (f64, f64),
    grid_counts: (usize, usize),
    zeta_max: f64,
    settings: &IntegratorSettings,
    threads: Option<usize>,
) -> Result<Vec<SweepCell>> {
    for (name, (lo, hi)) in [("rho0_range", rho0_range), ("a_range", a_range)] {
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(invalid(
                name,
                format!("({lo}, {hi}) must be positive and ordered"),
            ));
        }
    }
    if grid_counts.0 == 0 || grid_counts.1 == 0 {
        return Err(invalid("grid_counts", "must be at least 1"));
    }
    if !(zeta_max > 1.0) {
        return Err(invalid("zeta_max", "must exceed 1"));
    }
    settings.validate()?;
    let nodes: Vec<(f64, f64)> = linspace(rho0_range.0, rho0_range.1, grid_counts.0)
        .into_iter()
        .flat_map(|r| {
            linspace(a_range.0, a_range.1, grid_counts.1)
                .into_iter()
                .map(move |a| (r, a))
        })
        .collect();
    let run = || -> Vec<SweepCell> {
        nodes
            .par_iter()
            .map(|&(r, a)| classify(r, a, zeta_max, settings))
            .collect()
    };
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| crate::error::Error::Unsupported(e.to_string()))?;
            Ok(pool.install(run))
        }
        None => Ok(run()),
    }
}

/// Integrates one parameter pair and summarises the far field.
pub(crate) fn classify(
    rho0: f64,
    a: f64,
    zeta_max: f64,
    settings: &IntegratorSettings,
) -> SweepCell {
    let failed = |msg: String| SweepCell {
        rho0,
        a,
        bump_count: 0,
        e_final: f64::NAN,
        k_plateau: f64::NAN,
        z_final: f64::NAN,
        status: CellStatus::Failed,
        error: Some(msg),
    };
    let params: Params = match make_params(a, rho0, 3.0) {
        Ok(p) => p,
        Err(e) => return failed(e.to_string()),
    };
    match integrate(&params, zeta_max, settings) {
        Ok(traj) => {
            let last = traj.last();
            SweepCell {
                rho0,
                a,
                bump_count: count_bumps(&traj),
                e_final: energy_unchecked(&last.polar),
                k_plateau: last.polar.p1,
                z_final: zero_energy_residual(&last.cartesian, &params),
                status: traj.status.into(),
                error: None,
            }
        }
        Err(e) => failed(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(0.5, 3.0, 2), vec![0.5, 3.0]);
        assert_eq!(linspace(1.0, 2.0, 1), vec![1.0]);
        assert_eq!(linspace(0.0, 1.0, 5)[2], 0.5);
    }

    #[test]
    fn ordering_is_independent_of_threads() {
        let s = IntegratorSettings::default();
        let one = sweep_with((0.8, 1.6), (0.8, 1.2), (2, 3), 25.0, &s, Some(1)).unwrap();
        let many = sweep_with((0.8, 1.6), (0.8, 1.2), (2, 3), 25.0, &s, Some(4)).unwrap();
        assert_eq!(one.len(), 6);
        assert_eq!(
            one.iter().map(|c| (c.rho0, c.a)).collect::<Vec<_>>(),
            vec![
                (0.8, 0.8),
                (0.8, 1.0),
                (0.8, 1.2),
                (1.6, 0.8),
                (1.6, 1.0),
                (1.6, 1.2)
            ]
        );
        for (x, y) in one.iter().zip(&many) {
            assert_eq!(x.bump_count, y.bump_count);
            assert_eq!(x.e_final.to_bits(), y.e_final.to_bits());
            assert_eq!(x.z_final.to_bits(), y.z_final.to_bits());
        }
    }

    #[test]
    fn single_cell_equals_direct_run() {
        let s = IntegratorSettings::default();
        let cells = sweep_with((1.885, 1.885), (0.918, 0.918), (1, 1), 30.0, &s, Some(1)).unwrap();
        assert_eq!(cells.len(), 1);
        let p = make_params(0.918, 1.885, 3.0).unwrap();
        let traj = integrate(&p, 30.0, &s).unwrap();
        assert_eq!(cells[0].bump_count, count_bumps(&traj));
        assert_eq!(cells[0].k_plateau, traj.last().polar.p1);
        assert_eq!(cells[0].status, CellStatus::Completed);
    }

    #[test]
    fn invalid_ranges_rejected() {
        let s = IntegratorSettings::default();
        assert!(sweep_with((-1.0, 1.0), (0.5, 1.0), (2, 2), 30.0, &s, None).is_err());
        assert!(sweep_with((1.0, 0.5), (0.5, 1.0), (2, 2), 30.0, &s, None).is_err());
        assert!(sweep_with((0.5, 1.0), (0.5, 1.0), (0, 2), 30.0, &s, None).is_err());
    }
}
