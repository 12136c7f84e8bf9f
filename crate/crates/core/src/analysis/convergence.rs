use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::functionals::{energy_unchecked, hamiltonian_truncated_at, zero_energy_residual};
use crate::integrator::{integrate, IntegratorSettings};
use crate::params::Params;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub zeta_max: f64,
    /// `Z(ζmax)`
    pub z: f64,
    /// `|h_trunc + tail_estimate|`
    pub h_defect: f64,
    pub zeta_rho: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub params: Params,
    pub rows: Vec<ConvergenceRow>,
    pub z_decreasing: bool,
    pub h_decreasing: bool,
}

impl ConvergenceTable {
    pub fn pass(&self) -> bool {
        self.z_decreasing && self.h_decreasing
    }
}

/// Residuals at each truncation radius in `zeta_list`.
///
/// One integration to the largest radius is shared by all rows: the state at
/// `ζ` does not depend on how far past `ζ` the run continues.
pub fn convergence_study(
    params: &Params,
    zeta_list: &[f64],
    settings: &IntegratorSettings,
) -> Result<ConvergenceTable> {
    if zeta_list.len() < 3 {
        return Err(Error::InsufficientData("need ≥ 3 points for trend".into()));
    }
    if zeta_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("zeta_list", "must be strictly increasing"));
    }
    let top = *zeta_list.last().expect("checked length");
    let traj = integrate(params, top, settings)?;
    if !traj.is_completed() {
        return Err(Error::Integration(format!(
            "integration stopped at zeta={} with status {}",
            traj.last().zeta(),
            traj.status
        )));
    }
    let rows = zeta_list
        .iter()
        .map(|&zm| {
            let (pol, car) = traj.sample(zm)?;
            let (h, tail) = hamiltonian_truncated_at(&traj, params, zm)?;
            Ok(ConvergenceRow {
                zeta_max: zm,
                z: zero_energy_residual(&car, params),
                h_defect: (h + tail).abs(),
                zeta_rho: pol.p1,
                energy: energy_unchecked(&pol),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let z_decreasing = rows.windows(2).all(|w| w[1].z < w[0].z);
    let h_decreasing = rows.windows(2).all(|w| w[1].h_defect < w[0].h_defect);
    Ok(ConvergenceTable {
        params: *params,
        rows,
        z_decreasing,
        h_decreasing,
    })
}
