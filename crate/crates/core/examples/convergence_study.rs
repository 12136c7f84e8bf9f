//! Far-field residuals at growing truncation radii.

use nls_profile::analysis::convergence_study;
use nls_profile::{make_params, IntegratorSettings};

fn main() -> nls_profile::Result<()> {
    for (rho0, a) in [(1.0, 1.0), (1.885, 0.918)] {
        let p = make_params(a, rho0, 3.0)?;
        let table = convergence_study(&p, &[100.0, 200.0, 400.0], &IntegratorSettings::default())?;
        println!("rho0={rho0} a={a}");
        println!(
            "  {:>6} {:>12} {:>12} {:>12}",
            "zeta", "Z", "H defect", "zeta*rho"
        );
        for r in &table.rows {
            println!(
                "  {:>6} {:>12.4e} {:>12.4e} {:>12.6}",
                r.zeta_max, r.z, r.h_defect, r.zeta_rho
            );
        }
        println!(
            "  Z decreasing {}, H defect decreasing {}",
            table.z_decreasing, table.h_decreasing
        );
    }
    Ok(())
}
