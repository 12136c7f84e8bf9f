//! PDE residual of the self-similar field on a 10 x 10 (r, t) grid.

use nls_profile::analysis::{ansatz_residual_check_with_step, linspace};
use nls_profile::{integrate, make_params, IntegratorSettings};

fn main() -> nls_profile::Result<()> {
    let p = make_params(0.918, 1.885, 3.0)?;
    let traj = integrate(&p, 30.0, &IntegratorSettings::default())?;
    let r = linspace(0.2, 2.0, 10);
    let t: Vec<f64> = (0..10).map(|k| 0.11 * k as f64).collect();
    for step in [1e-2, 5e-3, 1e-3, 1e-4] {
        let c = ansatz_residual_check_with_step(&traj, &p, 1.0, &r, &t, step)?;
        println!(
            "fd step {step:<7} max residual {:.3e}  normalised {:.3e}",
            c.max_residual, c.normalized
        );
    }
    Ok(())
}
