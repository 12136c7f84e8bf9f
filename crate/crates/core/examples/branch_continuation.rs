//! Continuation in `a` from a converged root.

use nls_profile::solver::{continue_branch, newton_solve};
use nls_profile::IntegratorSettings;

fn main() -> nls_profile::Result<()> {
    let seed = newton_solve((1.9, 0.9), 50.0, 1e-8, 50)?;
    println!("seed rho0={:.7} a={:.7}", seed.rho0, seed.a);
    let branch = continue_branch(&seed, -0.02, 5, 1e-8, &IntegratorSettings::default())?;
    for m in &branch.members {
        println!(
            "  rho0={:.7} a={:.7} |W|={:.2e} converged={}",
            m.rho0, m.a, m.residual_norm, m.converged
        );
    }
    println!("stopped early: {}", branch.stopped_early);
    Ok(())
}
