//! Newton shooting from a start guess, then the same root at larger radii.

use nls_profile::solver::{newton_solve, refinement_report};
use nls_profile::IntegratorSettings;

fn main() -> nls_profile::Result<()> {
    let t = std::time::Instant::now();
    let root = newton_solve((1.9, 0.9), 50.0, 1e-8, 50)?;
    println!("{root:?} in {:?}", t.elapsed());
    let report = refinement_report(
        (root.rho0, root.a),
        &[50.0, 100.0, 200.0],
        1e-8,
        50,
        &IntegratorSettings::default(),
    )?;
    for r in report {
        println!(
            "zeta_max={:<4} rho0={:.7} a={:.7} |W|={:.1e}",
            r.zeta_max, r.rho0, r.a, r.residual_norm
        );
    }
    Ok(())
}
