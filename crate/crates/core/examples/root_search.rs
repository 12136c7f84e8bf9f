//! Roots seeded from the local minima of |W| on a sweep, with bump counts.
//! Takes a few seconds on a multicore machine.

use nls_profile::solver::roots_from_sweep;
use nls_profile::IntegratorSettings;

fn main() -> nls_profile::Result<()> {
    let roots = roots_from_sweep(
        (0.2, 4.0),
        (0.04, 0.3),
        (40, 40),
        50.0,
        1e-8,
        40,
        &IntegratorSettings::default(),
        None,
    )?;
    println!("{:>10} {:>10} {:>6}", "a", "rho0", "bumps");
    for r in roots {
        println!("{:>10.6} {:>10.6} {:>6}", r.a, r.rho0, r.bump_count);
    }
    Ok(())
}
