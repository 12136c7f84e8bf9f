//! Integrates one profile and writes it as CSV.
//!
//! cargo run --release --example integrate_profile -- [a rho0 zeta_max out.csv]

use std::path::PathBuf;

use nls_profile::io::write_trajectory_csv;
use nls_profile::{integrate, make_params, IntegratorSettings};

fn main() -> nls_profile::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let num = |i: usize, d: f64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let params = make_params(num(0, 0.918), num(1, 1.885), 3.0)?;
    let zeta_max = num(2, 100.0);
    let out = args
        .get(3)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("profile.csv"));

    let traj = integrate(&params, zeta_max, &IntegratorSettings::default())?;
    println!(
        "status {} after {} accepted steps",
        traj.status, traj.accepted_steps
    );
    for z in [1.0, 10.0, 50.0, zeta_max] {
        let (pol, _) = traj.sample(z)?;
        println!(
            "zeta={z:>6}  rho={:.10}  zeta*rho={:.10}",
            pol.rho(),
            pol.p1
        );
    }
    write_trajectory_csv(&traj, &out)?;
    println!("wrote {} rows to {}", traj.samples().len(), out.display());
    Ok(())
}
