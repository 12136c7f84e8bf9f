//! Integral identities and the energy law evaluated along a profile.

use nls_profile::functionals::{
    budd_residual, energy_derivative_residual, k_consistency, theta_prime_identity_residual,
};
use nls_profile::{integrate, make_params, IntegratorSettings};

fn main() -> nls_profile::Result<()> {
    let p = make_params(0.918, 1.885, 3.0)?;
    for spacing in [0.05, 0.025] {
        let s = IntegratorSettings::default().with_spacing(spacing);
        let traj = integrate(&p, 200.0, &s)?;
        println!("sample spacing {spacing}");
        for z in [10.0, 100.0] {
            println!(
                "  zeta={z:<5} budd={:.3e}  theta'={:.3e}",
                budd_residual(&traj, z)?,
                theta_prime_identity_residual(&traj, z)?
            );
        }
        println!(
            "  max |E' + zeta rho^4| (normalised) = {:.3e}",
            energy_derivative_residual(&traj)?
        );
        let k = k_consistency(&traj, &p)?;
        println!("  |k| estimates: {k:?}");
        println!("  largest pairwise spread {:.2e}", k.max_pairwise_spread());
    }
    Ok(())
}
