//! Far-field decomposition onto the slow and oscillating tails.

use nls_profile::functionals::zero_energy_residual;
use nls_profile::tail::{default_window, tail_fit};
use nls_profile::{integrate, make_params, IntegratorSettings};

fn main() -> nls_profile::Result<()> {
    for (rho0, a) in [(1.885, 0.918), (1.0, 1.0)] {
        let p = make_params(a, rho0, 3.0)?;
        let traj = integrate(&p, 200.0, &IntegratorSettings::default())?;
        let fit = tail_fit(&traj, &p, default_window(&traj))?;
        println!("rho0={rho0} a={a} window {:?}", fit.window);
        println!("  c1={:.6} (|c1|={:.6})", fit.c1, fit.c1.norm());
        println!("  c2={:.6} (|c2|={:.6})", fit.c2, fit.c2.norm());
        println!(
            "  misfit {:.2e}, condition {:.1}",
            fit.fit_residual, fit.condition
        );
        println!(
            "  Z(zeta_max)={:.4e}  a|c2|={:.4e}",
            zero_energy_residual(&traj.last().cartesian, &p),
            a * fit.c2.norm()
        );
    }
    Ok(())
}
