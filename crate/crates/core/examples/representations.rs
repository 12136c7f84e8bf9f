//! Cartesian and bounded-polar integrations of the same profile side by side.

use nls_profile::{integrate, make_params, Form, IntegratorSettings};

fn main() -> nls_profile::Result<()> {
    for (rho0, a) in [(1.0, 1.0), (1.885, 0.918), (3.0, 0.5), (0.7, 1.3)] {
        let p = make_params(a, rho0, 3.0)?;
        let base = IntegratorSettings::default();
        let polar = integrate(&p, 100.0, &base.with_form(Form::BoundedPolar))?;
        let cart = integrate(&p, 100.0, &base.with_form(Form::Cartesian))?;
        print!("rho0={rho0:<5} a={a:<5}");
        for z in [10.0, 100.0] {
            let rp = polar.sample(z)?.0.rho();
            let rc = cart.sample(z)?.1.rho();
            print!("  |drho({z})|={:.2e}", (rp - rc).abs());
        }
        println!();
    }
    Ok(())
}
