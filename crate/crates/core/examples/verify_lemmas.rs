//! Far-field audit report for one parameter pair.
//!
//! cargo run --release --example verify_lemmas -- [rho0 a zeta_max]

use nls_profile::analysis::{verify_lemmas, LemmaTolerances};
use nls_profile::make_params;

fn main() -> nls_profile::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .filter_map(|s| s.parse().ok())
        .collect();
    let get = |i: usize, d: f64| args.get(i).copied().unwrap_or(d);
    let p = make_params(get(1, 1.0), get(0, 1.0), 3.0)?;
    let report = verify_lemmas(&p, get(2, 400.0), &LemmaTolerances::default())?;
    println!(
        "checkpoints {:?}, status {}",
        report.checkpoints, report.status
    );
    for e in &report.entries {
        println!("{:<16} {}", e.name, if e.pass { "pass" } else { "FAIL" });
        for (k, v) in &e.observed {
            println!("    {k:<28} {v:.6e}");
        }
    }
    println!("overall: {}", report.pass());
    Ok(())
}
