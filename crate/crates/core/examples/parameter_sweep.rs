//! Coarse (rho0, a) sweep written as CSV. Set PROFILE_THREADS to cap workers.

use nls_profile::analysis::sweep;
use nls_profile::io::sweep_csv_string;

fn main() -> nls_profile::Result<()> {
    let cells = sweep((0.5, 3.0), (0.5, 1.5), (6, 5), 50.0)?;
    print!("{}", sweep_csv_string(&cells, &[]));
    Ok(())
}
