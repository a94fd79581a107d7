//! Checks that the four Stokes operators built from ladder operators satisfy
//! `S1^2 + S2^2 + S3^2 = S0 (S0 + 2)` on product coherent states.

use cvqkd::fock::{verify_stokes_identity, FockOracle};

fn main() -> cvqkd::Result<()> {
    let oracle = FockOracle::new(16, 16)?;
    for (lo, sig) in [(0.0, 0.0), (2.0, 0.0), (2.0, 1.5), (3.0, 1.0)] {
        let residual = verify_stokes_identity(&oracle, lo, sig)?;
        println!("|beta_lo| = {lo:.1}, |beta_s| = {sig:.1}: residual {residual:.2e}");
    }
    Ok(())
}
