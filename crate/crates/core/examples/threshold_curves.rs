//! Largest intrinsic variance that still certifies entanglement, over a grid
//! of amplitudes and transmissions. Writes CSV to stdout.

use cvqkd::pipeline::{run_bounds, write_bounds};

fn main() -> cvqkd::Result<()> {
    let alphas = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
    let table = run_bounds(&alphas, &[1.0, 0.7, 0.448], 1e8)?;
    write_bounds(std::io::stdout().lock(), &table)
}
