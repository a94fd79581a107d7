//! Maximizes the LO monitor power over two pre-compensation angles with a
//! Nelder-Mead search.

use cvqkd::receiver::{simplex_precompensate, SimplexOptions};
use cvqkd::simulator::PolarizationDrift;

fn main() {
    let drift = PolarizationDrift::random(1e8, 3);
    let opts = SimplexOptions::default();
    let res = simplex_precompensate(|x| drift.power(x), [0.0, 0.0], &opts);
    println!("hidden optimum  {:?}", drift.optimum);
    println!("found           {:?}", res.angles);
    println!(
        "power {:.6} of maximum after {} evaluations (best at {}), converged: {}",
        res.value / drift.n_lo,
        res.evaluations,
        res.evaluations_to_best,
        res.converged
    );
}
