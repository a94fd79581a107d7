//! Independent reference routes used by the integration tests.
//!
//! The separability oracle never calls the library solver: it samples the
//! unknowns at random inside their Cauchy-Schwarz box and then refines the
//! best sample with Dykstra alternating projections between the fixed-entry
//! slice and the two PSD cones, each shifted by a small margin so that a limit
//! point is strictly feasible.
#![allow(dead_code)]

use cvqkd::evm::{min_eigenvalue, Cmat6, EvmInstance, NUM_FREE};
use cvqkd::feasibility::{separability_feasible, DEFAULT_TOL};
use cvqkd::fock::C64;
use cvqkd::witness::symmetric_noise_instance;
use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ORACLE_SAMPLES: usize = 100_000;
/// Cone shift used during refinement.
const MARGIN: f64 = 1e-4;
/// Best smallest eigenvalue at or above which the oracle cannot rule out
/// feasibility without a certificate.
pub const AMBIGUITY_BAND: f64 = 1e-3;
const REFINE_ITERS: usize = 50_000;

#[derive(Debug, Clone, Copy)]
pub struct OracleVerdict {
    pub feasible: bool,
    pub ambiguous: bool,
    pub best_min_eigenvalue: f64,
}

fn pt(m: &Cmat6) -> Cmat6 {
    let mut out = *m;
    for r in 0..3 {
        for c in 0..3 {
            out[(r, 3 + c)] = m[(3 + r, c)];
            out[(3 + r, c)] = m[(r, 3 + c)];
        }
    }
    out
}

fn score(chi: &Cmat6) -> f64 {
    min_eigenvalue(chi).min(min_eigenvalue(&pt(chi)))
}

/// Projection onto `{X : X >= shift I}`.
fn project_psd(m: &Cmat6, shift: f64) -> Cmat6 {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let e = SymmetricEigen::new(h);
    let clipped = e.eigenvalues.map(|v| C64::new(v.max(shift), 0.0));
    let v = e.eigenvectors;
    v * Cmat6::from_diagonal(&clipped) * v.adjoint()
}

/// Projection onto the Hermitian matrices sharing `fixed`'s known entries and
/// the tied entries of the off-diagonal block.
fn project_slice(m: &Cmat6, fixed: &Cmat6) -> Cmat6 {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut out = *fixed;
    let z = |r: usize, c: usize| h[(r, 3 + c)];
    let z01 = (z(0, 1) + z(1, 0)) * 0.5;
    let z02 = (z(0, 2) + z(2, 0)) * 0.5;
    let top = [
        [fixed[(0, 3)], z01, z02],
        [z01, z(1, 1), z(1, 2)],
        [z02, z(2, 1), z(2, 2)],
    ];
    for (r, row) in top.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            out[(r, 3 + c)] = *v;
            out[(3 + c, r)] = v.conj();
        }
    }
    out
}

fn random_completion(inst: &EvmInstance, rng: &mut ChaCha8Rng) -> [C64; NUM_FREE] {
    let d = |i: usize| inst.fixed[(i, i)].re.max(0.0);
    // |Z_rc| <= sqrt(chi_rr chi_{3+c,3+c}) for any PSD completion
    let bounds = [
        (d(0) * d(4)).sqrt().max((d(1) * d(3)).sqrt()),
        (d(0) * d(5)).sqrt().max((d(2) * d(3)).sqrt()),
        (d(1) * d(4)).sqrt(),
        (d(2) * d(5)).sqrt(),
        (d(1) * d(5)).sqrt().max((d(2) * d(4)).sqrt()),
        (d(1) * d(5)).sqrt().max((d(2) * d(4)).sqrt()),
    ];
    std::array::from_fn(|k| {
        let r = bounds[k] * rng.random::<f64>().sqrt();
        let th = rng.random_range(0.0..std::f64::consts::TAU);
        C64::from_polar(r, th)
    })
}

/// Random search plus Dykstra refinement.
pub fn oracle_feasibility(inst: &EvmInstance, samples: usize, seed: u64) -> OracleVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = [C64::new(0.0, 0.0); NUM_FREE];
    let mut best = (score(&inst.completion(&zero)), inst.completion(&zero));
    for _ in 0..samples {
        if best.0 >= -DEFAULT_TOL {
            break;
        }
        let chi = inst.completion(&random_completion(inst, &mut rng));
        let g = score(&chi);
        if g > best.0 {
            best = (g, chi);
        }
    }

    // Dykstra over slice, PSD(X) and PSD(PT X); the slice is affine and needs
    // no correction term
    let mut x = best.1;
    let mut p1 = Cmat6::zeros();
    let mut p2 = Cmat6::zeros();
    for it in 0..REFINE_ITERS {
        if best.0 >= -DEFAULT_TOL {
            break;
        }
        let y = project_psd(&(x + p1), MARGIN);
        p1 += x - y;
        let w = pt(&project_psd(&pt(&(y + p2)), MARGIN));
        p2 += y - w;
        x = project_slice(&w, &inst.fixed);
        if it % 5 == 0 {
            let g = score(&x);
            if g > best.0 {
                best = (g, x);
            }
        }
    }
    let feasible = best.0 >= -DEFAULT_TOL;
    OracleVerdict {
        feasible,
        ambiguous: !feasible && best.0 > -AMBIGUITY_BAND,
        best_min_eigenvalue: best.0,
    }
}

/// Threshold by scanning upward on a 1e-2 grid and then on a 1e-4 grid inside
/// the first cell that turns feasible. Returns the largest infeasible grid
/// point, or `None` when already feasible at `V = 1`.
pub fn grid_threshold(alpha: f64, eta: f64, n_lo: f64) -> Option<f64> {
    let entangled = |v: f64| {
        let inst = symmetric_noise_instance(alpha, eta, v, n_lo).unwrap();
        !separability_feasible(&inst, DEFAULT_TOL).feasible
    };
    if !entangled(1.0) {
        return None;
    }
    let mut coarse = 1.0;
    while entangled(coarse + 1e-2) {
        coarse += 1e-2;
    }
    let mut last = coarse;
    for k in 1..=100 {
        let v = coarse + k as f64 * 1e-4;
        if entangled(v) {
            last = v;
        } else {
            break;
        }
    }
    Some(last)
}
