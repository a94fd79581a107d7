//! Expectation value matrix for the operator sets `{|0>, |1>}` on Alice's side
//! and `{1, s2, s3}` on Bob's side.
//!
//! The 6x6 matrix has entries `chi[(3i+k, 3j+l)] = <|i><j| (x) B_k B_l>` with
//! normalized Stokes operators. Diagonal blocks are fixed by the conditional
//! moments; in the off-diagonal block only the `(0,0)` entry is known (the
//! source overlap, untouched by a channel acting on mode B). The remaining
//! entries are parameterized by six complex unknowns:
//!
//! ```text
//!         [ o   z0        z1      ]
//! Z   =   [ z0  z2        z4+i z5 ]      lower-left block = Z^dagger
//!         [ z1  z4-i z5   z3      ]
//! ```
//!
//! `z0..z5` stand for `<|0><1| (x) {s2, s3, s2^2, s3^2, {s2,s3}/2, s1}>`.

use nalgebra::Matrix6;

use crate::error::{Error, Result};
use crate::fock::C64;
use crate::model::source_overlap;
use crate::receiver::MomentSet;
use crate::stokes::StokesMoments;

pub type Cmat6 = Matrix6<C64>;

/// Number of complex unknowns in the off-diagonal block.
pub const NUM_FREE: usize = 6;

/// Tolerance on the Hermitian check of [`partial_transpose`].
pub const HERMITIAN_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Fixed part of the matrix plus the affine map from the unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct EvmInstance {
    pub fixed: Cmat6,
    pub n_lo: f64,
}

/// 3x3 pattern of unknown `k` inside the off-diagonal block.
fn pattern(k: usize) -> [[C64; 3]; 3] {
    let mut p = [[ZERO; 3]; 3];
    match k {
        0 => {
            p[0][1] = ONE;
            p[1][0] = ONE;
        }
        1 => {
            p[0][2] = ONE;
            p[2][0] = ONE;
        }
        2 => p[1][1] = ONE,
        3 => p[2][2] = ONE,
        4 => {
            p[1][2] = ONE;
            p[2][1] = ONE;
        }
        5 => {
            p[1][2] = I;
            p[2][1] = -I;
        }
        _ => unreachable!("only six unknowns"),
    }
    p
}

/// Hermitian matrix with `c * pattern(k)` in the upper-right block.
fn generator(k: usize, c: C64) -> Cmat6 {
    let p = pattern(k);
    let mut g = Cmat6::zeros();
    for (r, row) in p.iter().enumerate() {
        for (col, v) in row.iter().enumerate() {
            let v = *v * c;
            g[(r, 3 + col)] = v;
            g[(3 + col, r)] = v.conj();
        }
    }
    g
}

/// Real generators of the affine slice: `Re z_k` and `Im z_k` for each unknown.
pub fn free_generators() -> [Cmat6; 2 * NUM_FREE] {
    std::array::from_fn(|i| generator(i / 2, if i % 2 == 0 { ONE } else { I }))
}

/// Conditional block `<B>` of one signal state (before the 1/2 prior).
pub fn moment_block(m: &StokesMoments) -> [[C64; 3]; 3] {
    let r = |x: f64| C64::new(x, 0.0);
    [
        [ONE, r(m.mean_s2), r(m.mean_s3)],
        [
            r(m.mean_s2),
            r(m.second_s2),
            C64::new(m.cross_sym, m.s1_lower_norm),
        ],
        [
            r(m.mean_s3),
            C64::new(m.cross_sym, -m.s1_lower_norm),
            r(m.second_s3),
        ],
    ]
}

impl EvmInstance {
    /// Instance from the two conditional moment sets and the source amplitude.
    pub fn from_moments(states: &[StokesMoments; 2], alpha: f64, n_lo: f64) -> Result<Self> {
        for m in states {
            m.validate()?;
        }
        if !(n_lo > 0.0) {
            return Err(Error::Domain(format!("n_lo must be > 0, got {n_lo}")));
        }
        let overlap = source_overlap(alpha)?;
        let mut fixed = Cmat6::zeros();
        for (k, m) in states.iter().enumerate() {
            let b = moment_block(m);
            for (r, row) in b.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    fixed[(3 * k + r, 3 * k + c)] = *v * 0.5;
                }
            }
        }
        fixed[(0, 3)] = C64::new(0.5 * overlap, 0.0);
        fixed[(3, 0)] = C64::new(0.5 * overlap, 0.0);
        Ok(Self { fixed, n_lo })
    }

    /// Same as [`from_moments`](Self::from_moments) but with the `(0,3)` entry
    /// set explicitly.
    pub fn with_overlap_entry(mut self, value: f64) -> Self {
        self.fixed[(0, 3)] = C64::new(value, 0.0);
        self.fixed[(3, 0)] = C64::new(value, 0.0);
        self
    }

    /// Completed matrix for the given unknowns.
    pub fn completion(&self, z: &[C64; NUM_FREE]) -> Cmat6 {
        let mut chi = self.fixed;
        for (k, zk) in z.iter().enumerate() {
            chi += generator(k, *zk);
        }
        chi
    }

    /// Unknowns read back from a completed matrix.
    pub fn unknowns_of(chi: &Cmat6) -> [C64; NUM_FREE] {
        let e = |r: usize, c: usize| chi[(r, 3 + c)];
        [
            e(0, 1),
            e(0, 2),
            e(1, 1),
            e(2, 2),
            (e(1, 2) + e(2, 1)) * 0.5,
            (e(1, 2) - e(2, 1)) * (-I * 0.5),
        ]
    }

    pub fn overlap_entry(&self) -> f64 {
        self.fixed[(0, 3)].re
    }
}

/// Builds the instance from estimated moments. `<S1>` enters through the lower
/// bound stored in each [`StokesMoments`].
pub fn build_evm(m: &MomentSet, alpha: f64, n_lo: f64) -> Result<EvmInstance> {
    m.validate()?;
    EvmInstance::from_moments(&m.states, alpha, n_lo)
}

/// Largest absolute deviation from Hermiticity.
pub fn hermitian_deviation(chi: &Cmat6) -> f64 {
    (chi - chi.adjoint())
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}

/// Transpose on Alice's index: swaps the two off-diagonal 3x3 blocks.
pub fn partial_transpose(chi: &Cmat6) -> Result<Cmat6> {
    let dev = hermitian_deviation(chi);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(partial_transpose_unchecked(chi))
}

pub(crate) fn partial_transpose_unchecked(chi: &Cmat6) -> Cmat6 {
    let mut out = *chi;
    for r in 0..3 {
        for c in 0..3 {
            out[(r, 3 + c)] = chi[(3 + r, c)];
            out[(3 + r, c)] = chi[(r, 3 + c)];
        }
    }
    out
}

/// Smallest eigenvalue of a Hermitian 6x6 matrix.
pub fn min_eigenvalue(m: &Cmat6) -> f64 {
    nalgebra::SymmetricEigen::new(*m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vacuum() -> StokesMoments {
        StokesMoments::from_centered(0.0, 0.0, 1.0, 1.0, 0.0, 1e8).unwrap()
    }

    #[test]
    fn vacuum_instance() {
        let inst = EvmInstance::from_moments(&[vacuum(), vacuum()], 0.0, 1e8).unwrap();
        assert_eq!(inst.overlap_entry(), 0.5);
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(inst.fixed[(r, c)], inst.fixed[(3 + r, 3 + c)]);
            }
        }
        assert_eq!(inst.fixed[(0, 0)], C64::new(0.5, 0.0));
    }

    #[test]
    fn completion_is_hermitian() {
        let a = StokesMoments::from_centered(0.6, 0.1, 1.1, 1.2, 0.05, 1e8).unwrap();
        let b = StokesMoments::from_centered(-0.6, 0.0, 1.0, 1.3, -0.02, 1e8).unwrap();
        let inst = EvmInstance::from_moments(&[a, b], 0.3, 1e8).unwrap();
        let z = [
            C64::new(0.1, 0.2),
            C64::new(-0.3, 0.0),
            C64::new(0.05, -0.1),
            C64::new(0.2, 0.2),
            C64::new(-0.1, 0.4),
            C64::new(0.3, -0.2),
        ];
        let chi = inst.completion(&z);
        assert!(hermitian_deviation(&chi) < 1e-15);
        let back = EvmInstance::unknowns_of(&chi);
        for (u, v) in z.iter().zip(back.iter()) {
            assert!((u - v).norm() < 1e-15);
        }
    }

    #[test]
    fn partial_transpose_involution_and_block_diagonal() {
        let a = StokesMoments::from_centered(0.6, 0.0, 1.0, 1.0, 0.0, 1e8).unwrap();
        let inst = EvmInstance::from_moments(&[a, a], 0.3, 1e8)
            .unwrap()
            .with_overlap_entry(0.0);
        assert_eq!(partial_transpose(&inst.fixed).unwrap(), inst.fixed);
        let chi = inst.completion(&[C64::new(0.1, 0.3); NUM_FREE]);
        let pt = partial_transpose(&chi).unwrap();
        assert_ne!(pt, chi);
        assert_eq!(partial_transpose(&pt).unwrap(), chi);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = Cmat6::identity();
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(partial_transpose(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn generators_span_unknowns() {
        let g = free_generators();
        for (i, gi) in g.iter().enumerate() {
            assert!(hermitian_deviation(gi) < 1e-15);
            for gj in g.iter().skip(i + 1) {
                // disjoint or orthogonal supports
                let ip: C64 = gi.iter().zip(gj.iter()).map(|(a, b)| a.conj() * b).sum();
                assert!(ip.norm() < 1e-15);
            }
        }
    }
}
