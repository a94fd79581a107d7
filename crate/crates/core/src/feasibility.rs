//! Separability test: does some completion of the expectation value matrix
//! keep both the matrix and its partial transpose positive semidefinite?
//!
//! Solved as `max t` subject to `chi(z) - t I >= 0` and `PT(chi(z)) - t I >= 0`
//! with a log-barrier interior-point method over the 12 real unknowns plus
//! `t`. The instance is separable-compatible iff the optimum `t* >= -tol`.
//! Feasibility is declared as soon as a completion with smallest eigenvalue
//! `>= -tol` is found; infeasibility is declared once the duality-gap bound
//! `t + m / tau` of the central path drops below `-tol`.

use nalgebra::{Cholesky, SMatrix, SVector};

use crate::evm::{
    free_generators, min_eigenvalue, partial_transpose_unchecked, Cmat6, EvmInstance, NUM_FREE,
};
use crate::fock::C64;

const NV: usize = 2 * NUM_FREE + 1;
type Vec13 = SVector<f64, NV>;
type Mat13 = SMatrix<f64, NV, NV>;

/// Default tolerance on the smallest eigenvalue.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Barrier parameter schedule and stopping rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub tau_init: f64,
    pub tau_factor: f64,
    pub tau_max: f64,
    pub max_newton_per_center: usize,
    pub newton_decrement_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            tau_init: 1.0,
            tau_factor: 8.0,
            tau_max: 1e13,
            max_newton_per_center: 100,
            newton_decrement_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    /// `max(0, -g)` where `g` is the smallest eigenvalue over both matrices at
    /// the best completion found.
    pub residual: f64,
    /// Smallest eigenvalue at the best completion.
    pub best_min_eigenvalue: f64,
    /// Certified upper bound on the optimal smallest eigenvalue, when available.
    pub upper_bound: Option<f64>,
    pub newton_steps: usize,
    pub completion: [C64; NUM_FREE],
}

struct Problem {
    f1: Cmat6,
    f2: Cmat6,
    g1: [Cmat6; NV],
    g2: [Cmat6; NV],
}

impl Problem {
    fn new(inst: &EvmInstance) -> Self {
        let free = free_generators();
        let g1: [Cmat6; NV] = std::array::from_fn(|i| {
            if i < NV - 1 {
                free[i]
            } else {
                -Cmat6::identity()
            }
        });
        let g2: [Cmat6; NV] = std::array::from_fn(|i| {
            if i < NV - 1 {
                partial_transpose_unchecked(&free[i])
            } else {
                -Cmat6::identity()
            }
        });
        Self {
            f1: inst.fixed,
            f2: partial_transpose_unchecked(&inst.fixed),
            g1,
            g2,
        }
    }

    fn mats(&self, x: &Vec13) -> (Cmat6, Cmat6) {
        let mut a = self.f1;
        let mut b = self.f2;
        for i in 0..NV {
            if x[i] != 0.0 {
                a += self.g1[i] * C64::new(x[i], 0.0);
                b += self.g2[i] * C64::new(x[i], 0.0);
            }
        }
        (a, b)
    }

    /// Barrier value, or `None` outside the domain.
    fn barrier(&self, x: &Vec13, tau: f64) -> Option<f64> {
        let (a, b) = self.mats(x);
        Some(-tau * x[NV - 1] - log_det(a)? - log_det(b)?)
    }
}

fn log_det(m: Cmat6) -> Option<f64> {
    let l = Cholesky::new(m)?;
    let l = l.l_dirty();
    Some((0..6).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

/// `Re tr(X Y)` without forming the product.
fn re_trace_prod(x: &Cmat6, y: &Cmat6) -> f64 {
    let mut s = 0.0;
    for r in 0..6 {
        for c in 0..6 {
            s += (x[(r, c)] * y[(c, r)]).re;
        }
    }
    s
}

fn completion_of(x: &Vec13) -> [C64; NUM_FREE] {
    std::array::from_fn(|k| C64::new(x[2 * k], x[2 * k + 1]))
}

fn min_eig_pair(inst: &EvmInstance, z: &[C64; NUM_FREE]) -> f64 {
    let chi = inst.completion(z);
    min_eigenvalue(&chi).min(min_eigenvalue(&partial_transpose_unchecked(&chi)))
}

/// Runs the feasibility test with default solver settings and tolerance `tol`.
pub fn separability_feasible(inst: &EvmInstance, tol: f64) -> Feasibility {
    separability_feasible_with(
        inst,
        &SolverOptions {
            tol,
            ..SolverOptions::default()
        },
    )
}

pub fn separability_feasible_with(inst: &EvmInstance, opts: &SolverOptions) -> Feasibility {
    let p = Problem::new(inst);
    let zero = [C64::new(0.0, 0.0); NUM_FREE];
    let g0 = min_eig_pair(inst, &zero);
    let done =
        |feasible: bool, g: f64, ub: Option<f64>, steps: usize, z: [C64; NUM_FREE]| Feasibility {
            feasible,
            residual: (-g).max(0.0),
            best_min_eigenvalue: g,
            upper_bound: ub,
            newton_steps: steps,
            completion: z,
        };
    if g0 >= -opts.tol {
        return done(true, g0, None, 0, zero);
    }

    let m = (NV - 1) as f64;
    let mut x = Vec13::zeros();
    x[NV - 1] = g0 - 1.0;
    let mut tau = opts.tau_init;
    let mut steps = 0;
    let mut best = (g0, zero);

    loop {
        for _ in 0..opts.max_newton_per_center {
            let (a, b) = p.mats(&x);
            let (Some(ca), Some(cb)) = (Cholesky::new(a), Cholesky::new(b)) else {
                break;
            };
            let (ai, bi) = (ca.inverse(), cb.inverse());
            let pa: [Cmat6; NV] = std::array::from_fn(|i| ai * p.g1[i]);
            let pb: [Cmat6; NV] = std::array::from_fn(|i| bi * p.g2[i]);
            let mut grad = Vec13::zeros();
            let mut hess = Mat13::zeros();
            for i in 0..NV {
                grad[i] = -pa[i].trace().re - pb[i].trace().re;
                for j in i..NV {
                    let h = re_trace_prod(&pa[i], &pa[j]) + re_trace_prod(&pb[i], &pb[j]);
                    hess[(i, j)] = h;
                    hess[(j, i)] = h;
                }
            }
            grad[NV - 1] -= tau;
            let dx = match Cholesky::new(hess) {
                Some(c) => -c.solve(&grad),
                None => match hess.lu().solve(&grad) {
                    Some(s) => -s,
                    None => break,
                },
            };
            steps += 1;
            let slope = grad.dot(&dx);
            if -slope / 2.0 < opts.newton_decrement_tol {
                break;
            }
            let Some(f0) = p.barrier(&x, tau) else { break };
            let mut s = 1.0;
            loop {
                let trial = x + dx * s;
                if let Some(f) = p.barrier(&trial, tau) {
                    if f <= f0 + 0.25 * s * slope {
                        x = trial;
                        break;
                    }
                }
                s *= 0.5;
                if s < 1e-14 {
                    break;
                }
            }
            if s < 1e-14 {
                break;
            }
        }

        let z = completion_of(&x);
        let g = min_eig_pair(inst, &z);
        if g > best.0 {
            best = (g, z);
        }
        if best.0 >= -opts.tol {
            return done(true, best.0, None, steps, best.1);
        }
        // slack of one unit covers an inexactly centered iterate
        let ub = x[NV - 1] + (m + 1.0) / tau;
        if ub < -opts.tol {
            return done(false, best.0, Some(ub), steps, best.1);
        }
        if tau > opts.tau_max {
            log::debug!("barrier schedule exhausted at t = {}", x[NV - 1]);
            return done(false, best.0, Some(ub), steps, best.1);
        }
        tau *= opts.tau_factor;
    }
}
