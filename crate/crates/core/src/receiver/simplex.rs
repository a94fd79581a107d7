//! Nelder-Mead maximization of the LO monitor power over two polarization
//! pre-compensation angles.

use serde::{Deserialize, Serialize};

use crate::angle::wrap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Edge length of the initial simplex (radians).
    pub initial_step: f64,
    pub max_evaluations: usize,
    /// Simplex diameter below which the search is considered converged.
    pub x_tol: f64,
    /// Relative spread of function values below which the search is converged.
    pub f_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            initial_step: 0.5,
            max_evaluations: 500,
            x_tol: 1e-5,
            f_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexResult {
    pub angles: [f64; 2],
    pub value: f64,
    pub evaluations: usize,
    /// Evaluation count at which the returned point was first seen.
    pub evaluations_to_best: usize,
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    evals: usize,
    lo: f64,
    hi: f64,
}

impl<F: FnMut([f64; 2]) -> f64> Counted<F> {
    fn eval(&mut self, x: [f64; 2]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        self.lo = self.lo.min(v);
        self.hi = self.hi.max(v);
        v
    }
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Higher value first; ties go to the vertex found earlier.
fn rank(a: &([f64; 2], f64, usize), b: &([f64; 2], f64, usize)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then(a.2.cmp(&b.2))
}

/// Maximizes `objective` starting from `start`.
///
/// The result is flagged as not converged when the evaluation budget runs out
/// or when every evaluated point returned the same value.
pub fn simplex_precompensate<F>(
    objective: F,
    start: [f64; 2],
    opts: &SimplexOptions,
) -> SimplexResult
where
    F: FnMut([f64; 2]) -> f64,
{
    let mut f = Counted {
        f: objective,
        evals: 0,
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };
    let h = opts.initial_step;
    // vertices with the value to be maximized and the eval index it was found at
    let mut simplex: Vec<([f64; 2], f64, usize)> =
        [start, [start[0] + h, start[1]], [start[0], start[1] + h]]
            .into_iter()
            .map(|x| {
                let v = f.eval(x);
                (x, v, f.evals)
            })
            .collect();

    let mut converged = false;
    while f.evals < opts.max_evaluations {
        // best first
        simplex.sort_by(rank);
        let (best, worst) = (simplex[0], simplex[2]);
        let diameter = dist(simplex[0].0, simplex[1].0)
            .max(dist(simplex[0].0, simplex[2].0))
            .max(dist(simplex[1].0, simplex[2].0));
        let spread = best.1 - worst.1;
        if diameter < opts.x_tol && spread <= opts.f_tol * best.1.abs().max(1.0) {
            converged = true;
            break;
        }

        let centroid = lerp(simplex[0].0, simplex[1].0, 0.5);
        let reflected = lerp(centroid, worst.0, -1.0);
        let fr = f.eval(reflected);
        if fr > best.1 {
            let expanded = lerp(centroid, worst.0, -2.0);
            let fe = f.eval(expanded);
            simplex[2] = if fe > fr {
                (expanded, fe, f.evals)
            } else {
                (reflected, fr, f.evals - 1)
            };
            continue;
        }
        if fr > simplex[1].1 {
            simplex[2] = (reflected, fr, f.evals);
            continue;
        }
        let (contracted, fc, accept) = if fr > worst.1 {
            let x = lerp(centroid, reflected, 0.5);
            let fc = f.eval(x);
            (x, fc, fc >= fr)
        } else {
            let x = lerp(centroid, worst.0, 0.5);
            let fc = f.eval(x);
            (x, fc, fc > worst.1)
        };
        if accept {
            simplex[2] = (contracted, fc, f.evals);
            continue;
        }
        // shrink toward the best vertex
        for v in simplex.iter_mut().skip(1) {
            let x = lerp(best.0, v.0, 0.5);
            let fx = f.eval(x);
            *v = (x, fx, f.evals);
        }
    }

    simplex.sort_by(rank);
    let (x, v, at) = simplex[0];
    let flat = f.hi - f.lo <= 0.0;
    SimplexResult {
        angles: [wrap(x[0]), wrap(x[1])],
        value: v,
        evaluations: f.evals,
        evaluations_to_best: at,
        converged: converged && !flat,
    }
}
