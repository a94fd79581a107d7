//! Tolerable-noise threshold curves and confidence-adjusted verdicts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evm::{build_evm, EvmInstance};
use crate::feasibility::{separability_feasible, DEFAULT_TOL};
use crate::receiver::{estimate_channel, CalibrationResult, MomentSet};
use crate::stokes::StokesMoments;

/// Bound shift applied when no blocked-signal calibration is available.
pub const DEFAULT_SNL_SHIFT: f64 = 1e-3;

/// Bisection stops once the bracket is narrower than this.
pub const BISECTION_WIDTH: f64 = 5e-5;

/// Largest excess variance probed when bracketing the threshold.
const MAX_BRACKET_EXCESS: f64 = 64.0;

/// Conditional moments of the symmetric-noise model: means `±2 sqrt(eta) alpha`
/// along `s2`, variance `v` on both components, no correlation.
pub fn symmetric_noise_moments(
    alpha: f64,
    eta: f64,
    v: f64,
    n_lo: f64,
) -> Result<[StokesMoments; 2]> {
    let mu = 2.0 * eta.sqrt() * alpha;
    Ok([
        StokesMoments::from_centered(mu, 0.0, v, v, 0.0, n_lo)?,
        StokesMoments::from_centered(-mu, 0.0, v, v, 0.0, n_lo)?,
    ])
}

pub fn symmetric_noise_instance(alpha: f64, eta: f64, v: f64, n_lo: f64) -> Result<EvmInstance> {
    EvmInstance::from_moments(&symmetric_noise_moments(alpha, eta, v, n_lo)?, alpha, n_lo)
}

fn entangled_at(alpha: f64, eta: f64, v: f64, n_lo: f64, tol: f64) -> Result<bool> {
    Ok(!separability_feasible(&symmetric_noise_instance(alpha, eta, v, n_lo)?, tol).feasible)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    /// Largest intrinsic variance found infeasible, or 0 when not certifiable.
    pub variance: f64,
    pub certifiable: bool,
    /// Smallest variance found feasible.
    pub feasible_above: f64,
}

/// Largest symmetric intrinsic variance for which the data still certify
/// entanglement.
pub fn tolerable_variance_threshold(
    alpha: f64,
    eta: f64,
    n_lo: f64,
    tol: f64,
) -> Result<Threshold> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be > 0, got {alpha}")));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain(format!("eta must lie in (0, 1], got {eta}")));
    }
    let mut lo = 1.0;
    if !entangled_at(alpha, eta, lo, n_lo, tol)? {
        return Ok(Threshold {
            variance: 0.0,
            certifiable: false,
            feasible_above: lo,
        });
    }
    let mut step = 0.5;
    let mut hi = lo + step;
    while entangled_at(alpha, eta, hi, n_lo, tol)? {
        lo = hi;
        step *= 2.0;
        if step > MAX_BRACKET_EXCESS {
            return Err(Error::Precondition(format!(
                "no separable completion found up to variance {hi} (alpha {alpha}, eta {eta})"
            )));
        }
        hi = 1.0 + step;
    }
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if entangled_at(alpha, eta, mid, n_lo, tol)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold {
        variance: lo,
        certifiable: true,
        feasible_above: hi,
    })
}

/// One row of a threshold table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub alpha: f64,
    pub eta: f64,
    pub threshold_variance: f64,
    pub certifiable: bool,
}

/// Thresholds over an `eta x alpha` grid, computed in parallel; rows are
/// ordered by `eta` then `alpha` as given.
pub fn threshold_table(alphas: &[f64], etas: &[f64], n_lo: f64) -> Result<Vec<ThresholdPoint>> {
    if alphas.is_empty() || etas.is_empty() {
        return Err(Error::Config("threshold grids must be non-empty".into()));
    }
    let grid: Vec<(f64, f64)> = etas
        .iter()
        .flat_map(|&e| alphas.iter().map(move |&a| (a, e)))
        .collect();
    grid.par_iter()
        .map(|&(alpha, eta)| {
            let t = tolerable_variance_threshold(alpha, eta, n_lo, DEFAULT_TOL)?;
            Ok(ThresholdPoint {
                alpha,
                eta,
                threshold_variance: t.variance,
                certifiable: t.certifiable,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessVerdict {
    pub entangled: bool,
    /// Smallest-eigenvalue violation at the best completion of the measured
    /// matrix (0 when a separable completion exists).
    pub feasibility_residual: f64,
    /// Whether the measured matrix itself admits no separable completion.
    pub evm_infeasible: bool,
    /// Tolerable intrinsic variance at the estimated transmission.
    pub bound_variance: f64,
    pub certifiable: bool,
    pub margin_3sigma: f64,
    pub snl_shift: f64,
    /// Average intrinsic variance compared against the bound.
    pub intrinsic_variance: f64,
    /// Average variance of the calibrated double-homodyne outcomes.
    pub measured_variance: f64,
    pub eta_hat: f64,
    pub excess_hat: f64,
}

/// Compares the measured noise against the shifted threshold.
///
/// The margin propagates the relative LO power fluctuation to the intrinsic
/// variance: calibrated outcomes scale with `1/sqrt(n_LO)`, so a relative error
/// `d` in the LO reference changes the measured variance by `d * V_meas` and
/// the intrinsic one by twice that.
pub fn witness_decision(
    m: &MomentSet,
    alpha: f64,
    n_lo: f64,
    cal: Option<&CalibrationResult>,
) -> Result<WitnessVerdict> {
    m.validate()?;
    let ch = estimate_channel(m, alpha)?;
    if !(ch.eta_hat > 0.0) {
        return Err(Error::UnphysicalData(format!(
            "estimated transmission {} is not positive",
            ch.eta_hat
        )));
    }
    let eta = ch.eta_hat.min(1.0);
    let threshold = tolerable_variance_threshold(alpha, eta, n_lo, DEFAULT_TOL)?;
    let snl_shift = cal.map_or(DEFAULT_SNL_SHIFT, |c| c.snl_reduction_worst);
    let measured_variance = m.average_measured_variance();
    let margin_3sigma = 3.0 * m.lo_relative_std() * 2.0 * measured_variance;
    let intrinsic_variance = m.average_intrinsic_variance();
    let direct = separability_feasible(&build_evm(m, alpha, n_lo)?, DEFAULT_TOL);
    let entangled = threshold.certifiable
        && intrinsic_variance < threshold.variance - snl_shift - margin_3sigma;
    Ok(WitnessVerdict {
        entangled,
        feasibility_residual: direct.residual,
        evm_infeasible: !direct.feasible,
        bound_variance: threshold.variance,
        certifiable: threshold.certifiable,
        margin_3sigma,
        snl_shift,
        intrinsic_variance,
        measured_variance,
        eta_hat: ch.eta_hat,
        excess_hat: ch.excess_hat,
    })
}
