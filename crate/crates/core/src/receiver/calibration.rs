use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulator::PulseRecord;

/// Minimum number of blocked-signal pulses accepted by [`calibrate`].
pub const MIN_CALIBRATION_PULSES: usize = 10_000;

/// Pulses per sub-block when searching for the worst-case reduction term.
pub const CALIBRATION_SUB_BLOCK: usize = 1024;

/// Detector gains from the blocked-signal run plus the worst-case shift of the
/// `<S1>` bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub gain_s2: f64,
    pub gain_s3: f64,
    /// Mean LO monitor reading during calibration (photons).
    pub lo_ref: f64,
    /// Largest `(<S2^2> + <S3^2>) / <n_LO>` over sub-blocks, divided by `lo_ref`.
    pub snl_reduction_worst: f64,
    /// Variances before gain normalization.
    pub raw_var_s2: f64,
    pub raw_var_s3: f64,
    pub n_pulses: usize,
}

impl CalibrationResult {
    /// Identity calibration for data already in shot-noise units.
    pub fn unit(lo_ref: f64) -> Self {
        Self {
            gain_s2: 1.0,
            gain_s3: 1.0,
            lo_ref,
            snl_reduction_worst: crate::witness::DEFAULT_SNL_SHIFT,
            raw_var_s2: 1.0,
            raw_var_s3: 1.0,
            n_pulses: 0,
        }
    }

    pub fn apply(&self, s2: f64, s3: f64) -> (f64, f64) {
        (self.gain_s2 * s2, self.gain_s3 * s3)
    }
}

fn mean_var(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (n, s) = xs.clone().fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    let mean = s / n as f64;
    let ss: f64 = xs.map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n as f64 - 1.0))
}

/// Fixes the per-component gains so that the blocked-signal variance maps to
/// one shot-noise unit, and evaluates the worst-case reduction term of the
/// `<S1>` bound.
pub fn calibrate(blocked: &[PulseRecord]) -> Result<CalibrationResult> {
    if blocked.len() < MIN_CALIBRATION_PULSES {
        return Err(Error::InsufficientData(format!(
            "calibration needs >= {MIN_CALIBRATION_PULSES} blocked pulses, got {}",
            blocked.len()
        )));
    }
    let (_, var2) = mean_var(blocked.iter().map(|r| r.s2_meas));
    let (_, var3) = mean_var(blocked.iter().map(|r| r.s3_meas));
    if !(var2 > 0.0 && var3 > 0.0) {
        return Err(Error::UnphysicalData(
            "blocked-signal variance is zero".into(),
        ));
    }
    let gain_s2 = 1.0 / var2.sqrt();
    let gain_s3 = 1.0 / var3.sqrt();
    let lo_ref = blocked.iter().map(|r| r.lo_monitor).sum::<f64>() / blocked.len() as f64;

    // Stokes outcomes rescaled to photon units: S_i = s_i sqrt(n_LO)
    let worst = blocked
        .chunks(CALIBRATION_SUB_BLOCK)
        .map(|block| {
            let mut sq = 0.0;
            let mut lo = 0.0;
            for r in block {
                let (s2, s3) = (gain_s2 * r.s2_meas, gain_s3 * r.s3_meas);
                sq += (s2 * s2 + s3 * s3) * r.lo_monitor;
                lo += r.lo_monitor;
            }
            sq / lo
        })
        .fold(0.0f64, f64::max);

    Ok(CalibrationResult {
        gain_s2,
        gain_s3,
        lo_ref,
        snl_reduction_worst: worst / lo_ref,
        raw_var_s2: var2,
        raw_var_s3: var3,
        n_pulses: blocked.len(),
    })
}
