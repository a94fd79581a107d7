use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::receiver::calibration::CalibrationResult;
use crate::simulator::{PulseKind, PulseRecord};
use crate::stokes::{heterodyne_to_intrinsic, StokesMoments};

/// Raw double-homodyne statistics of one signal state, after gain
/// normalization and block centering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredMoments {
    pub mean_s2: f64,
    pub mean_s3: f64,
    pub var_s2: f64,
    pub var_s3: f64,
    pub cov: f64,
    pub count: usize,
}

/// Conditional intrinsic Stokes moments for both signal states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    /// Indexed by preparation bit.
    pub states: [StokesMoments; 2],
    pub measured: [MeasuredMoments; 2],
    pub n_pulses_used: usize,
    pub n_dropped: usize,
    pub lo_mean: f64,
    pub lo_std: f64,
}

impl MomentSet {
    /// Average intrinsic variance over both components and both states.
    pub fn average_intrinsic_variance(&self) -> f64 {
        self.states
            .iter()
            .map(|m| m.var_s2() + m.var_s3())
            .sum::<f64>()
            / 4.0
    }

    pub fn average_measured_variance(&self) -> f64 {
        self.measured
            .iter()
            .map(|m| m.var_s2 + m.var_s3)
            .sum::<f64>()
            / 4.0
    }

    pub fn lo_relative_std(&self) -> f64 {
        self.lo_std / self.lo_mean
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pulses_used == 0 {
            return Err(Error::InvalidMoments("no pulses used".into()));
        }
        self.states.iter().try_for_each(StokesMoments::validate)
    }
}

#[derive(Default, Clone, Copy)]
struct Accumulator {
    n: usize,
    sx: f64,
    sy: f64,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl Accumulator {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.syy += y * y;
        self.sxy += x * y;
    }

    fn finish(&self) -> MeasuredMoments {
        let n = self.n as f64;
        let (mx, my) = (self.sx / n, self.sy / n);
        let dof = n - 1.0;
        MeasuredMoments {
            mean_s2: mx,
            mean_s3: my,
            var_s2: (self.sxx - n * mx * mx) / dof,
            var_s3: (self.syy - n * my * my) / dof,
            cov: (self.sxy - n * mx * my) / dof,
            count: self.n,
        }
    }
}

/// Conditional moments from remapped signal pulses.
///
/// Outcomes are gain-normalized, centered on the unconditional mean of each
/// `block_size` run of signal pulses, split by preparation bit, and converted
/// to intrinsic moments. A trailing partial block is dropped. Block centering
/// is undone in expectation by the factor `block_size / (block_size - 1)`.
pub fn estimate_moments(
    records: &[PulseRecord],
    cal: &CalibrationResult,
    block_size: usize,
) -> Result<MomentSet> {
    if block_size < 2 {
        return Err(Error::Precondition("block_size must be at least 2".into()));
    }
    let signal: Vec<&PulseRecord> = records
        .iter()
        .filter(|r| r.kind == PulseKind::Signal)
        .collect();
    let n_blocks = signal.len() / block_size;
    let used = n_blocks * block_size;
    let n_dropped = signal.len() - used;
    if n_dropped > 0 {
        log::warn!("dropping {n_dropped} signal pulses of a partial trailing block");
    }
    if n_blocks == 0 {
        return Err(Error::InsufficientData(format!(
            "{} signal pulses do not fill one block of {block_size}",
            signal.len()
        )));
    }

    let mut acc = [Accumulator::default(); 2];
    let (mut lo_sum, mut lo_sq) = (0.0, 0.0);
    for block in signal[..used].chunks_exact(block_size) {
        let calibrated: Vec<(f64, f64)> = block
            .iter()
            .map(|r| cal.apply(r.s2_meas, r.s3_meas))
            .collect();
        let n = block_size as f64;
        let m2 = calibrated.iter().map(|c| c.0).sum::<f64>() / n;
        let m3 = calibrated.iter().map(|c| c.1).sum::<f64>() / n;
        for (r, (s2, s3)) in block.iter().zip(calibrated) {
            acc[usize::from(r.bit.min(1))].push(s2 - m2, s3 - m3);
            lo_sum += r.lo_monitor;
            lo_sq += r.lo_monitor * r.lo_monitor;
        }
    }
    for (bit, a) in acc.iter().enumerate() {
        if a.n < 2 {
            return Err(Error::InsufficientData(format!(
                "signal state {bit} has {} usable pulses",
                a.n
            )));
        }
    }
    let lo_mean = lo_sum / used as f64;
    let lo_var =
        ((lo_sq - used as f64 * lo_mean * lo_mean) / (used as f64 - 1.0).max(1.0)).max(0.0);

    // centering on the block mean removes 1/block_size of each pulse's variance
    let bessel = block_size as f64 / (block_size as f64 - 1.0);
    let measured = acc.map(|a| {
        let m = a.finish();
        MeasuredMoments {
            var_s2: m.var_s2 * bessel,
            var_s3: m.var_s3 * bessel,
            cov: m.cov * bessel,
            ..m
        }
    });
    let mut states = Vec::with_capacity(2);
    for m in &measured {
        let (mean2, var2) = heterodyne_to_intrinsic(m.mean_s2, m.var_s2)?;
        let (mean3, var3) = heterodyne_to_intrinsic(m.mean_s3, m.var_s3)?;
        // vacuum contributions are independent between the two detectors
        let cov = 2.0 * m.cov;
        states.push(StokesMoments::from_centered(
            mean2, mean3, var2, var3, cov, lo_mean,
        )?);
    }
    Ok(MomentSet {
        states: [states[0], states[1]],
        measured,
        n_pulses_used: used,
        n_dropped,
        lo_mean,
        lo_std: lo_var.sqrt(),
    })
}

/// Channel transmission and excess noise inferred from conditional moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelEstimate {
    pub eta_hat: f64,
    pub excess_hat: f64,
}

/// Inverts the intrinsic mean `2 sqrt(eta) alpha` and reads the excess noise off
/// the average intrinsic variance.
pub fn estimate_channel(m: &MomentSet, alpha: f64) -> Result<ChannelEstimate> {
    if !(alpha > 0.0) {
        return Err(Error::AttenuationUnidentifiable);
    }
    let half_sep = 0.5 * (m.states[0].mean_s2 - m.states[1].mean_s2);
    let root_eta = half_sep / (2.0 * alpha);
    Ok(ChannelEstimate {
        eta_hat: root_eta * root_eta,
        excess_hat: m.average_intrinsic_variance() - 1.0,
    })
}
