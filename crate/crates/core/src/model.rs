//! Physical parameters, unit conventions and the source model.
//!
//! Every variance handled by the crate is expressed in *calibrated units*: a
//! shot-noise-limited measurement (signal arm blocked) has variance exactly 1
//! per Stokes component. Excess noise is referenced to the channel output and
//! adds directly to the intrinsic (penalty-corrected) variance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum ratio between the LO photon number and the signal photon number.
pub const STRONG_LO_RATIO: f64 = 1e4;

/// Default frame layout: four calibration slots, 28 signal slots.
pub const DEFAULT_CAL_PULSES: usize = 4;
pub const DEFAULT_SIG_PULSES: usize = 28;

/// Sender-side protocol settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolParams {
    /// Signal coherent amplitude.
    pub alpha: f64,
    /// Amplitude of the bright calibration pulses.
    pub alpha_cal: f64,
    /// Mean LO photon number per pulse.
    pub n_lo: f64,
    pub frame_cal_pulses: usize,
    pub frame_sig_pulses: usize,
    /// Signal pulses per mean-removal block.
    pub block_size: usize,
    pub pulse_rate_hz: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            alpha_cal: 100.0,
            n_lo: 1e8,
            frame_cal_pulses: DEFAULT_CAL_PULSES,
            frame_sig_pulses: DEFAULT_SIG_PULSES,
            block_size: 1024,
            pulse_rate_hz: 1e6,
        }
    }
}

impl ProtocolParams {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    pub fn frame_len(&self) -> usize {
        self.frame_cal_pulses + self.frame_sig_pulses
    }

    /// Duration of one frame in seconds.
    pub fn frame_duration(&self) -> f64 {
        self.frame_len() as f64 / self.pulse_rate_hz
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Domain(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.alpha_cal >= 0.0 && self.alpha_cal.is_finite()) {
            return Err(Error::Domain(format!(
                "alpha_cal must be >= 0, got {}",
                self.alpha_cal
            )));
        }
        if !(self.n_lo > 0.0 && self.n_lo.is_finite()) {
            return Err(Error::Domain(format!(
                "n_lo must be > 0, got {}",
                self.n_lo
            )));
        }
        if self.n_lo < STRONG_LO_RATIO * self.alpha * self.alpha {
            return Err(Error::Domain(format!(
                "LO too weak: n_lo = {} < {} * alpha^2",
                self.n_lo, STRONG_LO_RATIO
            )));
        }
        if self.frame_cal_pulses == 0 || self.frame_sig_pulses == 0 {
            return Err(Error::Domain(
                "frame needs at least one calibration and one signal slot".into(),
            ));
        }
        if self.block_size < 2 {
            return Err(Error::Domain("block_size must be at least 2".into()));
        }
        if !(self.pulse_rate_hz > 0.0) {
            return Err(Error::Domain("pulse_rate_hz must be positive".into()));
        }
        Ok(())
    }
}

/// Parametric description of the fiber channel and the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelModel {
    pub eta_channel: f64,
    pub eta_detector: f64,
    /// Output-referred excess noise in shot-noise units (intrinsic variance above 1).
    pub excess_noise: f64,
    /// Standard deviation of the interferometric phase increment per frame, radians.
    pub phase_drift_std_per_frame: f64,
    /// Relative standard deviation of the per-pulse LO monitor reading.
    pub lo_relative_std: f64,
    /// Additive electronic noise variance per measured component (SNU).
    pub electronic_noise_var: f64,
    /// Deviation of the two measured quadratures from orthogonality, radians.
    pub quadrature_skew: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            eta_channel: 1.0,
            eta_detector: 0.70,
            excess_noise: 0.0,
            phase_drift_std_per_frame: 4f64.to_radians(),
            lo_relative_std: 6e-3,
            electronic_noise_var: 0.01,
            quadrature_skew: 0.0,
        }
    }
}

impl ChannelModel {
    /// Receiver connected directly to the sender (70 % detection efficiency).
    pub fn back_to_back() -> Self {
        Self::default()
    }

    /// 2 km fiber: 64 % channel transmission on top of the 70 % receiver.
    pub fn fiber_2km() -> Self {
        Self {
            eta_channel: 0.64,
            ..Self::default()
        }
    }

    /// Lossless, noiseless, drift-free link.
    pub fn ideal() -> Self {
        Self {
            eta_channel: 1.0,
            eta_detector: 1.0,
            excess_noise: 0.0,
            phase_drift_std_per_frame: 0.0,
            lo_relative_std: 0.0,
            electronic_noise_var: 0.0,
            quadrature_skew: 0.0,
        }
    }

    pub fn eta_effective(&self) -> f64 {
        self.eta_channel * self.eta_detector
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta_channel", self.eta_channel),
            ("eta_detector", self.eta_detector),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Domain(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        for (name, v) in [
            ("excess_noise", self.excess_noise),
            ("phase_drift_std_per_frame", self.phase_drift_std_per_frame),
            ("lo_relative_std", self.lo_relative_std),
            ("electronic_noise_var", self.electronic_noise_var),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !self.quadrature_skew.is_finite() {
            return Err(Error::Domain("quadrature_skew must be finite".into()));
        }
        Ok(())
    }
}

/// One conditional state pair `|±alpha>` of the entanglement-based source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceState {
    pub alpha: f64,
    /// `<-alpha|alpha>`.
    pub overlap: f64,
}

impl SourceState {
    pub fn new(alpha: f64) -> Result<Self> {
        Ok(Self {
            alpha,
            overlap: source_overlap(alpha)?,
        })
    }
}

/// Overlap `<-alpha|alpha> = exp(-2 alpha^2)` of the two signal states.
pub fn source_overlap(alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be >= 0, got {alpha}")));
    }
    Ok((-2.0 * alpha * alpha).exp())
}

/// Product of channel transmission and detector efficiency.
pub fn effective_transmission(ch: &ChannelModel) -> f64 {
    ch.eta_effective()
}
