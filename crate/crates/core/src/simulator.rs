//! Monte Carlo generator for framed pulse outcomes.
//!
//! Each frame draws from its own ChaCha substream derived from
//! `(seed, frame_index)`; the first draw of the substream is that frame's phase
//! increment. Phases are accumulated by a sequential prefix sum, after which the
//! frames are generated in parallel. Output is bitwise independent of the
//! thread count.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angle::wrap;
use crate::error::{Error, Result};
use crate::model::{ChannelModel, ProtocolParams};

const BLOCKED_STREAM_BASE: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PulseKind {
    #[serde(rename = "cal")]
    Calibration,
    #[serde(rename = "sig")]
    Signal,
}

impl PulseKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PulseKind::Calibration => "cal",
            PulseKind::Signal => "sig",
        }
    }
}

/// One detected pulse: both measured Stokes components in calibrated units plus
/// the LO monitor reading in photons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseRecord {
    pub frame_index: u64,
    pub slot: u32,
    pub kind: PulseKind,
    /// Preparation label: 0 for `+amplitude`, 1 for `-amplitude`.
    pub bit: u8,
    pub s2_meas: f64,
    pub s3_meas: f64,
    pub lo_monitor: f64,
}

/// Interferometric phase of the current frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftState {
    pub phase: f64,
    pub frame_index: u64,
}

/// Sign of the calibration pulse in `slot`: alternating `+, -, +, -`.
pub fn calibration_sign(slot: usize) -> f64 {
    if slot.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn frame_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Seeded generator for one configured link.
#[derive(Debug, Clone, Copy)]
pub struct FrameSimulator {
    pub params: ProtocolParams,
    pub channel: ChannelModel,
    pub seed: u64,
}

impl FrameSimulator {
    pub fn new(params: ProtocolParams, channel: ChannelModel, seed: u64) -> Result<Self> {
        params.validate()?;
        channel.validate()?;
        Ok(Self {
            params,
            channel,
            seed,
        })
    }

    /// Wrapped interferometric phase of each frame.
    pub fn frame_phases(&self, n_frames: usize) -> Vec<f64> {
        let std = self.channel.phase_drift_std_per_frame;
        let increments: Vec<f64> = (0..n_frames as u64)
            .into_par_iter()
            .map(|k| std * normal(&mut frame_rng(self.seed, k)))
            .collect();
        let mut phase = 0.0;
        increments
            .iter()
            .map(|inc| {
                phase = wrap(phase + inc);
                phase
            })
            .collect()
    }

    pub fn drift_states(&self, n_frames: usize) -> Vec<DriftState> {
        self.frame_phases(n_frames)
            .into_iter()
            .enumerate()
            .map(|(k, phase)| DriftState {
                phase,
                frame_index: k as u64,
            })
            .collect()
    }

    fn noise_std(&self) -> f64 {
        (1.0 + 0.5 * self.channel.excess_noise + self.channel.electronic_noise_var).sqrt()
    }

    fn lo_reading(&self, rng: &mut ChaCha8Rng) -> f64 {
        let lo = self.params.n_lo * (1.0 + self.channel.lo_relative_std * normal(rng));
        lo.max(f64::MIN_POSITIVE)
    }

    fn frame(&self, k: u64, phase: f64) -> Vec<PulseRecord> {
        let p = &self.params;
        let mut rng = frame_rng(self.seed, k);
        // first draw was the drift increment
        let _: f64 = normal(&mut rng);
        let gain = (2.0 * self.channel.eta_effective()).sqrt();
        let (c2, c3) = (
            phase.cos(),
            (phase + FRAC_PI_2 + self.channel.quadrature_skew).cos(),
        );
        let sigma = self.noise_std();
        (0..p.frame_len())
            .map(|slot| {
                let (kind, bit, amp) = if slot < p.frame_cal_pulses {
                    let sign = calibration_sign(slot);
                    (
                        PulseKind::Calibration,
                        u8::from(sign < 0.0),
                        sign * p.alpha_cal,
                    )
                } else {
                    let bit: bool = rng.random();
                    (
                        PulseKind::Signal,
                        u8::from(bit),
                        if bit { -p.alpha } else { p.alpha },
                    )
                };
                let s2 = gain * amp * c2 + sigma * normal(&mut rng);
                let s3 = gain * amp * c3 + sigma * normal(&mut rng);
                PulseRecord {
                    frame_index: k,
                    slot: slot as u32,
                    kind,
                    bit,
                    s2_meas: s2,
                    s3_meas: s3,
                    lo_monitor: self.lo_reading(&mut rng),
                }
            })
            .collect()
    }

    /// Framed calibration and signal pulses through the configured channel.
    pub fn frames(&self, n_frames: usize) -> Result<Vec<PulseRecord>> {
        if n_frames == 0 {
            return Err(Error::Config("n_frames must be >= 1".into()));
        }
        let phases = self.frame_phases(n_frames);
        let frames: Vec<Vec<PulseRecord>> = phases
            .par_iter()
            .enumerate()
            .map(|(k, &phi)| self.frame(k as u64, phi))
            .collect();
        Ok(frames.concat())
    }

    /// Shot-noise calibration run: signal arm blocked, vacuum plus electronics.
    pub fn blocked(&self, n_pulses: usize) -> Result<Vec<PulseRecord>> {
        if n_pulses == 0 {
            return Err(Error::Config("n_pulses must be >= 1".into()));
        }
        let len = self.params.frame_len();
        let n_frames = n_pulses.div_ceil(len);
        let sigma = (1.0 + self.channel.electronic_noise_var).sqrt();
        let frames: Vec<Vec<PulseRecord>> = (0..n_frames as u64)
            .into_par_iter()
            .map(|k| {
                let mut rng = frame_rng(self.seed, BLOCKED_STREAM_BASE + k);
                let count = len.min(n_pulses - k as usize * len);
                (0..count)
                    .map(|slot| PulseRecord {
                        frame_index: k,
                        slot: slot as u32,
                        kind: if slot < self.params.frame_cal_pulses {
                            PulseKind::Calibration
                        } else {
                            PulseKind::Signal
                        },
                        bit: 0,
                        s2_meas: sigma * normal(&mut rng),
                        s3_meas: sigma * normal(&mut rng),
                        lo_monitor: self.lo_reading(&mut rng),
                    })
                    .collect()
            })
            .collect();
        Ok(frames.concat())
    }
}

pub fn simulate_frames(
    p: &ProtocolParams,
    ch: &ChannelModel,
    n_frames: usize,
    seed: u64,
) -> Result<Vec<PulseRecord>> {
    FrameSimulator::new(*p, *ch, seed)?.frames(n_frames)
}

pub fn simulate_blocked_signal(
    p: &ProtocolParams,
    ch: &ChannelModel,
    n_pulses: usize,
    seed: u64,
) -> Result<Vec<PulseRecord>> {
    FrameSimulator::new(*p, *ch, seed)?.blocked(n_pulses)
}

/// LO power on Bob's monitor diode as a function of the two polarization
/// pre-compensation angles. Malus-type response with a hidden optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationDrift {
    pub optimum: [f64; 2],
    pub n_lo: f64,
}

impl PolarizationDrift {
    pub fn new(optimum: [f64; 2], n_lo: f64) -> Self {
        Self { optimum, n_lo }
    }

    /// Optimum drawn uniformly from `[-pi, pi]^2`.
    pub fn random(n_lo: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pi = std::f64::consts::PI;
        Self {
            optimum: [rng.random_range(-pi..pi), rng.random_range(-pi..pi)],
            n_lo,
        }
    }

    pub fn power(&self, angles: [f64; 2]) -> f64 {
        let f = |a: f64, o: f64| 0.5 * (1.0 + (a - o).cos());
        self.n_lo * f(angles[0], self.optimum[0]) * f(angles[1], self.optimum[1])
    }
}

pub fn polarization_drift_power(drift: &PolarizationDrift, angles: [f64; 2]) -> f64 {
    drift.power(angles)
}
