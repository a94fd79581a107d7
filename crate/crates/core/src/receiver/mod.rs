//! Receiver-side processing: shot-noise calibration, per-frame phase
//! estimation and remapping, block mean removal and moment estimation, plus
//! the simplex loop for polarization pre-compensation.

pub mod calibration;
pub mod moments;
pub mod phase;
pub mod simplex;

pub use calibration::{calibrate, CalibrationResult};
pub use moments::{
    estimate_channel, estimate_moments, ChannelEstimate, MeasuredMoments, MomentSet,
};
pub use phase::{estimate_phase, remap};
pub use simplex::{simplex_precompensate, SimplexOptions, SimplexResult};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ProtocolParams;
use crate::simulator::{calibration_sign, PulseKind, PulseRecord};

/// Phase estimate and remapped pulses of one frame.
#[derive(Debug, Clone)]
pub struct RemappedFrame {
    pub frame_index: u64,
    pub phi_hat: f64,
    pub records: Vec<PulseRecord>,
}

/// Splits a record stream into frames, estimates each frame's phase from its
/// calibration slots and rotates the whole frame back.
pub fn remap_frames(
    records: &[PulseRecord],
    params: &ProtocolParams,
) -> Result<Vec<RemappedFrame>> {
    let frames = split_frames(records)?;
    frames
        .par_iter()
        .map(|frame| {
            let cal: Vec<PulseRecord> = frame
                .iter()
                .filter(|r| r.kind == PulseKind::Calibration)
                .copied()
                .collect();
            if cal.is_empty() {
                return Err(Error::InsufficientData(format!(
                    "frame {} has no calibration pulses",
                    frame[0].frame_index
                )));
            }
            let signs: Vec<f64> = cal
                .iter()
                .map(|r| calibration_sign(r.slot as usize))
                .collect();
            let phi_hat = estimate_phase(&cal, &signs, params.alpha_cal)?;
            Ok(RemappedFrame {
                frame_index: frame[0].frame_index,
                phi_hat,
                records: remap(frame, phi_hat),
            })
        })
        .collect()
}

fn split_frames(records: &[PulseRecord]) -> Result<Vec<&[PulseRecord]>> {
    let mut frames = Vec::new();
    let mut start = 0;
    for i in 1..=records.len() {
        if i == records.len() || records[i].frame_index != records[start].frame_index {
            frames.push(&records[start..i]);
            if i < records.len() && records[i].frame_index < records[start].frame_index {
                return Err(Error::InsufficientData(format!(
                    "frame indices not increasing at record {i}"
                )));
            }
            start = i;
        }
    }
    Ok(frames)
}

/// Full receiver chain from framed records to conditional intrinsic moments.
pub fn process(
    records: &[PulseRecord],
    cal: &CalibrationResult,
    params: &ProtocolParams,
) -> Result<(MomentSet, Vec<f64>)> {
    let frames = remap_frames(records, params)?;
    let phases: Vec<f64> = frames.iter().map(|f| f.phi_hat).collect();
    let remapped: Vec<PulseRecord> = frames.into_iter().flat_map(|f| f.records).collect();
    let moments = estimate_moments(&remapped, cal, params.block_size)?;
    Ok((moments, phases))
}
