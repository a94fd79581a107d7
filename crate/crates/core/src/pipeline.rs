//! End-to-end runs behind the command-line front end.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::angle::{circular_std, wrapped_differences};
use crate::error::{Error, Result};
use crate::io::{load_pulses, save_pulses, write_json, RunConfig};
use crate::model::ProtocolParams;
use crate::receiver::{
    calibrate, estimate_channel, process, CalibrationResult, ChannelEstimate, MomentSet,
};
use crate::simulator::{FrameSimulator, PulseRecord};
use crate::witness::{threshold_table, witness_decision, ThresholdPoint, WitnessVerdict};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub n_records: usize,
    pub n_snl_records: usize,
    pub lo_mean: f64,
    pub lo_relative_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub alpha: f64,
    pub n_frames: usize,
    pub calibration: Option<CalibrationResult>,
    pub moments: MomentSet,
    pub channel: ChannelEstimate,
    /// Standard deviation of the recovered frame-to-frame phase increments, degrees.
    pub recovered_drift_std_deg: f64,
    pub verdict: WitnessVerdict,
}

/// Simulated link data for one configuration.
pub struct SimulatedRun {
    pub records: Vec<PulseRecord>,
    pub snl: Vec<PulseRecord>,
}

pub fn simulate(cfg: &RunConfig) -> Result<SimulatedRun> {
    cfg.validate()?;
    let sim = FrameSimulator::new(cfg.params, cfg.channel_model()?, cfg.seed)?;
    let records = sim.frames(cfg.n_frames)?;
    let snl = if cfg.snl_pulses > 0 {
        sim.blocked(cfg.snl_pulses)?
    } else {
        Vec::new()
    };
    Ok(SimulatedRun { records, snl })
}

fn lo_stats(records: &[PulseRecord]) -> (f64, f64) {
    let n = records.len() as f64;
    let mean = records.iter().map(|r| r.lo_monitor).sum::<f64>() / n;
    let var = records
        .iter()
        .map(|r| (r.lo_monitor - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    (mean, var.sqrt() / mean)
}

/// Simulates and writes the pulse dataset and, when requested, the
/// blocked-signal dataset next to it.
pub fn run_simulate(cfg: &RunConfig) -> Result<SimulationSummary> {
    let run = simulate(cfg)?;
    save_pulses(&cfg.output.dataset, &run.records)?;
    if !run.snl.is_empty() {
        save_pulses(&cfg.output.snl_path(), &run.snl)?;
    }
    let (lo_mean, lo_relative_std) = lo_stats(&run.records);
    Ok(SimulationSummary {
        n_records: run.records.len(),
        n_snl_records: run.snl.len(),
        lo_mean,
        lo_relative_std,
    })
}

/// Receiver chain plus witness on in-memory records.
pub fn analyze(
    records: &[PulseRecord],
    snl: Option<&[PulseRecord]>,
    params: &ProtocolParams,
) -> Result<AnalysisReport> {
    if records.is_empty() {
        return Err(Error::InsufficientData("empty dataset".into()));
    }
    let calibration = snl.map(calibrate).transpose()?;
    let cal = calibration.unwrap_or_else(|| CalibrationResult::unit(lo_stats(records).0));
    let (moments, phases) = process(records, &cal, params)?;
    let channel = estimate_channel(&moments, params.alpha)?;
    let verdict = witness_decision(
        &moments,
        params.alpha,
        moments.lo_mean,
        calibration.as_ref(),
    )?;
    let drift = if phases.len() > 1 {
        circular_std(&wrapped_differences(&phases)).to_degrees()
    } else {
        0.0
    };
    Ok(AnalysisReport {
        alpha: params.alpha,
        n_frames: phases.len(),
        calibration,
        moments,
        channel,
        recovered_drift_std_deg: drift,
        verdict,
    })
}

/// Loads a dataset (plus its blocked-signal sibling when present), analyzes
/// it and writes the JSON report if an output path is configured.
pub fn run_analyze(dataset: &Path, cfg: &RunConfig) -> Result<AnalysisReport> {
    cfg.params
        .validate()
        .map_err(|e| Error::Config(e.to_string()))?;
    let records = load_pulses(dataset)?;
    let snl_path = cfg
        .output
        .snl
        .clone()
        .unwrap_or_else(|| crate::io::snl_sibling(dataset));
    let snl = if snl_path.exists() {
        Some(load_pulses(&snl_path)?)
    } else {
        log::warn!(
            "no blocked-signal data at {}; using the default bound shift",
            snl_path.display()
        );
        None
    };
    let report = analyze(&records, snl.as_deref(), &cfg.params)?;
    if let Some(path) = &cfg.output.report {
        write_json(path, &report)?;
    }
    Ok(report)
}

/// Simulation and analysis in one step, without touching the dataset files.
pub fn run_witness(cfg: &RunConfig) -> Result<AnalysisReport> {
    let run = simulate(cfg)?;
    let snl = (!run.snl.is_empty()).then_some(run.snl.as_slice());
    let report = analyze(&run.records, snl, &cfg.params)?;
    if let Some(path) = &cfg.output.report {
        write_json(path, &report)?;
    }
    Ok(report)
}

pub fn run_bounds(alphas: &[f64], etas: &[f64], n_lo: f64) -> Result<Vec<ThresholdPoint>> {
    threshold_table(alphas, etas, n_lo)
}

/// CSV with columns `alpha,eta,threshold_variance`; non-certifiable points
/// carry a threshold of 0.
pub fn write_bounds<W: Write>(mut w: W, table: &[ThresholdPoint]) -> Result<()> {
    writeln!(w, "alpha,eta,threshold_variance")?;
    for p in table {
        writeln!(w, "{},{},{:.6}", p.alpha, p.eta, p.threshold_variance)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_csv_layout() {
        let table = [ThresholdPoint {
            alpha: 0.3,
            eta: 1.0,
            threshold_variance: 1.498_25,
            certifiable: true,
        }];
        let mut out = Vec::new();
        write_bounds(&mut out, &table).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "alpha,eta,threshold_variance\n0.3,1,1.498250\n"
        );
    }

    #[test]
    fn zero_frames_is_config_error() {
        let cfg = RunConfig {
            n_frames: 0,
            ..RunConfig::default()
        };
        assert!(matches!(simulate(&cfg), Err(Error::Config(_))));
    }
}
