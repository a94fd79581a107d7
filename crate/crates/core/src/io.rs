//! Pulse datasets, run configuration and report serialization.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelModel, ProtocolParams};
use crate::simulator::{PulseKind, PulseRecord};

pub const CSV_HEADER: [&str; 7] = ["frame", "slot", "kind", "bit", "s2", "s3", "lo_monitor"];

/// Nine significant digits in scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{x:.8e}")
}

fn csv_err(e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            row,
            message: format!("{kind:?}"),
        },
    }
}

pub fn write_pulses<W: Write>(w: W, records: &[PulseRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        wr.write_record([
            r.frame_index.to_string(),
            r.slot.to_string(),
            r.kind.as_str().to_string(),
            r.bit.to_string(),
            format_float(r.s2_meas),
            format_float(r.s3_meas),
            format_float(r.lo_monitor),
        ])
        .map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, row: usize) -> Result<T> {
    let raw = rec.get(i).ok_or_else(|| Error::Parse {
        row,
        message: format!("missing column {}", CSV_HEADER[i]),
    })?;
    raw.trim().parse().map_err(|_| Error::Parse {
        row,
        message: format!("bad value {raw:?} in column {}", CSV_HEADER[i]),
    })
}

/// Parses a pulse dataset. Row numbers in errors are 1-based file lines.
pub fn read_pulses<R: Read>(r: R) -> Result<Vec<PulseRecord>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut records = Vec::new();
    let mut rows = rd.records();
    match rows.next() {
        Some(h) => {
            let h = h.map_err(csv_err)?;
            if h.iter().ne(CSV_HEADER) {
                return Err(Error::Parse {
                    row: 1,
                    message: format!(
                        "expected header {}, got {}",
                        CSV_HEADER.join(","),
                        h.iter().collect::<Vec<_>>().join(",")
                    ),
                });
            }
        }
        None => {
            return Err(Error::Parse {
                row: 1,
                message: "empty dataset".into(),
            })
        }
    }
    for (k, rec) in rows.enumerate() {
        let row = k + 2;
        let rec = rec.map_err(csv_err)?;
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::Parse {
                row,
                message: format!("expected {} columns, got {}", CSV_HEADER.len(), rec.len()),
            });
        }
        let kind = match &rec[2] {
            "cal" => PulseKind::Calibration,
            "sig" => PulseKind::Signal,
            other => {
                return Err(Error::Parse {
                    row,
                    message: format!("unknown pulse kind {other:?}"),
                })
            }
        };
        let bit: u8 = field(&rec, 3, row)?;
        if bit > 1 {
            return Err(Error::Parse {
                row,
                message: format!("bit must be 0 or 1, got {bit}"),
            });
        }
        let rec = PulseRecord {
            frame_index: field(&rec, 0, row)?,
            slot: field(&rec, 1, row)?,
            kind,
            bit,
            s2_meas: field(&rec, 4, row)?,
            s3_meas: field(&rec, 5, row)?,
            lo_monitor: field(&rec, 6, row)?,
        };
        if !(rec.s2_meas.is_finite() && rec.s3_meas.is_finite() && rec.lo_monitor.is_finite()) {
            return Err(Error::Parse {
                row,
                message: "non-finite value".into(),
            });
        }
        records.push(rec);
    }
    Ok(records)
}

pub fn save_pulses(path: &Path, records: &[PulseRecord]) -> Result<()> {
    write_pulses(BufWriter::new(File::create(path)?), records)
}

pub fn load_pulses(path: &Path) -> Result<Vec<PulseRecord>> {
    read_pulses(BufReader::new(File::open(path)?))
}

/// Blocked-signal dataset written next to a pulse dataset:
/// `run.csv` -> `run.snl.csv`.
pub fn snl_sibling(dataset: &Path) -> PathBuf {
    let stem = dataset
        .file_stem()
        .map_or_else(|| "pulses".into(), |s| s.to_string_lossy().into_owned());
    dataset.with_file_name(format!("{stem}.snl.csv"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    BackToBack,
    #[serde(rename = "fiber_2km")]
    Fiber2km,
    Custom,
}

impl Preset {
    pub fn channel(self) -> ChannelModel {
        match self {
            Preset::BackToBack | Preset::Custom => ChannelModel::back_to_back(),
            Preset::Fiber2km => ChannelModel::fiber_2km(),
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "back_to_back" => Ok(Preset::BackToBack),
            "fiber_2km" => Ok(Preset::Fiber2km),
            "custom" => Ok(Preset::Custom),
            other => Err(Error::Config(format!(
                "unknown preset {other:?} (expected back_to_back, fiber_2km or custom)"
            ))),
        }
    }
}

/// Channel fields that may be set on top of a preset. Transmissions can only
/// be changed with the `custom` preset.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelOverrides {
    pub eta_channel: Option<f64>,
    pub eta_detector: Option<f64>,
    pub excess_noise: Option<f64>,
    pub phase_drift_std_per_frame: Option<f64>,
    pub lo_relative_std: Option<f64>,
    pub electronic_noise_var: Option<f64>,
    pub quadrature_skew: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputPaths {
    pub dataset: PathBuf,
    /// Blocked-signal dataset; defaults to the sibling of `dataset`.
    pub snl: Option<PathBuf>,
    /// JSON report of `analyze` / `witness`.
    pub report: Option<PathBuf>,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self {
            dataset: PathBuf::from("pulses.csv"),
            snl: None,
            report: None,
        }
    }
}

impl OutputPaths {
    pub fn snl_path(&self) -> PathBuf {
        self.snl
            .clone()
            .unwrap_or_else(|| snl_sibling(&self.dataset))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub preset: Preset,
    pub params: ProtocolParams,
    pub channel: ChannelOverrides,
    pub n_frames: usize,
    pub seed: u64,
    /// Pulses in the blocked-signal calibration run.
    pub snl_pulses: usize,
    pub output: OutputPaths,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: Preset::BackToBack,
            params: ProtocolParams::default(),
            channel: ChannelOverrides::default(),
            n_frames: 100_000,
            seed: 7,
            snl_pulses: 1_000_000,
            output: OutputPaths::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Preset channel with overrides applied.
    pub fn channel_model(&self) -> Result<ChannelModel> {
        let o = &self.channel;
        if self.preset != Preset::Custom && (o.eta_channel.is_some() || o.eta_detector.is_some()) {
            return Err(Error::Config(
                "transmissions are fixed by the preset; use preset \"custom\" to set them".into(),
            ));
        }
        let mut ch = self.preset.channel();
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut ch.eta_channel, o.eta_channel);
        set(&mut ch.eta_detector, o.eta_detector);
        set(&mut ch.excess_noise, o.excess_noise);
        set(
            &mut ch.phase_drift_std_per_frame,
            o.phase_drift_std_per_frame,
        );
        set(&mut ch.lo_relative_std, o.lo_relative_std);
        set(&mut ch.electronic_noise_var, o.electronic_noise_var);
        set(&mut ch.quadrature_skew, o.quadrature_skew);
        ch.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(ch)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_frames == 0 {
            return Err(Error::Config("n_frames must be >= 1".into()));
        }
        self.params
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.channel_model()?;
        Ok(())
    }
}

/// Writes `value` as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| Error::Io(e.into()))?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}
