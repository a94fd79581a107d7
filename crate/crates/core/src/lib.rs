//! Two-state continuous-variable QKD with Stokes-operator detection.
//!
//! The crate simulates a polarization-encoded link (coherent states `|±alpha>`
//! co-propagating with a strong local oscillator), runs the receiver chain
//! (shot-noise calibration, per-frame phase tracking, moment estimation) and
//! decides whether the measured moments certify effective entanglement. The
//! witness builds an expectation value matrix over `{|0>,|1>} x {1, s2, s3}`
//! and asks whether any completion of its unknown entries is compatible with a
//! separable state, i.e. keeps the matrix and its partial transpose positive
//! semidefinite.
//!
//! The `examples/` directory walks through each stage:
//!
//! | example | stage |
//! |---|---|
//! | `stokes_identity` | operator identity checked in a truncated Fock space |
//! | `simulate_link` | framed pulse data through a lossy, drifting channel |
//! | `shot_noise_calibration` | detector gains and the `<S1>` bound shift |
//! | `phase_tracking` | phase recovery from calibration pulses |
//! | `polarization_simplex` | LO polarization pre-compensation |
//! | `threshold_curves` | tolerable-noise curves versus amplitude and loss |
//! | `back_to_back_witness` | full chain on the back-to-back preset |
//! | `fiber_cutoff` | amplitude cutoff over 2 km of fiber |

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angle;
pub mod error;
pub mod evm;
pub mod feasibility;
pub mod fock;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod receiver;
pub mod simulator;
pub mod stokes;
pub mod witness;

pub use error::{Error, Result};
pub use evm::{build_evm, partial_transpose, EvmInstance};
pub use feasibility::{separability_feasible, Feasibility};
pub use model::{ChannelModel, ProtocolParams};
pub use receiver::{CalibrationResult, MomentSet};
pub use simulator::{FrameSimulator, PulseKind, PulseRecord};
pub use stokes::StokesMoments;
pub use witness::{tolerable_variance_threshold, witness_decision, Threshold, WitnessVerdict};
