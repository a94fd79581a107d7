use thiserror::Error;

/// Errors raised across the simulation, estimation and witnessing layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unphysical data: {0}")]
    UnphysicalData(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("phase unresolvable: calibration pulses carry no amplitude")]
    PhaseUnresolvable,

    #[error("attenuation unidentifiable for zero signal amplitude")]
    AttenuationUnidentifiable,

    #[error("invalid moments: {0}")]
    InvalidMoments(String),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::Precondition(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
