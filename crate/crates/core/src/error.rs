use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode {0} is not registered")]
    UnknownMode(String),
    #[error("mode {0} is registered twice")]
    DuplicateMode(String),
    #[error("loss-sink mode {0} cannot take part in an optical element")]
    SinkInput(String),
    #[error("sink mode {0} already holds photons")]
    SinkOccupied(String),
    #[error("mode {mode} is not in the basis expected by {element}")]
    Basis { mode: String, element: &'static str },
    #[error("{photons} photons in arm {arm}: beyond the two-photon blockade model")]
    TooManyPhotons { arm: String, photons: u32 },
    #[error("phase {phi} is unreachable for OD_b = {od_b} (needs |phi| <= OD_b/4)")]
    UnreachablePhase { phi: f64, od_b: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
