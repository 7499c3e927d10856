use thiserror::Error;

use crate::jets::JetError;

#[derive(Debug, Error)]
pub enum HcfError {
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("metric degenerate: min eigenvalue {min_eig:.3e} below floor {floor:.3e}")]
    DegenerateMetric { min_eig: f64, floor: f64 },
    #[error("point outside chart domain")]
    OutsideDomain,
    #[error("structural error: {0}")]
    Structural(String),
    #[error("unknown metric '{0}'")]
    UnknownMetric(String),
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("flow blowup at t = {t:.6}: {reason}")]
    Blowup { t: f64, reason: String },
    #[error("right-hand side left the ansatz family: projection residual {residual:.3e}")]
    AnsatzEscape { residual: f64 },
    #[error("transport failed at parameter s = {s:.6}: {reason}")]
    Transport { s: f64, reason: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HcfError>;
