use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{quantity}: {message}")]
    Domain {
        quantity: &'static str,
        message: String,
    },

    #[error("{value} is outside the tabulated range [{min}, {max}] ({axis})")]
    OutOfDomain {
        axis: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("emerged power {p_e} mW is below the reference {p_ref} mW; no range extension")]
    NoExtension { p_e: f64, p_ref: f64 },

    #[error("target range {target_m} m is infeasible; best achievable is {best_m:.4} m at {best_field_v_per_um} V/um")]
    Infeasible {
        target_m: f64,
        best_m: f64,
        best_field_v_per_um: f64,
    },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: row {row}: {message}")]
    Row {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("unknown device '{0}' (expected an embedded id or a curve CSV path)")]
    UnknownDevice(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse classification, used for CLI exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Domain,
    Data,
    Io,
}

impl Error {
    pub(crate) fn domain(quantity: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            quantity,
            message: message.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Domain { .. }
            | Error::OutOfDomain { .. }
            | Error::NoExtension { .. }
            | Error::Infeasible { .. }
            | Error::Fit(_) => ErrorKind::Domain,
            Error::Format { .. } | Error::Row { .. } | Error::UnknownDevice(_) => ErrorKind::Data,
            Error::Io { .. } => ErrorKind::Io,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
