use std::fmt;
use std::path::Path;

use regimelab::RegimeError;

pub const EXIT_IO: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_SCHEMA: u8 = 3;
pub const EXIT_CALIBRATION: u8 = 4;
pub const EXIT_NUMERIC: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, message)
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::new(EXIT_IO, format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<RegimeError> for CliError {
    fn from(e: RegimeError) -> Self {
        let code = match &e {
            RegimeError::Io(_) => EXIT_IO,
            RegimeError::Domain(_) | RegimeError::Parameter(_) | RegimeError::Kink { .. } => EXIT_USAGE,
            RegimeError::Parse(_) | RegimeError::Schema { .. } | RegimeError::Order(_) | RegimeError::Shape(_) => {
                EXIT_SCHEMA
            }
            RegimeError::CalibrationUnavailable => EXIT_CALIBRATION,
            RegimeError::Numeric { .. } => EXIT_NUMERIC,
        };
        Self::new(code, e.to_string())
    }
}
