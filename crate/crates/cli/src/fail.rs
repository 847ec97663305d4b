use std::fmt;

use bayes_series::Error;

/// Process exit codes.
pub mod code {
    pub const USAGE: u8 = 2;
    pub const INPUT: u8 = 3;
    pub const NUMERIC: u8 = 4;
    pub const OUTPUT: u8 = 5;
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: code::USAGE,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: code::INPUT,
            message: message.into(),
        }
    }

    pub fn output(message: impl Into<String>) -> Self {
        CliError {
            code: code::OUTPUT,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Domain(_) | Error::Precondition(_) | Error::NoData | Error::OutOfRange { .. } => code::USAGE,
            Error::MissingReference { .. }
            | Error::TableTooShort { .. }
            | Error::BadMagic { .. }
            | Error::VersionMismatch { .. }
            | Error::Truncated { .. }
            | Error::Corrupt { .. }
            | Error::Io(_) => code::INPUT,
            Error::NonFinite { .. } | Error::PrecisionLoss { .. } | Error::Overflow(_) => code::NUMERIC,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}
