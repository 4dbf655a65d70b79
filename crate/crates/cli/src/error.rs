use std::fmt;

use qst_core::QstError;
use serde::Serialize;

/// Failure record written to stderr as one JSON line.
#[derive(Debug, Serialize)]
pub struct CliError {
    pub error: &'static str,
    pub message: String,
    #[serde(skip)]
    pub code: u8,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { error: "usage", message: message.into(), code: 2 }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self { error: "invalid-config", message: message.into(), code: 2 }
    }

    pub fn checks_failed(message: impl Into<String>) -> Self {
        Self { error: "checks-failed", message: message.into(), code: 1 }
    }

    pub fn report(&self) {
        #[derive(Serialize)]
        struct Record<'a> {
            tool: &'static str,
            version: &'static str,
            #[serde(flatten)]
            inner: &'a CliError,
        }
        let rec = Record { tool: "qst", version: env!("CARGO_PKG_VERSION"), inner: self };
        match serde_json::to_string(&rec) {
            Ok(line) => eprintln!("{line}"),
            Err(_) => eprintln!("{self}"),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.error, self.message)
    }
}

impl From<QstError> for CliError {
    fn from(e: QstError) -> Self {
        let (error, code) = match e {
            QstError::DegenerateGap(_)
            | QstError::NonConvergent(_)
            | QstError::EigenNoConvergence(_)
            | QstError::ZeroVector => ("numeric-failure", 3),
            QstError::Config(_) => ("invalid-config", 2),
            _ => ("invalid-input", 2),
        };
        Self { error, message: e.to_string(), code }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self { error: "io", message: e.to_string(), code: 4 }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self { error: "io", message: e.to_string(), code: 4 }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self { error: "io", message: e.to_string(), code: 4 }
    }
}

pub type CliResult<T> = Result<T, CliError>;
