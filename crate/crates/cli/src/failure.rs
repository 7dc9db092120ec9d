//! Error reporting: exit codes and JSON on stderr.

use std::process::ExitCode;

use homothetic::expr::{EvalError, ParseError};
use homothetic::Error;
use serde::Serialize;
use serde_json::Value;

use crate::report::{Report, SCHEMA_VERSION};

/// Bad arguments or unusable input.
pub const EXIT_USAGE: u8 = 2;
/// Flat but no classification case verifies.
pub const EXIT_INCONSISTENT: u8 = 3;
/// A tolerance or analytic prediction failed.
pub const EXIT_TOLERANCE: u8 = 4;

#[derive(Debug, Serialize)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Value>,
    pub exit_code: u8,
    /// Full report written alongside the error, if any.
    #[serde(skip)]
    pub report: Option<Box<Report>>,
}

impl Failure {
    pub fn new(kind: &'static str, message: impl Into<String>, exit_code: u8) -> Self {
        Self {
            kind,
            message: message.into(),
            column: None,
            evidence: None,
            exit_code,
            report: None,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new("UsageError", message, EXIT_USAGE)
    }

    pub fn io(e: std::io::Error, path: &std::path::Path) -> Self {
        Self::new("IoError", format!("{}: {e}", path.display()), EXIT_USAGE)
    }

    pub fn with_evidence(mut self, evidence: Value) -> Self {
        self.evidence = Some(evidence);
        self
    }

    pub fn with_report(mut self, report: Report) -> Self {
        self.report = Some(Box::new(report));
        self
    }

    pub fn emit(&self) -> ExitCode {
        let body = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "error": self,
        });
        eprintln!(
            "{}",
            serde_json::to_string_pretty(&body).expect("error serializes")
        );
        ExitCode::from(self.exit_code)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match &e {
            Error::Parse(p) => {
                let kind = match p {
                    ParseError::Syntax { .. } | ParseError::Empty => "SyntaxError",
                    ParseError::UnknownIdentifier { .. } => "UnknownIdentifier",
                    ParseError::Arity { .. } => "ArityError",
                };
                Failure {
                    column: p.position(),
                    ..Failure::new(kind, message, EXIT_USAGE)
                }
            }
            Error::Eval(EvalError::Domain { .. } | EvalError::DerivativeSingularity { .. }) => {
                Failure::new("DomainError", message, EXIT_USAGE)
            }
            Error::Inconsistent(_) => Failure::new("Inconsistent", message, EXIT_INCONSISTENT),
            Error::Mismatch(_) => Failure::new("Mismatch", message, EXIT_TOLERANCE),
            _ => Failure::new("InvalidInput", message, EXIT_USAGE),
        }
    }
}
