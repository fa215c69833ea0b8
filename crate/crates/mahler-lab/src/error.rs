//! Command-line failures and their exit codes.

use thiserror::Error;

/// A failed run.
#[derive(Debug, Error)]
pub enum CliError {
    /// The subcommand is missing or not recognized.
    #[error("unknown command: {0}")]
    UnknownCommand(String),
    /// Flags or a body file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
    /// A body file parsed but describes an invalid body.
    #[error("invalid body: {0}")]
    InvalidBody(String),
    /// A verified inequality failed beyond its tolerance, or a numerical
    /// procedure could not certify its result.
    #[error("bound violated: {0}")]
    BoundViolated(String),
    /// Reading or writing a file failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit code.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::UnknownCommand(_) => 1,
            CliError::Parse(_) => 2,
            CliError::InvalidBody(_) => 3,
            CliError::BoundViolated(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl From<mahler_core::Error> for CliError {
    fn from(e: mahler_core::Error) -> Self {
        use mahler_core::Error as E;
        match e {
            E::NotSymmetric(_)
            | E::DegenerateBody(_)
            | E::OriginNotInterior
            | E::SingularMap(_)
            | E::ZeroVector
            | E::CollinearPoints
            | E::SingularFace => CliError::InvalidBody(e.to_string()),
            E::BadGridSize(..) | E::BadParameter(_) | E::NotOnBoundary(_) | E::NotNormalized(_) => {
                CliError::Parse(e.to_string())
            }
            E::MembershipViolated(_)
            | E::ClassificationUnstable(..)
            | E::NoConvergence(_)
            | E::NotGeneric(_)
            | E::NoZeroFound(_) => CliError::BoundViolated(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
