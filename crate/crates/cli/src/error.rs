use thiserror::Error;

/// Failures mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad topology, flags, weights or initial state. Exit code 2.
    #[error("{0}")]
    Input(String),

    /// The computation ran but did not produce a usable result. Exit code 3.
    /// `report` holds whatever was computed before the failure.
    #[error("{message}")]
    Numerical { message: String, report: String },

    /// A state space or group outgrew its size limit. Exit code 4.
    #[error("{0}")]
    Cap(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            Self::Input(_) => 2,
            Self::Numerical { .. } => 3,
            Self::Cap(_) => 4,
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self::Numerical {
            message: message.into(),
            report: String::new(),
        }
    }
}

impl From<qcl_core::Error> for CliError {
    fn from(e: qcl_core::Error) -> Self {
        use qcl_core::Error as E;
        match e {
            E::CapExceeded { .. } => Self::Cap(e.to_string()),
            E::NumericalFailure(_) | E::NotALaplacian { .. } | E::StepSize { .. } | E::InsufficientSamples { .. } => {
                Self::numerical(e.to_string())
            }
            E::InvalidCycles(_)
            | E::DimensionMismatch { .. }
            | E::NotAGroup
            | E::InvalidPartition(_)
            | E::DifferentDegree(..)
            | E::InfeasibleBudget(_)
            | E::InvalidState(_)
            | E::InvalidArgument(_)
            | E::Parse(_) => Self::Input(e.to_string()),
        }
    }
}
