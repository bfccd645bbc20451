//! Error type shared by all modules.
//!
//! Every failed certification carries a stable check identifier so that
//! machine-readable reports can name exactly which verification failed.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An enumeration or table construction exceeded its configured budget.
    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),

    /// A budgeted subgroup search ended without a certified result.
    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    /// The perturbation search found no nonzero product, or its hypotheses
    /// do not hold on the given instance.
    #[error("no witness: {0}")]
    NoWitness(String),

    /// An exact verification that is guaranteed by construction failed.
    /// This always signals an implementation bug, never bad input.
    #[error("certification failed [{check}]: {detail}")]
    CertificationFailed { check: &'static str, detail: String },

    /// A gated derivation was requested while one of its recorded
    /// hypotheses does not hold.
    #[error("hypothesis unmet [{check}]: {detail}")]
    HypothesisUnmet { check: &'static str, detail: String },

    /// A word was used where membership in a subgroup (or in the kernel of
    /// a homomorphism) is required.
    #[error("element lies outside the required subgroup: {0}")]
    OutsideSubgroup(String),

    /// Malformed or inconsistent input data.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable error kind for report emission.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::BudgetExhausted(_) => "BudgetExhausted",
            Error::SearchExhausted(_) => "SearchExhausted",
            Error::NoWitness(_) => "NoWitness",
            Error::CertificationFailed { .. } => "CertificationFailed",
            Error::HypothesisUnmet { .. } => "HypothesisUnmet",
            Error::OutsideSubgroup(_) => "OutsideSubgroup",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
