//! Process exit codes by failure class.

use qeraser_core::Error;

pub const OK: u8 = 0;
pub const OTHER: u8 = 1;
pub const CONFIG: u8 = 2;
pub const DATA: u8 = 3;
pub const VERIFICATION: u8 = 4;

/// Raised when a check ran to completion and did not pass.
#[derive(Debug)]
pub struct VerificationFailed(pub String);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

pub fn code_for(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<VerificationFailed>().is_some() {
        return VERIFICATION;
    }
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Config(_) | Error::Domain(_)) => CONFIG,
        Some(
            Error::Data(_)
            | Error::Parse { .. }
            | Error::NoCorrelation { .. }
            | Error::InsufficientData(_)
            | Error::Fit(_),
        ) => DATA,
        _ => OTHER,
    }
}
