//! Library side of the `kloo` command: report rows, suites and the
//! mapping from core errors to exit codes.

pub mod report;
pub mod suites;

use kloo_core::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_MISMATCH: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_GUARD: u8 = 3;

pub fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::GuardExceeded { .. } | Error::BruteForceGuard { .. } => EXIT_GUARD,
        Error::NonUnit { .. }
        | Error::NotCoprime(..)
        | Error::InvalidModulus(_)
        | Error::NotPrimePower(_)
        | Error::InvalidArgument(_) => EXIT_USAGE,
        _ => EXIT_MISMATCH,
    }
}
