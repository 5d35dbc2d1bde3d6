//! Command implementations and verification suites behind the `articugeo`
//! binary, exposed as a library so integration tests drive the same code.

pub mod args;
pub mod commands {
    pub mod calibrate;
    pub mod losses;
    pub mod metrics;
    pub mod render;
}
pub mod verify;

use articugeo_core::error::Error;

/// Stable exit-code contract: 0 success, 1 usage, 2 I/O or parse,
/// 3 numerical failure.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Io { .. } | Error::Parse { .. } | Error::BadFormat { .. } => 2,
        _ => 3,
    }
}
