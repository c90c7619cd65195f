//! Experiment harness for `krfactor`: threshold and transversal sweeps,
//! pipeline runs, Janson reports, and certificate verification. The `krfactor`
//! binary is a thin command-line layer over these functions.

pub mod config;
pub mod output;
pub mod report;
pub mod sweep;

use krfactor::Error;

/// Process exit code for a library error: `2` for usage, parse and i/o
/// problems, `1` for everything else.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Io(_) | Error::InvalidParameter(_) => 2,
        _ => 1,
    }
}
