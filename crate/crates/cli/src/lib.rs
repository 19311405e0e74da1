//! Command layer: artifact serialization, config handling, and the
//! search / verify / construct / show subcommand implementations.
//!
//! Everything here is a thin, deterministic shell around
//! `bellactiv-core`; the only persistence surface is the artifact file
//! format in [`artifact`].

use std::fmt;

pub mod artifact;
pub mod commands;
pub mod config;

/// Command failure with a stable exit-code mapping:
///
/// | code | meaning              |
/// |------|----------------------|
/// | 0    | success / pass       |
/// | 1    | verification failure |
/// | 2    | usage error          |
/// | 3    | I/O or parse error   |
///
/// Structural problems (unreadable file, malformed JSON, schema
/// violations) are I/O or parse errors; artifacts that parse but break a
/// numerical invariant are verification failures.
#[derive(Debug)]
pub enum Failure {
    Verification(String),
    Usage(String),
    Io(String),
    Parse(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
            Failure::Parse(_) => 3,
        }
    }

    /// Prefixes the message with where it happened, keeping the kind.
    pub fn with_context(self, context: &str) -> Self {
        match self {
            Failure::Verification(m) => Failure::Verification(format!("{context}: {m}")),
            Failure::Usage(m) => Failure::Usage(format!("{context}: {m}")),
            Failure::Io(m) => Failure::Io(format!("{context}: {m}")),
            Failure::Parse(m) => Failure::Parse(format!("{context}: {m}")),
        }
    }

    /// Core errors surfacing through command logic break numerical
    /// invariants, not file structure.
    pub fn from_core(e: bellactiv_core::Error) -> Self {
        Failure::Verification(e.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
            Failure::Usage(m) => write!(f, "usage: {m}"),
            Failure::Io(m) => write!(f, "io: {m}"),
            Failure::Parse(m) => write!(f, "parse: {m}"),
        }
    }
}

impl std::error::Error for Failure {}
