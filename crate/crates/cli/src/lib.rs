//! Command-line front end for `maxbound-core`: CSV tables of `γ_n`, `g_n`
//! and `ε_p`, JSON reports of the verification suites and of the extremal
//! search.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::Outcome;
pub use config::RunConfig;

/// Bad flags, config values or arguments; exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage<T>(msg: impl Into<String>) -> anyhow::Result<T> {
    Err(UsageError(msg.into()).into())
}
