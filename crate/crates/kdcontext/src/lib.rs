//! File formats, line-delimited logs, parallel runners and the `kdctx` command
//! line on top of `kdcontext-core`.

pub mod cli;
pub mod config;
pub mod format;
pub mod parallel;
pub mod report;
