//! Scenario runner for the `paralab` command line tool.

pub mod config;
pub mod error;
pub mod oracle;
pub mod output;
pub mod run;
pub mod scenario;
pub mod study;

pub use error::CliError;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod guide {}
