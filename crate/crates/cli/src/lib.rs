//! JSON front end for the `framecast` analysis library.
//!
//! Every document is an envelope `{kind, payload, meta}` written as canonical
//! JSON (sorted keys, 17 significant digits), so identical inputs produce
//! byte-identical reports.

pub mod app;
pub mod commands;
pub mod document;
pub mod error;

pub use app::{run, Io};
pub use error::CliError;
