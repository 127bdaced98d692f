//! Command-line front end for the `qanalytic` library.

pub mod commands;
pub mod parse;
pub mod report;
pub mod verify;
