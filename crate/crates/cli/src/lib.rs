//! Command layer over `prevsweep-core`: run configuration, CSV ingestion
//! and report writing, and the three subcommands (`metrics`, `sweep`,
//! `synth`) plus `config print-defaults`.

pub mod commands;
pub mod config;
pub mod io;
pub mod reports;
pub mod summary;

pub use config::RunConfig;
