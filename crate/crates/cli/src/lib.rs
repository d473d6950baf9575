//! Experiment runner and property-check harness for `fedcent`.

pub mod config;
pub mod error;
pub mod gen_instance;
pub mod layout_file;
pub mod report;
pub mod run;
pub mod verify;

pub use error::CliError;
