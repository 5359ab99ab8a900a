//! File formats, canonical reports and the command-line runner built on
//! [`tis_core`].

pub mod cli;
pub mod config;
pub mod report;

pub use config::{load_topology, load_workload, serialize_config, serialize_workload, ConfigError};
pub use tis_core;
