//! Numerical scans over chain lengths, their JSON formats and the config runner.

pub mod config;
pub mod experiments;
pub mod json;
pub mod scan;

pub use experiments::*;
pub use scan::*;
pub use json::*;
pub use config::*;
