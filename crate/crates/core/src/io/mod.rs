//! File formats: Touchstone v1, CSV tables, TOML documents and key = value
//! reports.

pub mod csv;
pub mod files;
pub mod report;
pub mod touchstone;

pub use files::{load_toml, save_toml, write_atomic, RunConfig, TopologyDocument};
pub use report::Report;
pub use touchstone::{read_touchstone, write_touchstone, TouchstoneFormat};
