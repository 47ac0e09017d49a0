//! Parameter sweeps over the `wqed-core` library with CSV and JSON output.

pub mod config;
pub mod output;
pub mod sweep;

pub use config::{
    parse_config, parse_config_text, Axis, Command, ConfigError, Format, SweepConfig,
};
pub use output::{emit, metadata_text};
pub use sweep::{run_sweep, Metadata, ResultTable, SweepError};
