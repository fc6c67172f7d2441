//! Command-line front end for pedflow: config parsing, run orchestration and
//! CSV output.

pub mod commands;
pub mod settings;

pub use commands::{cmd_bench, cmd_simulate, cmd_sweep, default_densities, BenchRow, CsvArtifacts};
pub use settings::{
    parse_config, parse_config_str, to_config_text, ConfigError, Overrides, ParsedConfig,
};

use pedflow_core::Model;

/// Models to run in a sweep or bench: the configured one if it was set
/// explicitly, otherwise both.
pub fn selected_models(parsed: &ParsedConfig) -> Vec<Model> {
    if parsed.is_explicit("model") {
        vec![parsed.config.model]
    } else {
        Model::ALL.to_vec()
    }
}
