//! Parameter sweeps: config, grid evaluation, output.

pub mod config;
mod derivative;
pub mod output;
pub mod presets;
mod record;
mod run;

pub use config::{
    merge_tables, parse_table, validate_config, validate_table, ChainLength, EngineChoice, OutputFormat, OutputSpec,
    SweepConfig, SweepGrids,
};
pub use derivative::{derivative_postprocess, finite_differences};
pub use output::{emit_table, read_json, write_table, TableHeader};
pub use presets::preset;
pub use record::{CrossCheck, ResultRecord};
pub use run::{evaluate_point, grid_points, run_sweep, GridPoint};

/// Header for tables produced by this build.
pub fn table_header(cfg: &SweepConfig) -> TableHeader {
    TableHeader {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: cfg.hash(),
    }
}
