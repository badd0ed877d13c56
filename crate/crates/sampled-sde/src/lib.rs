//! Configuration-driven experiments on top of `sampled-sde-core`: TOML
//! configs, a rayon path executor, CSV and binary artifacts, and the fixed
//! presets behind the `sampled-sde` command.

pub mod config;
pub mod error;
pub mod models;
pub mod noise_dump;
pub mod parallel;
pub mod presets;
pub mod run;
pub mod table;
pub mod tables;

pub use config::{parse_config, ExperimentConfig, OutputSpec, RegimeSetting, TableSelection};
pub use error::{ConfigError, Error, Result};
pub use models::{jacobian_test_points, lookup_model, BuiltinModel, MODEL_NAMES};
pub use noise_dump::NoiseDump;
pub use parallel::Parallel;
pub use presets::{
    run_preset_linear_oracle, run_preset_pendulum_sweep, LinearOracleReport, PresetOptions,
};
pub use run::{metrics_for, run_experiment, RunOptions, RunReport};
pub use table::{emit_csv, format_float, read_csv, Cell, Table};

pub use sampled_sde_core as numerics;
