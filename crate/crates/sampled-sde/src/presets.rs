//! Built-in experiments with fixed parameters.

use std::collections::BTreeMap;
use std::path::PathBuf;

use sampled_sde_core::{
    builtin_scalar_linear, linear_oracle_moments, terminal_fluctuation_moments_on, Estimate,
    GridMode, LinearOracleMoments, Regime, SimulationConfig,
};

use crate::config::{ExperimentConfig, OutputSpec, RegimeSetting, TableSelection};
use crate::error::Result;
use crate::models::{lookup_model, BuiltinModel};
use crate::parallel::Parallel;
use crate::run::{
    cell_trajectory, prepare_outputs, run_cells, write_artifacts, Artifact, RunReport,
};
use crate::table::{format_float, Table};
use crate::tables::{ratefit_table, summaries_table};

/// Overrides shared by the presets. `None` keeps the preset's value.
#[derive(Debug, Clone, Default)]
pub struct PresetOptions {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub n_paths: Option<u64>,
    pub grid_mode: Option<GridMode>,
    pub threads: usize,
    pub overwrite: bool,
    pub verbose: bool,
}

/// Inverted pendulum sweep over `ε = 2^-i`, `i = 1..=10`.
pub mod pendulum {
    pub const HORIZON: f64 = 25.0;
    pub const DT: f64 = 0.0977;
    pub const DELTA: f64 = 0.0625;
    pub const X0: [f64; 2] = [1.0, 0.0];
    pub const N_PATHS: u64 = 1000;
    pub const SEED: u64 = 20_240_607;
    pub const TRAJECTORY_PATH_ID: u64 = 0;
    /// Exponents `i` whose trajectories are written out.
    pub const TRAJECTORY_EXPONENTS: [i32; 2] = [5, 3];

    pub fn epsilons() -> Vec<f64> {
        (1..=10).map(|i| 2f64.powi(-i)).collect()
    }
}

/// Scalar linear check against closed-form moments of `Z_T`.
pub mod linear {
    pub const A: f64 = 2.0;
    pub const K: f64 = 1.0;
    pub const SIGMA: f64 = 1.0;
    pub const C: f64 = 1.0;
    pub const EPSILON: f64 = 0.015625;
    pub const HORIZON: f64 = 1.0;
    pub const DT: f64 = 1e-3;
    pub const X0: f64 = 1.0;
    pub const N_PATHS: u64 = 10_000;
    pub const SEED: u64 = 20_240_607;
}

pub fn pendulum_sweep_config(opts: &PresetOptions) -> ExperimentConfig {
    use pendulum::*;
    let cells: Vec<(f64, f64)> = epsilons().into_iter().map(|e| (e, DELTA)).collect();
    let model = lookup_model("pendulum", &BTreeMap::new()).expect("pendulum is registered");
    let simulation = SimulationConfig::new(cells[0].0, DELTA, HORIZON, DT, X0.to_vec())
        .with_grid_mode(opts.grid_mode.unwrap_or(GridMode::GridSnap))
        .with_regime(Regime::Finite(DELTA / cells[0].0));
    ExperimentConfig {
        model_name: "pendulum".into(),
        model_params: BTreeMap::new(),
        model,
        simulation,
        regime: RegimeSetting::PerCell,
        cells,
        n_paths: opts.n_paths.unwrap_or(N_PATHS),
        seed: opts.seed.unwrap_or(SEED),
        outputs: OutputSpec {
            dir: opts.out_dir.clone(),
            tables: TableSelection {
                summaries: true,
                ratefit: true,
                trajectories: true,
                noise: false,
            },
            trajectory_path_id: TRAJECTORY_PATH_ID,
        },
    }
}

/// Runs the pendulum sweep and writes `summaries.csv`, `ratefit.csv` and
/// `trajectories_eps_{ε}.csv` for `ε = 2^-5` and `2^-3`.
pub fn run_preset_pendulum_sweep(opts: &PresetOptions) -> Result<RunReport> {
    let config = pendulum_sweep_config(opts);
    let traj: Vec<usize> = pendulum::TRAJECTORY_EXPONENTS
        .iter()
        .map(|&i| (i - 1) as usize)
        .collect();
    let mut names = vec!["summaries.csv".to_string(), "ratefit.csv".to_string()];
    names.extend(
        traj.iter()
            .map(|&i| format!("trajectories_eps_{}.csv", format_float(config.cells[i].0))),
    );
    let paths = prepare_outputs(&opts.out_dir, &names, opts.overwrite)?;

    let exec = Parallel::new(opts.threads)?;
    let summaries = run_cells(&config, &exec, opts.verbose)?;
    let mut artifacts = vec![
        Artifact::Csv(summaries_table(&summaries, 2)?),
        Artifact::Csv(ratefit_table(&summaries, 2)?),
    ];
    for &i in &traj {
        artifacts.push(Artifact::Csv(
            cell_trajectory(&config, i, config.outputs.trajectory_path_id)?.0,
        ));
    }
    let files = write_artifacts(paths.into_iter().zip(artifacts).collect())?;
    Ok(RunReport { summaries, files })
}

#[derive(Debug, Clone)]
pub struct LinearOracleReport {
    pub mean: Estimate,
    pub variance: Estimate,
    pub oracle: LinearOracleMoments,
    pub files: Vec<PathBuf>,
}

impl LinearOracleReport {
    /// `(estimate − oracle)/se` for the mean and the variance.
    pub fn z_scores(&self) -> (f64, f64) {
        (
            (self.mean.mean - self.oracle.mean_z_t) / self.mean.se,
            (self.variance.mean - self.oracle.var_z_t) / self.variance.se,
        )
    }
}

pub fn linear_oracle_config(opts: &PresetOptions) -> SimulationConfig {
    use linear::*;
    SimulationConfig::new(EPSILON, EPSILON, HORIZON, DT, vec![X0])
        .with_regime(Regime::Finite(C))
        .with_grid_mode(opts.grid_mode.unwrap_or(GridMode::Union))
}

/// Monte Carlo mean and variance of `Z_T` for the scalar linear model next to
/// their closed forms; writes `linear_oracle.csv`.
pub fn run_preset_linear_oracle(opts: &PresetOptions) -> Result<LinearOracleReport> {
    use linear::*;
    let paths = prepare_outputs(
        &opts.out_dir,
        &["linear_oracle.csv".to_string()],
        opts.overwrite,
    )?;
    let model = BuiltinModel::ScalarLinear(builtin_scalar_linear(A, K));
    let config = linear_oracle_config(opts);
    let exec = Parallel::new(opts.threads)?;
    let moments = terminal_fluctuation_moments_on(
        &exec,
        &model,
        &config,
        opts.n_paths.unwrap_or(N_PATHS),
        opts.seed.unwrap_or(SEED),
    )?;
    let oracle = linear_oracle_moments(A, K, C, SIGMA, HORIZON, X0);
    let (mean, variance) = (moments.mean[0], moments.variance[0]);
    let mut table = Table::new(["quantity", "estimate", "se", "oracle", "z_score"]);
    for (name, est, exact) in [
        ("mean_z_T", mean, oracle.mean_z_t),
        ("var_z_T", variance, oracle.var_z_t),
    ] {
        table.push_row(vec![
            name.into(),
            est.mean.into(),
            est.se.into(),
            exact.into(),
            ((est.mean - exact) / est.se).into(),
        ])?;
    }
    let files = write_artifacts(vec![(paths[0].clone(), Artifact::Csv(table))])?;
    Ok(LinearOracleReport {
        mean,
        variance,
        oracle,
        files,
    })
}
