//! Executes experiment configs and writes their artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use sampled_sde_core::{
    generate_path, run_cell_on, simulate_coupled, ErrorSummary, MetricSet, Regime,
    SimulationConfig, SystemModel,
};

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::noise_dump::NoiseDump;
use crate::parallel::Parallel;
use crate::table::{emit_csv, Table};
use crate::tables::{ratefit_table, summaries_table, trajectories_table};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads for path parallelism; 0 picks automatically.
    pub threads: usize,
    pub overwrite: bool,
    /// Print one status line per cell to stderr.
    pub verbose: bool,
}

/// What a cell computes: every metric when the fluctuation limit exists,
/// otherwise only the LLN errors.
pub fn metrics_for(config: &SimulationConfig) -> MetricSet {
    if config.epsilon > 0.0 && matches!(config.regime, Regime::Finite(_)) {
        MetricSet::Full
    } else {
        MetricSet::LlnOnly
    }
}

/// A file to be produced by a run.
pub(crate) enum Artifact {
    Csv(Table),
    Noise(NoiseDump),
}

/// Fails if any target exists and overwriting is off, then creates `dir`.
pub(crate) fn prepare_outputs(
    dir: &Path,
    names: &[String],
    overwrite: bool,
) -> Result<Vec<PathBuf>> {
    let paths: Vec<PathBuf> = names.iter().map(|n| dir.join(n)).collect();
    if !overwrite {
        if let Some(p) = paths.iter().find(|p| p.exists()) {
            return Err(Error::WouldOverwrite(p.clone()));
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(paths)
}

pub(crate) fn write_artifacts(items: Vec<(PathBuf, Artifact)>) -> Result<Vec<PathBuf>> {
    let mut written = Vec::with_capacity(items.len());
    for (path, item) in items {
        match item {
            Artifact::Csv(t) => emit_csv(&t, &path)?,
            Artifact::Noise(d) => {
                let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                d.write_to(std::io::BufWriter::new(file))
                    .map_err(|e| Error::io(&path, e))?;
            }
        }
        written.push(path);
    }
    Ok(written)
}

/// Runs every cell of `config` on `exec`'s threads.
pub(crate) fn run_cells(
    config: &ExperimentConfig,
    exec: &Parallel,
    verbose: bool,
) -> Result<Vec<ErrorSummary>> {
    (0..config.cells.len())
        .map(|i| {
            let cell = config.cell_config(i);
            let summary = run_cell_on(
                exec,
                &config.model,
                &cell,
                metrics_for(&cell),
                config.n_paths,
                config.seed,
            )?;
            if verbose {
                eprintln!(
                    "cell {}/{}: epsilon={} delta={} lln_sup_p1={:.6e} diverged={}",
                    i + 1,
                    config.cells.len(),
                    cell.epsilon,
                    cell.delta,
                    summary.lln_sup_p1.mean,
                    summary.n_diverged
                );
            }
            Ok(summary)
        })
        .collect()
}

/// Coupled trajectories of cell `index` on path `path_id`, plus the noise
/// used to drive them.
pub(crate) fn cell_trajectory(
    config: &ExperimentConfig,
    index: usize,
    path_id: u64,
) -> Result<(Table, NoiseDump)> {
    let cell = config.cell_config(index);
    let grid = cell.grid()?;
    let path = generate_path(&grid, config.model.state_dim(), config.seed, path_id)?;
    let bundle = simulate_coupled(&config.model, &cell, &path)?;
    Ok((trajectories_table(&bundle)?, NoiseDump::from_path(&path)))
}

/// Output of a config run.
#[derive(Debug)]
pub struct RunReport {
    pub summaries: Vec<ErrorSummary>,
    pub files: Vec<PathBuf>,
}

/// Runs all cells, then writes the selected tables into `config.outputs.dir`:
/// `summaries.csv`, `ratefit.csv`, and per cell with `ε > 0`
/// `trajectories_cell{i}.csv` and `noise_cell{i}.bin`.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport> {
    let sel = config.outputs.tables;
    let traj_cells: Vec<usize> = (0..config.cells.len())
        .filter(|&i| config.cells[i].0 > 0.0)
        .collect();
    let mut names = Vec::new();
    if sel.summaries {
        names.push("summaries.csv".to_string());
    }
    if sel.ratefit {
        names.push("ratefit.csv".to_string());
    }
    for &i in &traj_cells {
        if sel.trajectories {
            names.push(format!("trajectories_cell{i}.csv"));
        }
        if sel.noise {
            names.push(format!("noise_cell{i}.bin"));
        }
    }
    let paths = prepare_outputs(&config.outputs.dir, &names, opts.overwrite)?;

    let exec = Parallel::new(opts.threads)?;
    let summaries = run_cells(config, &exec, opts.verbose)?;
    let n = config.model.state_dim();
    let mut artifacts = Vec::new();
    if sel.summaries {
        artifacts.push(Artifact::Csv(summaries_table(&summaries, n)?));
    }
    if sel.ratefit {
        artifacts.push(Artifact::Csv(ratefit_table(&summaries, n)?));
    }
    for &i in &traj_cells {
        if sel.trajectories || sel.noise {
            let (table, dump) = cell_trajectory(config, i, config.outputs.trajectory_path_id)?;
            if sel.trajectories {
                artifacts.push(Artifact::Csv(table));
            }
            if sel.noise {
                artifacts.push(Artifact::Noise(dump));
            }
        }
    }
    let files = write_artifacts(paths.into_iter().zip(artifacts).collect())?;
    Ok(RunReport { summaries, files })
}
