use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sampled_sde::numerics::{check_jacobians, GridMode};
use sampled_sde::{
    jacobian_test_points, lookup_model, parse_config, run_experiment, run_preset_linear_oracle,
    run_preset_pendulum_sweep, Error, PresetOptions, RunOptions,
};

#[derive(Parser)]
#[command(
    name = "sampled-sde",
    version,
    about = "Monte Carlo experiments for sampled-data SDEs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (overrides the config's outputs.dir)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed for the noise streams
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo paths per cell
    #[arg(long, global = true)]
    paths: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Replace existing output files
    #[arg(long, global = true)]
    overwrite: bool,
    #[arg(long, global = true, value_enum)]
    grid_mode: Option<GridArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config
    Run { config: PathBuf },
    /// Run a built-in experiment
    Preset {
        #[arg(value_enum)]
        name: PresetName,
    },
    /// Compare a builtin model's Jacobians with finite differences
    CheckJacobians {
        model: String,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetName {
    PendulumSweep,
    LinearOracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Union,
    GridSnap,
}

impl From<GridArg> for GridMode {
    fn from(g: GridArg) -> Self {
        match g {
            GridArg::Union => GridMode::Union,
            GridArg::GridSnap => GridMode::GridSnap,
        }
    }
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn execute(cli: Cli) -> Result<bool, Error> {
    let grid_mode = cli.grid_mode.map(GridMode::from);
    match cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::Io {
                path: config.clone(),
                source: e,
            })?;
            let mut cfg = parse_config(&text)?;
            if let Some(dir) = cli.out {
                cfg.outputs.dir = dir;
            }
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(paths) = cli.paths {
                cfg.n_paths = paths;
            }
            if let Some(mode) = grid_mode {
                cfg.simulation.grid_mode = mode;
            }
            let opts = RunOptions {
                threads: cli.threads,
                overwrite: cli.overwrite,
                verbose: true,
            };
            let report = run_experiment(&cfg, &opts)?;
            print_files(&report.files);
        }
        Command::Preset { name } => {
            let opts = PresetOptions {
                out_dir: cli.out.unwrap_or_else(|| PathBuf::from("out")),
                seed: cli.seed,
                n_paths: cli.paths,
                grid_mode,
                threads: cli.threads,
                overwrite: cli.overwrite,
                verbose: true,
            };
            match name {
                PresetName::PendulumSweep => print_files(&run_preset_pendulum_sweep(&opts)?.files),
                PresetName::LinearOracle => {
                    let report = run_preset_linear_oracle(&opts)?;
                    let (zm, zv) = report.z_scores();
                    println!(
                        "mean Z_T = {} ± {} (exact {}, z = {zm:.3})",
                        report.mean.mean, report.mean.se, report.oracle.mean_z_t
                    );
                    println!(
                        "var Z_T  = {} ± {} (exact {}, z = {zv:.3})",
                        report.variance.mean, report.variance.se, report.oracle.var_z_t
                    );
                    print_files(&report.files);
                }
            }
        }
        Command::CheckJacobians { model, tol } => {
            let m = lookup_model(&model, &Default::default())
                .map_err(|p| Error::Setup(p.join("; ")))?;
            let report = check_jacobians(&m, &jacobian_test_points(&m), tol)?;
            println!(
                "{model}: {} points, max deviation Df {:.3e}, Dkappa {:.3e}, Dg {:.3e} (tolerance {tol:e})",
                report.points_checked, report.drift_max_dev, report.control_law_max_dev, report.control_matrix_max_dev
            );
            println!("{}", if report.passed() { "PASS" } else { "FAIL" });
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
