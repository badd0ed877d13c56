//! Monte Carlo harness: coupled paths per `(ε, δ)` cell, sup-norm and
//! terminal errors, and their aggregation.
//!
//! Paths are produced through an [`Executor`], which may run them in any
//! order or in parallel; results are always reduced in `path_id` order with
//! compensated sums, so a cell's summary is bitwise reproducible.

mod oracle;
mod rate;

pub use oracle::{linear_oracle_moments, LinearOracleMoments};
pub use rate::{adjacent_inversions, fit_rate, spearman_rho, RateFit};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::integrators::{
    run_fluctuation, run_limit, run_sampled, LimitScheme, Regime, SimulationConfig, StateSeries,
    Workspace,
};
use crate::linalg::norm1;
use crate::model::SystemModel;
use crate::noise::generate_path;
use crate::stats::mean_and_standard_error;

/// Runs `n` independent jobs indexed by path id and returns their results
/// in index order.
pub trait Executor {
    fn map_paths<T, F>(&self, n: u64, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send;
}

/// Runs paths one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_paths<T, F>(&self, n: u64, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        (0..n).map(job).collect()
    }
}

/// A Monte Carlo mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    fn from_values(values: &[f64]) -> Self {
        let (mean, se) = mean_and_standard_error(values);
        Self { mean, se }
    }
}

/// Which error metrics a cell computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricSet {
    /// LLN sup errors plus the fluctuation (CLT-type) and terminal errors.
    /// Needs `ε > 0` and a finite regime constant.
    Full,
    /// Only `sup|X − x|` and its square.
    LlnOnly,
}

/// How a sweep assigns the regime constant to each cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimePolicy {
    /// Use the base configuration's regime in every cell.
    Keep,
    /// `c = δ/ε` in each cell, so `ϰ(ε) = 0`.
    Ratio,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSummary {
    pub epsilon: f64,
    pub delta: f64,
    pub regime: Regime,
    pub kappa_eps: Option<f64>,
    pub n_paths: u64,
    pub n_diverged: u64,
    /// `E sup_t |X − x|`
    pub lln_sup_p1: Estimate,
    /// `E sup_t |X − x|²`
    pub lln_sup_p2: Estimate,
    /// `E sup_t |X − x − εZ| / ε`
    pub clt_sup: Option<Estimate>,
    /// Per component, `E |X_j(T) − x_j(T) − ε Z_j(T)|`.
    pub terminal_abs_error: Option<Vec<Estimate>>,
    /// Per component, `E [X_j(T) − x_j(T) − ε Z_j(T)]`.
    pub terminal_signed_error: Option<Vec<Estimate>>,
}

impl ErrorSummary {
    pub fn retained_paths(&self) -> u64 {
        self.n_paths - self.n_diverged
    }

    /// `E[Y²] − (E Y)²` with Y = sup|X − x|, and the standard error of that
    /// difference by first-order propagation.
    pub fn jensen_gap(&self) -> (f64, f64) {
        let (p1, p2) = (self.lln_sup_p1, self.lln_sup_p2);
        let gap = p2.mean - p1.mean * p1.mean;
        let se = libm::sqrt(p2.se * p2.se + 4.0 * p1.mean * p1.mean * p1.se * p1.se);
        (gap, se)
    }
}

/// `max_i |a_i − b_i|₁` over nodes.
pub fn sup_error_1norm(a: &StateSeries, b: &StateSeries) -> Result<f64> {
    if a.len() != b.len() || a.dim() != b.dim() {
        return Err(Error::Argument(format!(
            "series shapes differ: {}×{} vs {}×{}",
            a.len(),
            a.dim(),
            b.len(),
            b.dim()
        )));
    }
    Ok(sup_diff(a.as_flat(), b.as_flat(), a.dim()))
}

fn sup_diff(a: &[f64], b: &[f64], dim: usize) -> f64 {
    let mut buf = vec![0.0; dim];
    a.chunks_exact(dim)
        .zip(b.chunks_exact(dim))
        .fold(0.0, |acc, (x, y)| {
            for ((d, p), q) in buf.iter_mut().zip(x).zip(y) {
                *d = p - q;
            }
            f64::max(acc, norm1(&buf))
        })
}

struct PathMetrics {
    sup1: f64,
    clt: Option<f64>,
    terminal: Vec<f64>,
}

fn path_metrics<M: SystemModel + ?Sized>(
    model: &M,
    config: &SimulationConfig,
    grid: &crate::time_grid::TimeGrid,
    x_limit: &StateSeries,
    metrics: MetricSet,
    seed: u64,
    path_id: u64,
) -> Result<PathMetrics> {
    let n = model.state_dim();
    let path = generate_path(grid, n, seed, path_id)?;
    let mut ws = Workspace::new(model);
    let x = run_sampled(
        model,
        &mut ws,
        grid,
        &config.x0,
        config.epsilon,
        Some(&path),
    )?;
    let sup1 = sup_diff(x.as_flat(), x_limit.as_flat(), n);
    match (metrics, config.regime) {
        (MetricSet::Full, Regime::Finite(c)) => {
            let z = run_fluctuation(model, &mut ws, grid, x_limit, c, &path)?;
            let eps = config.epsilon;
            let mut worst = 0.0f64;
            let mut resid = vec![0.0; n];
            for i in 0..x.len() {
                let (xs, xl, zs) = (x.node(i), x_limit.node(i), z.node(i));
                for (j, r) in resid.iter_mut().enumerate() {
                    *r = xs[j] - xl[j] - eps * zs[j];
                }
                worst = worst.max(norm1(&resid));
            }
            Ok(PathMetrics {
                sup1,
                clt: Some(worst / eps),
                terminal: resid,
            })
        }
        _ => Ok(PathMetrics {
            sup1,
            clt: None,
            terminal: Vec::new(),
        }),
    }
}

/// Simulates `n_paths` coupled paths (ids `0..n_paths`) and aggregates their
/// errors. Paths that diverge are counted and excluded.
pub fn run_cell_on<E, M>(
    exec: &E,
    model: &M,
    config: &SimulationConfig,
    metrics: MetricSet,
    n_paths: u64,
    seed: u64,
) -> Result<ErrorSummary>
where
    E: Executor + ?Sized,
    M: SystemModel + Sync + ?Sized,
{
    config.validate()?;
    if n_paths == 0 {
        return Err(Error::Argument("n_paths must be at least 1".into()));
    }
    if config.x0.len() != model.state_dim() {
        return Err(Error::ModelDefinition(format!(
            "initial state has length {}, model declares n = {}",
            config.x0.len(),
            model.state_dim()
        )));
    }
    if metrics == MetricSet::Full {
        if config.epsilon <= 0.0 {
            return Err(Error::Precondition(
                "fluctuation metrics need epsilon > 0".into(),
            ));
        }
        if config.regime == Regime::Infinite {
            return Err(Error::Precondition(
                "fluctuation metrics are undefined in regime 3".into(),
            ));
        }
    }
    let grid = config.grid()?;
    let x_limit = {
        let mut ws = Workspace::new(model);
        run_limit(model, &mut ws, &grid, &config.x0, LimitScheme::Euler)?
    };

    let outcomes = exec.map_paths(n_paths, |path_id| {
        path_metrics(model, config, &grid, &x_limit, metrics, seed, path_id)
    });

    let mut kept = Vec::with_capacity(outcomes.len());
    let mut n_diverged = 0u64;
    for outcome in outcomes {
        match outcome {
            Ok(m) => kept.push(m),
            Err(Error::Divergence { .. }) => n_diverged += 1,
            Err(e) => return Err(e),
        }
    }
    if kept.is_empty() {
        return Err(Error::AllDiverged { n_paths });
    }

    let column = |f: &dyn Fn(&PathMetrics) -> f64| {
        Estimate::from_values(&kept.iter().map(f).collect::<Vec<_>>())
    };
    let lln_sup_p1 = column(&|m| m.sup1);
    let lln_sup_p2 = column(&|m| m.sup1 * m.sup1);
    let (clt_sup, terminal_abs_error, terminal_signed_error) = if metrics == MetricSet::Full {
        let n = model.state_dim();
        let abs = (0..n)
            .map(|j| column(&|m| libm::fabs(m.terminal[j])))
            .collect();
        let signed = (0..n).map(|j| column(&|m| m.terminal[j])).collect();
        (
            Some(column(&|m| m.clt.unwrap_or(f64::NAN))),
            Some(abs),
            Some(signed),
        )
    } else {
        (None, None, None)
    };

    Ok(ErrorSummary {
        epsilon: config.epsilon,
        delta: config.delta,
        regime: config.regime,
        kappa_eps: config.kappa_eps(),
        n_paths,
        n_diverged,
        lln_sup_p1,
        lln_sup_p2,
        clt_sup,
        terminal_abs_error,
        terminal_signed_error,
    })
}

/// Monte Carlo mean and variance of the fluctuation limit `Z_T`, each with
/// a standard error. The variance's standard error is that of the mean of
/// squared deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalMoments {
    pub mean: Vec<Estimate>,
    pub variance: Vec<Estimate>,
}

pub fn terminal_fluctuation_moments_on<E, M>(
    exec: &E,
    model: &M,
    config: &SimulationConfig,
    n_paths: u64,
    seed: u64,
) -> Result<TerminalMoments>
where
    E: Executor + ?Sized,
    M: SystemModel + Sync + ?Sized,
{
    config.validate()?;
    let c = config.regime.constant().ok_or_else(|| {
        Error::Precondition("the fluctuation limit is undefined in regime 3".into())
    })?;
    if n_paths < 2 {
        return Err(Error::Argument(
            "need at least 2 paths for a variance".into(),
        ));
    }
    let n = model.state_dim();
    if config.x0.len() != n {
        return Err(Error::ModelDefinition(format!(
            "initial state has length {}, model declares n = {n}",
            config.x0.len()
        )));
    }
    let grid = config.grid()?;
    let x_limit = {
        let mut ws = Workspace::new(model);
        run_limit(model, &mut ws, &grid, &config.x0, LimitScheme::Euler)?
    };
    let finals = exec.map_paths(n_paths, |path_id| -> Result<Vec<f64>> {
        let path = generate_path(&grid, n, seed, path_id)?;
        let mut ws = Workspace::new(model);
        let z = run_fluctuation(model, &mut ws, &grid, &x_limit, c, &path)?;
        Ok(z.last().to_vec())
    });
    let finals = finals.into_iter().collect::<Result<Vec<_>>>()?;
    let mut mean = Vec::with_capacity(n);
    let mut variance = Vec::with_capacity(n);
    for j in 0..n {
        let col: Vec<f64> = finals.iter().map(|z| z[j]).collect();
        let m = Estimate::from_values(&col);
        let dev: Vec<f64> = col.iter().map(|z| (z - m.mean) * (z - m.mean)).collect();
        let raw = Estimate::from_values(&dev);
        // Bessel-corrected variance; the standard error is that of the raw mean
        let scale = n_paths as f64 / (n_paths - 1) as f64;
        mean.push(m);
        variance.push(Estimate {
            mean: raw.mean * scale,
            se: raw.se * scale,
        });
    }
    Ok(TerminalMoments { mean, variance })
}

/// [`run_cell_on`] with the [`Sequential`] executor.
pub fn run_cell<M: SystemModel + Sync + ?Sized>(
    model: &M,
    config: &SimulationConfig,
    metrics: MetricSet,
    n_paths: u64,
    seed: u64,
) -> Result<ErrorSummary> {
    run_cell_on(&Sequential, model, config, metrics, n_paths, seed)
}

fn cell_config(
    base: &SimulationConfig,
    epsilon: f64,
    delta: f64,
    policy: RegimePolicy,
) -> SimulationConfig {
    let mut cfg = base.clone();
    cfg.epsilon = epsilon;
    cfg.delta = delta;
    if policy == RegimePolicy::Ratio {
        cfg.regime = if epsilon > 0.0 {
            Regime::Finite(delta / epsilon)
        } else {
            Regime::Infinite
        };
    }
    cfg
}

/// One cell per `ε`, all else fixed (including `δ`).
#[allow(clippy::too_many_arguments)]
pub fn sweep_epsilon_on<E, M>(
    exec: &E,
    model: &M,
    base: &SimulationConfig,
    epsilons: &[f64],
    policy: RegimePolicy,
    metrics: MetricSet,
    n_paths: u64,
    seed: u64,
) -> Result<Vec<ErrorSummary>>
where
    E: Executor + ?Sized,
    M: SystemModel + Sync + ?Sized,
{
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Argument(format!(
            "sweep needs positive epsilons, got {epsilons:?}"
        )));
    }
    epsilons
        .iter()
        .map(|&eps| {
            run_cell_on(
                exec,
                model,
                &cell_config(base, eps, base.delta, policy),
                metrics,
                n_paths,
                seed,
            )
        })
        .collect()
}

/// One cell per coupled `(ε, δ)` pair.
#[allow(clippy::too_many_arguments)]
pub fn sweep_pairs_on<E, M>(
    exec: &E,
    model: &M,
    base: &SimulationConfig,
    pairs: &[(f64, f64)],
    policy: RegimePolicy,
    metrics: MetricSet,
    n_paths: u64,
    seed: u64,
) -> Result<Vec<ErrorSummary>>
where
    E: Executor + ?Sized,
    M: SystemModel + Sync + ?Sized,
{
    if pairs.is_empty() || pairs.iter().any(|(e, d)| !(*e > 0.0) || !(*d > 0.0)) {
        return Err(Error::Argument(format!(
            "sweep needs positive (epsilon, delta) pairs, got {pairs:?}"
        )));
    }
    pairs
        .iter()
        .map(|&(eps, delta)| {
            run_cell_on(
                exec,
                model,
                &cell_config(base, eps, delta, policy),
                metrics,
                n_paths,
                seed,
            )
        })
        .collect()
}

pub fn sweep_epsilon<M: SystemModel + Sync + ?Sized>(
    model: &M,
    base: &SimulationConfig,
    epsilons: &[f64],
    policy: RegimePolicy,
    metrics: MetricSet,
    n_paths: u64,
    seed: u64,
) -> Result<Vec<ErrorSummary>> {
    sweep_epsilon_on(
        &Sequential,
        model,
        base,
        epsilons,
        policy,
        metrics,
        n_paths,
        seed,
    )
}

pub fn sweep_pairs<M: SystemModel + Sync + ?Sized>(
    model: &M,
    base: &SimulationConfig,
    pairs: &[(f64, f64)],
    policy: RegimePolicy,
    metrics: MetricSet,
    n_paths: u64,
    seed: u64,
) -> Result<Vec<ErrorSummary>> {
    sweep_pairs_on(
        &Sequential,
        model,
        base,
        pairs,
        policy,
        metrics,
        n_paths,
        seed,
    )
}
