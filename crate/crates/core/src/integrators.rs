//! Discrete-time solvers for the sampled SDE `X^{ε,δ}`, the sampled ODE
//! `x^δ`, the limiting ODE `x` and the limiting fluctuation SDE `Z`.
//!
//! Stochastic objects use explicit Euler–Maruyama on the grid nodes. The
//! zero-order hold reads the stored state at `grid.sample_index()[i]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{mat_mul_into, mat_vec_into, Matrix};
use crate::model::SystemModel;
use crate::noise::BrownianPath;
use crate::time_grid::{build_grid, GridMode, TimeGrid};

/// The limit `c` of `δ/ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// `c ∈ [0, ∞)`: regime 1 when zero, regime 2 otherwise.
    Finite(f64),
    /// `c = ∞`: regime 3, no fluctuation limit is built.
    Infinite,
}

impl Regime {
    pub fn constant(&self) -> Option<f64> {
        match *self {
            Regime::Finite(c) => Some(c),
            Regime::Infinite => None,
        }
    }

    /// 1, 2 or 3.
    pub fn number(&self) -> u8 {
        match *self {
            Regime::Finite(0.0) => 1,
            Regime::Finite(_) => 2,
            Regime::Infinite => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LimitScheme {
    /// Classical fourth-order Runge–Kutta on the grid.
    #[default]
    Rk4,
    /// Explicit Euler on the grid, matching the stochastic solvers step for step.
    Euler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub horizon: f64,
    pub dt: f64,
    pub regime: Regime,
    pub x0: Vec<f64>,
    pub grid_mode: GridMode,
    pub limit_scheme: LimitScheme,
}

impl SimulationConfig {
    /// Union grid, fourth-order limit ODE, and `c = δ/ε` (or `∞` when `ε = 0`).
    pub fn new(epsilon: f64, delta: f64, horizon: f64, dt: f64, x0: Vec<f64>) -> Self {
        let regime = if epsilon > 0.0 {
            Regime::Finite(delta / epsilon)
        } else {
            Regime::Infinite
        };
        Self {
            epsilon,
            delta,
            horizon,
            dt,
            regime,
            x0,
            grid_mode: GridMode::Union,
            limit_scheme: LimitScheme::Rk4,
        }
    }

    pub fn with_regime(mut self, regime: Regime) -> Self {
        self.regime = regime;
        self
    }

    pub fn with_grid_mode(mut self, mode: GridMode) -> Self {
        self.grid_mode = mode;
        self
    }

    pub fn with_limit_scheme(mut self, scheme: LimitScheme) -> Self {
        self.limit_scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, ok: bool, v: f64| {
            if ok {
                Ok(())
            } else {
                Err(Error::Argument(format!("{name} out of range: {v}")))
            }
        };
        check(
            "epsilon",
            self.epsilon >= 0.0 && self.epsilon.is_finite(),
            self.epsilon,
        )?;
        check(
            "delta",
            self.delta > 0.0 && self.delta.is_finite(),
            self.delta,
        )?;
        check(
            "horizon",
            self.horizon > 0.0 && self.horizon.is_finite(),
            self.horizon,
        )?;
        check("dt", self.dt > 0.0 && self.dt.is_finite(), self.dt)?;
        if let Regime::Finite(c) = self.regime {
            check("regime constant", c >= 0.0 && c.is_finite(), c)?;
        }
        if self.x0.is_empty() || self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument(format!(
                "initial state must be finite and nonempty: {:?}",
                self.x0
            )));
        }
        Ok(())
    }

    /// `ϰ(ε) = |δ/ε − c|`, defined for `ε > 0` and finite `c`.
    pub fn kappa_eps(&self) -> Option<f64> {
        match self.regime {
            Regime::Finite(c) if self.epsilon > 0.0 => {
                Some(libm::fabs(self.delta / self.epsilon - c))
            }
            _ => None,
        }
    }

    /// Whether `|δ/ε − c| < 1`, which guarantees `δ < (c + 1) ε`.
    pub fn within_eps0_bound(&self) -> bool {
        self.kappa_eps().is_some_and(|k| k < 1.0)
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        self.validate()?;
        build_grid(self.horizon, self.dt, self.delta, self.grid_mode)
    }

    fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        if grid.delta() != self.delta
            || grid.horizon() != self.horizon
            || grid.mode() != self.grid_mode
        {
            return Err(Error::Argument(
                "noise path grid does not match the configuration (delta, horizon or mode)".into(),
            ));
        }
        Ok(())
    }
}

/// States at every grid node, row-major `len × dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSeries {
    dim: usize,
    data: Vec<f64>,
}

impl StateSeries {
    fn with_capacity(dim: usize, nodes: usize) -> Self {
        Self {
            dim,
            data: Vec::with_capacity(dim * nodes),
        }
    }

    pub fn from_flat(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::Argument(format!(
                "{} values do not split into states of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last(&self) -> &[f64] {
        self.node(self.len() - 1)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    fn push(&mut self, x: &[f64]) {
        self.data.extend_from_slice(x);
    }

    fn copy_node_into(&self, i: usize, out: &mut [f64]) {
        out.copy_from_slice(self.node(i));
    }
}

/// How `z_rescaled` was normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rescaling {
    /// `(X − x)/ε`, regimes 1 and 2.
    Epsilon,
    /// `(X − x)/δ`, regime 3.
    Delta,
}

/// Coupled trajectories on one grid driven by one Brownian path.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryBundle<'g> {
    pub grid: &'g TimeGrid,
    pub epsilon: f64,
    pub x_sde: StateSeries,
    pub x_limit: StateSeries,
    pub x_sampled_ode: Option<StateSeries>,
    pub z_limit: Option<StateSeries>,
    pub z_rescaled: Option<StateSeries>,
    pub rescaling: Rescaling,
}

/// Scratch buffers sized for one model.
pub(crate) struct Workspace {
    n: usize,
    m: usize,
    f: Vec<f64>,
    g: Vec<f64>,
    k: Vec<f64>,
    sigma: Vec<f64>,
    df: Vec<f64>,
    dk: Vec<f64>,
    dg: Vec<f64>,
    mat: Vec<f64>,
    v1: Vec<f64>,
    v2: Vec<f64>,
    held: Vec<f64>,
    cur: Vec<f64>,
    next: Vec<f64>,
    stages: [Vec<f64>; 4],
}

impl Workspace {
    pub(crate) fn new<M: SystemModel + ?Sized>(model: &M) -> Self {
        let (n, m) = (model.state_dim(), model.control_dim());
        Self {
            n,
            m,
            f: vec![0.0; n],
            g: vec![0.0; n * m],
            k: vec![0.0; m],
            sigma: vec![0.0; n * n],
            df: vec![0.0; n * n],
            dk: vec![0.0; m * n],
            dg: vec![0.0; m * n * n],
            mat: vec![0.0; n * n],
            v1: vec![0.0; n],
            v2: vec![0.0; n],
            held: vec![0.0; n],
            cur: vec![0.0; n],
            next: vec![0.0; n],
            stages: [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
        }
    }
}

fn check_model<M: SystemModel + ?Sized>(model: &M, x0: &[f64]) -> Result<()> {
    if model.state_dim() == 0 || model.control_dim() == 0 {
        return Err(Error::ModelDefinition("dimensions must be positive".into()));
    }
    if x0.len() != model.state_dim() {
        return Err(Error::ModelDefinition(format!(
            "state has length {} but model declares n = {}",
            x0.len(),
            model.state_dim()
        )));
    }
    Ok(())
}

/// `out = state + [f(state) + g(state) κ(held)] h + ε σ(state) dW`.
///
/// The noise term is skipped entirely when `ε = 0` or `dw` is `None`, so the
/// zero-noise recursion is the sampled ODE bit for bit.
#[inline]
#[allow(clippy::too_many_arguments)]
fn sampled_step<M: SystemModel + ?Sized>(
    model: &M,
    ws: &mut Workspace,
    state: &[f64],
    held: &[f64],
    h: f64,
    dw: Option<&[f64]>,
    epsilon: f64,
    out: &mut [f64],
) {
    let (n, m) = (ws.n, ws.m);
    model.drift(state, &mut ws.f);
    model.control_matrix(state, &mut ws.g);
    model.control_law(held, &mut ws.k);
    mat_vec_into(&ws.g, n, m, &ws.k, &mut ws.v1);
    match dw {
        Some(dw) if epsilon != 0.0 => {
            model.diffusion(state, &mut ws.sigma);
            mat_vec_into(&ws.sigma, n, n, dw, &mut ws.v2);
            for i in 0..n {
                out[i] = state[i] + (ws.f[i] + ws.v1[i]) * h + epsilon * ws.v2[i];
            }
        }
        _ => {
            for i in 0..n {
                out[i] = state[i] + (ws.f[i] + ws.v1[i]) * h;
            }
        }
    }
}

/// One Euler–Maruyama step of the sampled SDE.
pub fn step_sampled_sde<M: SystemModel + ?Sized>(
    model: &M,
    state: &[f64],
    held_sample: &[f64],
    h: f64,
    dw: &[f64],
    epsilon: f64,
) -> Result<Vec<f64>> {
    check_model(model, state)?;
    let n = model.state_dim();
    if held_sample.len() != n || dw.len() != n {
        return Err(Error::ModelDefinition(format!(
            "held sample and increment must have length {n}"
        )));
    }
    if !(h > 0.0) {
        return Err(Error::Argument(format!("step must be positive, got {h}")));
    }
    let mut ws = Workspace::new(model);
    let mut out = vec![0.0; n];
    sampled_step(
        model,
        &mut ws,
        state,
        held_sample,
        h,
        Some(dw),
        epsilon,
        &mut out,
    );
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence { node: 1, time: h });
    }
    Ok(out)
}

#[inline]
fn finite_or_diverged(x: &[f64], grid: &TimeGrid, node: usize) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Divergence {
            node,
            time: grid.nodes()[node],
        })
    }
}

/// Sampled recursion over the whole grid; `path = None` means `ε = 0`.
pub(crate) fn run_sampled<M: SystemModel + ?Sized>(
    model: &M,
    ws: &mut Workspace,
    grid: &TimeGrid,
    x0: &[f64],
    epsilon: f64,
    path: Option<&BrownianPath<'_>>,
) -> Result<StateSeries> {
    let n = model.state_dim();
    let mut series = StateSeries::with_capacity(n, grid.len());
    series.push(x0);
    let mut cur = core::mem::take(&mut ws.cur);
    let mut held = core::mem::take(&mut ws.held);
    let mut next = core::mem::take(&mut ws.next);
    cur.copy_from_slice(x0);
    let sample_index = grid.sample_index();
    let mut result = Ok(());
    for (i, &sample) in sample_index.iter().enumerate().take(grid.step_count()) {
        series.copy_node_into(sample, &mut held);
        let dw = path.map(|p| p.row(i));
        sampled_step(model, ws, &cur, &held, grid.step(i), dw, epsilon, &mut next);
        if let Err(e) = finite_or_diverged(&next, grid, i + 1) {
            result = Err(e);
            break;
        }
        series.push(&next);
        core::mem::swap(&mut cur, &mut next);
    }
    ws.cur = cur;
    ws.held = held;
    ws.next = next;
    result.map(|_| series)
}

fn check_path<M: SystemModel + ?Sized>(
    model: &M,
    config: &SimulationConfig,
    path: &BrownianPath<'_>,
) -> Result<()> {
    config.validate()?;
    check_model(model, &config.x0)?;
    config.check_grid(path.grid())?;
    if path.dim() != model.state_dim() {
        return Err(Error::ModelDefinition(format!(
            "noise dimension {} differs from state dimension {}",
            path.dim(),
            model.state_dim()
        )));
    }
    Ok(())
}

pub fn simulate_sampled_sde<M: SystemModel + ?Sized>(
    model: &M,
    config: &SimulationConfig,
    path: &BrownianPath<'_>,
) -> Result<StateSeries> {
    check_path(model, config, path)?;
    let mut ws = Workspace::new(model);
    run_sampled(
        model,
        &mut ws,
        path.grid(),
        &config.x0,
        config.epsilon,
        Some(path),
    )
}

pub fn simulate_sampled_ode<M: SystemModel + ?Sized>(
    model: &M,
    config: &SimulationConfig,
) -> Result<StateSeries> {
    let grid = config.grid()?;
    check_model(model, &config.x0)?;
    let mut ws = Workspace::new(model);
    run_sampled(model, &mut ws, &grid, &config.x0, 0.0, None)
}

/// `F(x) = f(x) + g(x) κ(x)` into `out`.
#[inline]
fn closed_loop<M: SystemModel + ?Sized>(model: &M, ws: &mut Workspace, x: &[f64], out: &mut [f64]) {
    model.drift(x, &mut ws.f);
    model.control_matrix(x, &mut ws.g);
    model.control_law(x, &mut ws.k);
    mat_vec_into(&ws.g, ws.n, ws.m, &ws.k, out);
    for (o, f) in out.iter_mut().zip(&ws.f) {
        *o += f;
    }
}

pub(crate) fn run_limit<M: SystemModel + ?Sized>(
    model: &M,
    ws: &mut Workspace,
    grid: &TimeGrid,
    x0: &[f64],
    scheme: LimitScheme,
) -> Result<StateSeries> {
    let n = model.state_dim();
    let mut series = StateSeries::with_capacity(n, grid.len());
    series.push(x0);
    let mut cur = x0.to_vec();
    let mut tmp = vec![0.0; n];
    let mut stages = core::mem::take(&mut ws.stages);
    let mut result = Ok(());
    for i in 0..grid.step_count() {
        let h = grid.step(i);
        match scheme {
            LimitScheme::Euler => {
                closed_loop(model, ws, &cur, &mut stages[0]);
                for j in 0..n {
                    cur[j] += h * stages[0][j];
                }
            }
            LimitScheme::Rk4 => {
                closed_loop(model, ws, &cur, &mut stages[0]);
                for j in 0..n {
                    tmp[j] = cur[j] + 0.5 * h * stages[0][j];
                }
                closed_loop(model, ws, &tmp, &mut stages[1]);
                for j in 0..n {
                    tmp[j] = cur[j] + 0.5 * h * stages[1][j];
                }
                closed_loop(model, ws, &tmp, &mut stages[2]);
                for j in 0..n {
                    tmp[j] = cur[j] + h * stages[2][j];
                }
                closed_loop(model, ws, &tmp, &mut stages[3]);
                for j in 0..n {
                    cur[j] += h / 6.0
                        * (stages[0][j] + 2.0 * stages[1][j] + 2.0 * stages[2][j] + stages[3][j]);
                }
            }
        }
        if let Err(e) = finite_or_diverged(&cur, grid, i + 1) {
            result = Err(e);
            break;
        }
        series.push(&cur);
    }
    ws.stages = stages;
    result.map(|_| series)
}

/// Limiting ODE `ẋ = f(x) + g(x) κ(x)` on the configuration's grid, with
/// the configured scheme.
pub fn simulate_limit_ode<M: SystemModel + ?Sized>(
    model: &M,
    config: &SimulationConfig,
) -> Result<StateSeries> {
    let grid = config.grid()?;
    check_model(model, &config.x0)?;
    let mut ws = Workspace::new(model);
    run_limit(model, &mut ws, &grid, &config.x0, config.limit_scheme)
}

fn check_regime_constant(c: f64) -> Result<()> {
    if c >= 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "regime constant must be finite and nonnegative, got {c}"
        )))
    }
}

/// Effective drift `−(c/2) gDκ(x) [f(x) + g(x) κ(x)]`.
pub fn effective_drift<M: SystemModel + ?Sized>(model: &M, x: &[f64], c: f64) -> Result<Vec<f64>> {
    check_regime_constant(c)?;
    check_model(model, x)?;
    let mut ws = Workspace::new(model);
    let mut out = vec![0.0; model.state_dim()];
    effective_drift_into(model, &mut ws, x, c, &mut out);
    Ok(out)
}

/// As [`effective_drift`]; leaves `ws.mat` holding `gDκ(x)` when `c ≠ 0`.
fn effective_drift_into<M: SystemModel + ?Sized>(
    model: &M,
    ws: &mut Workspace,
    x: &[f64],
    c: f64,
    out: &mut [f64],
) {
    if c == 0.0 {
        out.fill(0.0);
        return;
    }
    let (n, m) = (ws.n, ws.m);
    let mut field = core::mem::take(&mut ws.v2);
    closed_loop(model, ws, x, &mut field);
    // ws.g still holds g(x)
    model.control_law_jacobian(x, &mut ws.dk);
    mat_mul_into(&ws.g, &ws.dk, n, m, n, &mut ws.mat);
    mat_vec_into(&ws.mat, n, n, &field, out);
    for o in out.iter_mut() {
        *o *= -0.5 * c;
    }
    ws.v2 = field;
}

/// `A(x) = Df(x) + gDκ(x) + Σᵢ Dgᵢ(x) κᵢ(x)`.
pub fn fluctuation_drift_matrix<M: SystemModel + ?Sized>(model: &M, x: &[f64]) -> Result<Matrix> {
    check_model(model, x)?;
    let n = model.state_dim();
    let mut ws = Workspace::new(model);
    let mut out = Matrix::zeros(n, n);
    fluctuation_matrix_into(model, &mut ws, x, out.as_mut_slice());
    Ok(out)
}

fn fluctuation_matrix_into<M: SystemModel + ?Sized>(
    model: &M,
    ws: &mut Workspace,
    x: &[f64],
    out: &mut [f64],
) {
    let (n, m) = (ws.n, ws.m);
    model.drift_jacobian(x, &mut ws.df);
    model.control_matrix(x, &mut ws.g);
    model.control_law(x, &mut ws.k);
    model.control_law_jacobian(x, &mut ws.dk);
    model.control_matrix_jacobians(x, &mut ws.dg);
    mat_mul_into(&ws.g, &ws.dk, n, m, n, out);
    for (o, d) in out.iter_mut().zip(&ws.df) {
        *o += d;
    }
    for i in 0..m {
        let block = &ws.dg[i * n * n..(i + 1) * n * n];
        for (o, d) in out.iter_mut().zip(block) {
            *o += d * ws.k[i];
        }
    }
}

/// Euler–Maruyama for `dZ = [A(x_t) Z + b(x_t)] dt + σ(x_t) dW`, `Z₀ = 0`.
pub(crate) fn run_fluctuation<M: SystemModel + ?Sized>(
    model: &M,
    ws: &mut Workspace,
    grid: &TimeGrid,
    x_series: &StateSeries,
    c: f64,
    path: &BrownianPath<'_>,
) -> Result<StateSeries> {
    let n = model.state_dim();
    let mut series = StateSeries::with_capacity(n, grid.len());
    let mut z = vec![0.0; n];
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    let mut az = vec![0.0; n];
    let mut noise = vec![0.0; n];
    let mut sigma = vec![0.0; n * n];
    series.push(&z);
    for i in 0..grid.step_count() {
        let x = x_series.node(i);
        let h = grid.step(i);
        fluctuation_matrix_into(model, ws, x, &mut a);
        effective_drift_into(model, ws, x, c, &mut b);
        model.diffusion(x, &mut sigma);
        mat_vec_into(&a, n, n, &z, &mut az);
        mat_vec_into(&sigma, n, n, path.row(i), &mut noise);
        for j in 0..n {
            z[j] += (az[j] + b[j]) * h + noise[j];
        }
        finite_or_diverged(&z, grid, i + 1)?;
        series.push(&z);
    }
    Ok(series)
}

pub fn simulate_fluctuation_sde<M: SystemModel + ?Sized>(
    model: &M,
    config: &SimulationConfig,
    x_series: &StateSeries,
    path: &BrownianPath<'_>,
) -> Result<StateSeries> {
    check_path(model, config, path)?;
    let c = config.regime.constant().ok_or_else(|| {
        Error::Precondition("the fluctuation limit is not defined in regime 3 (c = ∞)".into())
    })?;
    check_regime_constant(c)?;
    if x_series.len() != path.grid().len() || x_series.dim() != model.state_dim() {
        return Err(Error::Argument(format!(
            "limit series has {} nodes of dimension {}, grid has {} nodes",
            x_series.len(),
            x_series.dim(),
            path.grid().len()
        )));
    }
    let mut ws = Workspace::new(model);
    run_fluctuation(model, &mut ws, path.grid(), x_series, c, path)
}

/// `(a − b) / scale` node by node.
fn rescaled_difference(a: &StateSeries, b: &StateSeries, scale: f64) -> StateSeries {
    let data = a
        .as_flat()
        .iter()
        .zip(b.as_flat())
        .map(|(x, y)| (x - y) / scale)
        .collect();
    StateSeries { dim: a.dim, data }
}

/// Runs every solver on one grid and one noise path. The limit ODE uses
/// Euler so that `X − x` carries no scheme mismatch.
pub fn simulate_coupled<'g, M: SystemModel + ?Sized>(
    model: &M,
    config: &SimulationConfig,
    path: &BrownianPath<'g>,
) -> Result<TrajectoryBundle<'g>> {
    check_path(model, config, path)?;
    if config.epsilon <= 0.0 {
        return Err(Error::Precondition(
            "coupled fluctuation study requires epsilon > 0".into(),
        ));
    }
    let grid = path.grid();
    let mut ws = Workspace::new(model);
    let x_sde = run_sampled(model, &mut ws, grid, &config.x0, config.epsilon, Some(path))?;
    let x_sampled_ode = run_sampled(model, &mut ws, grid, &config.x0, 0.0, None)?;
    let x_limit = run_limit(model, &mut ws, grid, &config.x0, LimitScheme::Euler)?;
    let (z_limit, z_rescaled, rescaling) = match config.regime {
        Regime::Finite(c) => {
            check_regime_constant(c)?;
            let z = run_fluctuation(model, &mut ws, grid, &x_limit, c, path)?;
            (
                Some(z),
                rescaled_difference(&x_sde, &x_limit, config.epsilon),
                Rescaling::Epsilon,
            )
        }
        Regime::Infinite => (
            None,
            rescaled_difference(&x_sde, &x_limit, config.delta),
            Rescaling::Delta,
        ),
    };
    Ok(TrajectoryBundle {
        grid,
        epsilon: config.epsilon,
        x_sde,
        x_limit,
        x_sampled_ode: Some(x_sampled_ode),
        z_limit,
        z_rescaled: Some(z_rescaled),
        rescaling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_pendulum, builtin_scalar_linear};
    use crate::noise::generate_path;
    use proptest::prelude::*;

    /// `f ≡ 0`, `g ≡ 0`, `κ ≡ 0`, `σ = I` in one dimension.
    struct PureNoise;

    impl SystemModel for PureNoise {
        fn state_dim(&self) -> usize {
            1
        }
        fn control_dim(&self) -> usize {
            1
        }
        fn drift(&self, _x: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
        fn control_matrix(&self, _x: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
        fn control_law(&self, _x: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
    }

    /// Scalar linear model with `σ ≡ 0`.
    struct Quiet(crate::model::ScalarLinear);

    impl SystemModel for Quiet {
        fn state_dim(&self) -> usize {
            1
        }
        fn control_dim(&self) -> usize {
            1
        }
        fn drift(&self, x: &[f64], out: &mut [f64]) {
            self.0.drift(x, out)
        }
        fn control_matrix(&self, x: &[f64], out: &mut [f64]) {
            self.0.control_matrix(x, out)
        }
        fn control_law(&self, x: &[f64], out: &mut [f64]) {
            self.0.control_law(x, out)
        }
        fn diffusion(&self, _x: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
    }

    /// `ẋ = x²` blows up in finite time.
    struct Blowup;

    impl SystemModel for Blowup {
        fn state_dim(&self) -> usize {
            1
        }
        fn control_dim(&self) -> usize {
            1
        }
        fn drift(&self, x: &[f64], out: &mut [f64]) {
            out[0] = x[0] * x[0];
        }
        fn control_matrix(&self, _x: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
        fn control_law(&self, _x: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
    }

    #[test]
    fn single_step_examples() {
        let m = builtin_scalar_linear(0.0, 1.0);
        let x = step_sampled_sde(&m, &[1.0], &[1.0], 0.1, &[0.3], 0.0).unwrap();
        assert!((x[0] - 0.9).abs() < 1e-15);

        let p = builtin_pendulum();
        let det = step_sampled_sde(&p, &[0.4, -0.2], &[0.5, 0.1], 0.05, &[0.0, 0.0], 0.7).unwrap();
        let ode = step_sampled_sde(&p, &[0.4, -0.2], &[0.5, 0.1], 0.05, &[0.3, -0.1], 0.0).unwrap();
        assert_eq!(det, ode);

        let x = step_sampled_sde(&PureNoise, &[2.0], &[5.0], 0.1, &[0.25], 1.0).unwrap();
        assert_eq!(x, vec![2.25]);

        assert!(matches!(
            step_sampled_sde(&m, &[1.0], &[1.0], 0.0, &[0.0], 0.0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn hold_update_recursion() {
        let m = builtin_scalar_linear(0.0, 1.0);
        let cfg = SimulationConfig::new(0.0, 0.5, 1.0, 0.5, vec![1.0]);
        let x = simulate_sampled_ode(&m, &cfg).unwrap();
        assert_eq!(x.as_flat(), &[1.0, 0.5, 0.25]);
    }

    #[test]
    fn long_period_holds_initial_state() {
        // δ ≥ T: κ always sees x₀, so ẋ = −k x₀ is integrated linearly
        let m = builtin_scalar_linear(0.0, 1.0);
        let cfg = SimulationConfig::new(0.0, 2.0, 1.0, 0.25, vec![1.0]);
        let x = simulate_sampled_ode(&m, &cfg).unwrap();
        assert_eq!(x.as_flat(), &[1.0, 0.75, 0.5, 0.25, 0.0]);
    }

    #[test]
    fn zero_noise_sde_is_sampled_ode() {
        let p = builtin_pendulum();
        let cfg = SimulationConfig::new(0.0, 0.0625, 5.0, 0.03, vec![1.0, 0.0]);
        let grid = cfg.grid().unwrap();
        let path = generate_path(&grid, 2, 3, 0).unwrap();
        let sde = simulate_sampled_sde(&p, &cfg, &path).unwrap();
        let ode = simulate_sampled_ode(&p, &cfg).unwrap();
        assert_eq!(sde, ode);
    }

    #[test]
    fn unforced_plain_euler() {
        // κ ≡ 0 reduces the sampled ODE to Euler on ẋ = f(x)
        let m = builtin_scalar_linear(-1.5, 0.0);
        let cfg = SimulationConfig::new(0.0, 0.1, 1.0, 0.1, vec![2.0]);
        let grid = cfg.grid().unwrap();
        let x = simulate_sampled_ode(&m, &cfg).unwrap();
        let mut y = 2.0;
        for i in 0..x.len() {
            assert_eq!(x.node(i)[0], y);
            if i < grid.step_count() {
                y += -1.5 * y * grid.step(i);
            }
        }
    }

    #[test]
    fn limit_ode_exponential() {
        let m = builtin_scalar_linear(2.0, 1.0);
        let cfg = SimulationConfig::new(0.1, 0.1, 1.0, 1e-3, vec![1.0]);
        let x = simulate_limit_ode(&m, &cfg).unwrap();
        assert!((x.last()[0] - core::f64::consts::E).abs() < 1e-6);
    }

    #[test]
    fn limit_ode_zero_field_is_constant() {
        let cfg = SimulationConfig::new(0.1, 0.1, 1.0, 0.01, vec![0.3]);
        let x = simulate_limit_ode(&PureNoise, &cfg).unwrap();
        assert!(x.as_flat().iter().all(|v| *v == 0.3));
    }

    #[test]
    fn effective_drift_examples() {
        let m = builtin_scalar_linear(2.0, 1.0);
        assert_eq!(effective_drift(&m, &[1.0], 1.0).unwrap(), vec![0.5]);
        assert_eq!(effective_drift(&m, &[1.0], 0.0).unwrap(), vec![0.0]);
        let p = builtin_pendulum();
        assert_eq!(
            effective_drift(&p, &[0.0, 0.0], 3.0).unwrap(),
            vec![0.0, 0.0]
        );
        assert!(effective_drift(&m, &[1.0], f64::INFINITY).is_err());
        assert!(effective_drift(&m, &[1.0], -1.0).is_err());
    }

    #[test]
    fn fluctuation_matrix_examples() {
        let m = builtin_scalar_linear(2.0, 1.0);
        assert_eq!(
            fluctuation_drift_matrix(&m, &[0.4]).unwrap().as_slice(),
            &[1.0]
        );
        let a = fluctuation_drift_matrix(&builtin_pendulum(), &[0.0, 0.0]).unwrap();
        let expected = [0.0, 1.0, -1.0, -1.13];
        for (x, y) in a.as_slice().iter().zip(expected) {
            assert!((x - y).abs() < 1e-15, "{:?}", a);
        }
    }

    #[test]
    fn fluctuation_without_noise_or_drift_stays_zero() {
        let m = Quiet(builtin_scalar_linear(2.0, 1.0));
        let cfg =
            SimulationConfig::new(0.1, 0.1, 1.0, 0.01, vec![1.0]).with_regime(Regime::Finite(0.0));
        let grid = cfg.grid().unwrap();
        let path = generate_path(&grid, 1, 0, 0).unwrap();
        let x = simulate_limit_ode(&m, &cfg.clone().with_limit_scheme(LimitScheme::Euler)).unwrap();
        let z = simulate_fluctuation_sde(&m, &cfg, &x, &path).unwrap();
        assert!(z.as_flat().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn fluctuation_pure_integrator_is_brownian_motion() {
        let m = builtin_scalar_linear(0.0, 0.0);
        let cfg = SimulationConfig::new(0.1, 0.1, 1.0, 0.01, vec![1.0]);
        let grid = cfg.grid().unwrap();
        let path = generate_path(&grid, 1, 5, 2).unwrap();
        let x = simulate_limit_ode(&m, &cfg).unwrap();
        let z = simulate_fluctuation_sde(&m, &cfg, &x, &path).unwrap();
        let mut w = 0.0;
        for i in 0..grid.step_count() {
            w += path.increment_between(i).unwrap()[0];
            assert_eq!(z.node(i + 1)[0], w);
        }
    }

    #[test]
    fn fluctuation_refuses_regime_three() {
        let m = builtin_scalar_linear(1.0, 1.0);
        let cfg =
            SimulationConfig::new(0.1, 0.1, 1.0, 0.01, vec![1.0]).with_regime(Regime::Infinite);
        let grid = cfg.grid().unwrap();
        let path = generate_path(&grid, 1, 0, 0).unwrap();
        let x = simulate_limit_ode(&m, &cfg).unwrap();
        assert!(matches!(
            simulate_fluctuation_sde(&m, &cfg, &x, &path),
            Err(Error::Precondition(_))
        ));
        let b = simulate_coupled(&m, &cfg, &path).unwrap();
        assert!(b.z_limit.is_none());
        assert_eq!(b.rescaling, Rescaling::Delta);
        let zr = b.z_rescaled.unwrap();
        for i in 0..zr.len() {
            assert_eq!(
                zr.node(i)[0],
                (b.x_sde.node(i)[0] - b.x_limit.node(i)[0]) / 0.1
            );
        }
    }

    #[test]
    fn coupled_rescaled_matches_definition() {
        let p = builtin_pendulum();
        let cfg = SimulationConfig::new(0.125, 0.0625, 3.0, 0.01, vec![1.0, 0.0]);
        let grid = cfg.grid().unwrap();
        let path = generate_path(&grid, 2, 11, 1).unwrap();
        let b = simulate_coupled(&p, &cfg, &path).unwrap();
        let zr = b.z_rescaled.as_ref().unwrap();
        for i in 0..grid.len() {
            for j in 0..2 {
                let d = (b.x_sde.node(i)[j] - b.x_limit.node(i)[j]) / 0.125;
                assert_eq!(zr.node(i)[j], d);
            }
        }
        assert_eq!(b.x_sde.node(0), &[1.0, 0.0]);
        assert_eq!(b.z_limit.as_ref().unwrap().node(0), &[0.0, 0.0]);
        assert_eq!(b.x_sampled_ode.as_ref().unwrap().node(0), &[1.0, 0.0]);
    }

    #[test]
    fn coupled_requires_noise() {
        let m = builtin_scalar_linear(1.0, 1.0);
        let cfg =
            SimulationConfig::new(0.0, 0.1, 1.0, 0.1, vec![1.0]).with_regime(Regime::Finite(1.0));
        let grid = cfg.grid().unwrap();
        let path = generate_path(&grid, 1, 0, 0).unwrap();
        assert!(matches!(
            simulate_coupled(&m, &cfg, &path),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn mismatched_grid_rejected() {
        let m = builtin_scalar_linear(1.0, 1.0);
        let cfg = SimulationConfig::new(0.1, 0.1, 1.0, 0.1, vec![1.0]);
        let other = build_grid(1.0, 0.1, 0.2, GridMode::Union).unwrap();
        let path = generate_path(&other, 1, 0, 0).unwrap();
        assert!(matches!(
            simulate_sampled_sde(&m, &cfg, &path),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn divergence_reports_first_bad_node() {
        let cfg = SimulationConfig::new(0.0, 1.0, 10.0, 0.5, vec![1.0]);
        match simulate_sampled_ode(&Blowup, &cfg) {
            Err(Error::Divergence { node, .. }) => assert!(node > 1 && node <= 20),
            other => panic!("expected divergence, got {other:?}"),
        }
        assert!(matches!(
            simulate_limit_ode(&Blowup, &cfg),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn kappa_eps_and_eps0() {
        let cfg = SimulationConfig::new(0.25, 0.0625, 1.0, 0.01, vec![0.0])
            .with_regime(Regime::Finite(1.0));
        assert_eq!(cfg.kappa_eps(), Some(0.75));
        assert!(cfg.within_eps0_bound());
        assert_eq!(cfg.clone().with_regime(Regime::Infinite).kappa_eps(), None);
        assert_eq!(Regime::Finite(0.0).number(), 1);
        assert_eq!(Regime::Finite(2.0).number(), 2);
        assert_eq!(Regime::Infinite.number(), 3);
    }

    #[test]
    fn euler_refinement_ratio() {
        // halving dt halves the terminal error of Euler on ẋ = (a − k) x
        let m = builtin_scalar_linear(2.0, 1.0);
        let errors: Vec<f64> = [0.02, 0.01, 0.005, 0.0025]
            .iter()
            .map(|&dt| {
                let cfg = SimulationConfig::new(0.1, 0.1, 1.0, dt, vec![1.0])
                    .with_limit_scheme(LimitScheme::Euler);
                (simulate_limit_ode(&m, &cfg).unwrap().last()[0] - core::f64::consts::E).abs()
            })
            .collect();
        for w in errors.windows(2) {
            let r = w[0] / w[1];
            assert!((1.6..=2.4).contains(&r), "{errors:?}");
        }
    }

    proptest! {
        #[test]
        fn noise_enters_affinely(seed in 0u64..1000, a in -1.0f64..1.0, k in 0.0f64..2.0, c in 0.0f64..2.0) {
            let p = builtin_pendulum();
            let cfg = SimulationConfig::new(0.1, 0.05, 2.0, 0.02, vec![1.0 + a, k - 1.0]).with_regime(Regime::Finite(c));
            let grid = cfg.grid().unwrap();
            let path = generate_path(&grid, 2, seed, 0).unwrap();
            let doubled = BrownianPath::from_increments(&grid, 2, seed, path.increments().iter().map(|v| 2.0 * v).collect()).unwrap();
            let zero = BrownianPath::from_increments(&grid, 2, seed, vec![0.0; path.increments().len()]).unwrap();
            let x = simulate_limit_ode(&p, &cfg).unwrap();
            let z1 = simulate_fluctuation_sde(&p, &cfg, &x, &path).unwrap();
            let z2 = simulate_fluctuation_sde(&p, &cfg, &x, &doubled).unwrap();
            let z0 = simulate_fluctuation_sde(&p, &cfg, &x, &zero).unwrap();
            for ((v2, v1), v0) in z2.as_flat().iter().zip(z1.as_flat()).zip(z0.as_flat()) {
                let expected = 2.0 * v1 - v0;
                prop_assert!((v2 - expected).abs() <= 1e-12 * (1.0 + expected.abs()), "{} vs {}", v2, expected);
            }
        }

        #[test]
        fn hold_reads_exact_sample_state(dt in 0.01f64..0.2, delta in 0.01f64..0.3) {
            // a model whose control is the held state itself exposes the hold
            let m = builtin_scalar_linear(0.0, -1.0);
            let cfg = SimulationConfig::new(0.0, delta, 1.0, dt, vec![1.0]);
            let grid = cfg.grid().unwrap();
            let x = simulate_sampled_ode(&m, &cfg).unwrap();
            for i in 0..grid.step_count() {
                let held = x.node(grid.sample_index()[i])[0];
                let t_held = grid.nodes()[grid.sample_index()[i]];
                prop_assert_eq!(t_held, crate::time_grid::pi_delta(grid.nodes()[i], delta).unwrap());
                prop_assert_eq!(x.node(i + 1)[0], x.node(i)[0] + held * grid.step(i));
            }
        }
    }
}
