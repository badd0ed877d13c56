//! Experiment configuration documents (TOML).
//!
//! ```toml
//! seed = 7
//! n_paths = 1000
//!
//! [model]
//! name = "pendulum"            # or "scalar-linear"
//! params = {}                  # scalar-linear: { a = 2.0, k = 1.0 }
//!
//! [simulation]
//! epsilon = 0.03125
//! delta = 0.0625
//! horizon = 25.0
//! dt = 0.0977
//! x0 = [1.0, 0.0]
//! grid_mode = "grid-snap"      # default "union"
//! regime_c = "per-cell"        # number, "inf", or "per-cell"
//!
//! [sweep]
//! epsilons = [0.5, 0.25]
//! pairs = [[0.25, 0.25]]
//!
//! [outputs]
//! dir = "out"
//! tables = ["summaries", "ratefit", "trajectories"]
//! trajectory_path_id = 0
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use sampled_sde_core::{GridMode, Regime, SimulationConfig, SystemModel};
use toml::{Table as TomlTable, Value};

use crate::error::ConfigError;
use crate::models::{lookup_model, BuiltinModel};

pub const DEFAULT_N_PATHS: u64 = 1000;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_OUT_DIR: &str = "out";

/// How each cell's regime constant is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegimeSetting {
    Fixed(Regime),
    /// `c = δ/ε` in every cell.
    PerCell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableSelection {
    pub summaries: bool,
    pub ratefit: bool,
    pub trajectories: bool,
    /// Binary dump of the trajectory path's increments.
    pub noise: bool,
}

impl Default for TableSelection {
    fn default() -> Self {
        Self {
            summaries: true,
            ratefit: true,
            trajectories: false,
            noise: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub tables: TableSelection,
    pub trajectory_path_id: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model_name: String,
    pub model_params: BTreeMap<String, f64>,
    pub model: BuiltinModel,
    /// Shared settings; `epsilon`, `delta` and `regime` are those of the
    /// first cell.
    pub simulation: SimulationConfig,
    pub regime: RegimeSetting,
    /// `(ε, δ)` per cell, in run order.
    pub cells: Vec<(f64, f64)>,
    pub n_paths: u64,
    pub seed: u64,
    pub outputs: OutputSpec,
}

impl ExperimentConfig {
    pub fn regime_for(&self, epsilon: f64, delta: f64) -> Regime {
        match self.regime {
            RegimeSetting::Fixed(r) => r,
            RegimeSetting::PerCell if epsilon > 0.0 => Regime::Finite(delta / epsilon),
            RegimeSetting::PerCell => Regime::Infinite,
        }
    }

    pub fn cell_config(&self, index: usize) -> SimulationConfig {
        let (epsilon, delta) = self.cells[index];
        let mut cfg = self.simulation.clone();
        cfg.epsilon = epsilon;
        cfg.delta = delta;
        cfg.regime = self.regime_for(epsilon, delta);
        cfg
    }
}

pub fn parse_grid_mode(s: &str) -> Option<GridMode> {
    match s {
        "union" => Some(GridMode::Union),
        "grid-snap" => Some(GridMode::GridSnap),
        _ => None,
    }
}

struct Reader {
    problems: Vec<String>,
}

impl Reader {
    fn flag(&mut self, msg: String) {
        self.problems.push(msg);
    }

    fn unknown_keys(&mut self, table: &TomlTable, prefix: &str, known: &[&str]) {
        for key in table.keys() {
            if !known.contains(&key.as_str()) {
                let path = if prefix.is_empty() {
                    key.clone()
                } else {
                    format!("{prefix}.{key}")
                };
                self.flag(format!("{path}: unknown key"));
            }
        }
    }

    fn section<'a>(&mut self, root: &'a TomlTable, key: &str) -> Option<&'a TomlTable> {
        match root.get(key) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                self.flag(format!("{key}: expected a table"));
                None
            }
        }
    }

    fn number(&mut self, path: &str, v: &Value) -> Option<f64> {
        match v {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.flag(format!("{path}: expected a number"));
                None
            }
        }
    }

    fn number_where(
        &mut self,
        path: &str,
        v: &Value,
        ok: fn(f64) -> bool,
        what: &str,
    ) -> Option<f64> {
        let x = self.number(path, v)?;
        if ok(x) {
            Some(x)
        } else {
            self.flag(format!("{path}: must be {what}, got {x}"));
            None
        }
    }

    fn count(&mut self, path: &str, v: &Value, min: i64) -> Option<u64> {
        match v {
            Value::Integer(i) if *i >= min => Some(*i as u64),
            Value::Integer(i) => {
                self.flag(format!("{path}: must be at least {min}, got {i}"));
                None
            }
            _ => {
                self.flag(format!("{path}: expected an integer"));
                None
            }
        }
    }

    fn numbers(&mut self, path: &str, v: &Value) -> Option<Vec<f64>> {
        let Value::Array(items) = v else {
            self.flag(format!("{path}: expected an array of numbers"));
            return None;
        };
        let before = self.problems.len();
        let out: Vec<f64> = items
            .iter()
            .enumerate()
            .filter_map(|(i, item)| self.number(&format!("{path}[{i}]"), item))
            .collect();
        (self.problems.len() == before).then_some(out)
    }
}

fn is_nonnegative(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

fn is_positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Parses and validates a config document, applying defaults. All problems
/// found are reported together.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let root: TomlTable = text.parse().map_err(|e: toml::de::Error| ConfigError {
        problems: vec![format!("syntax: {}", e.message())],
    })?;
    let mut r = Reader {
        problems: Vec::new(),
    };
    r.unknown_keys(
        &root,
        "",
        &["model", "simulation", "sweep", "n_paths", "seed", "outputs"],
    );

    let mut missing = Vec::new();

    // model
    let model_t = r.section(&root, "model");
    let mut model_name = None;
    let mut model_params = BTreeMap::new();
    if let Some(t) = model_t {
        r.unknown_keys(t, "model", &["name", "params"]);
        match t.get("name") {
            Some(Value::String(s)) => model_name = Some(s.clone()),
            Some(_) => r.flag("model.name: expected a string".into()),
            None => {}
        }
        match t.get("params") {
            Some(Value::Table(p)) => {
                for (k, v) in p {
                    if let Some(x) =
                        r.number_where(&format!("model.params.{k}"), v, f64::is_finite, "finite")
                    {
                        model_params.insert(k.clone(), x);
                    }
                }
            }
            Some(_) => r.flag("model.params: expected a table".into()),
            None => {}
        }
    }
    if model_t.and_then(|t| t.get("name")).is_none() {
        missing.push("model.name");
    }
    let model = match &model_name {
        Some(name) => match lookup_model(name, &model_params) {
            Ok(m) => Some(m),
            Err(msgs) => {
                r.problems.extend(msgs);
                None
            }
        },
        None => None,
    };

    // simulation
    let sim_t = r.section(&root, "simulation");
    let empty = TomlTable::new();
    let sim = sim_t.unwrap_or(&empty);
    r.unknown_keys(
        sim,
        "simulation",
        &[
            "epsilon",
            "delta",
            "horizon",
            "dt",
            "x0",
            "grid_mode",
            "regime_c",
        ],
    );
    let mut required =
        |r: &mut Reader, key: &'static str, ok: fn(f64) -> bool, what: &str| -> Option<f64> {
            match sim.get(key) {
                Some(v) => r.number_where(&format!("simulation.{key}"), v, ok, what),
                None => {
                    missing.push(match key {
                        "epsilon" => "simulation.epsilon",
                        "delta" => "simulation.delta",
                        "horizon" => "simulation.horizon",
                        _ => "simulation.dt",
                    });
                    None
                }
            }
        };
    let epsilon = required(&mut r, "epsilon", is_nonnegative, "finite and >= 0");
    let delta = required(&mut r, "delta", is_positive, "finite and > 0");
    let horizon = required(&mut r, "horizon", is_positive, "finite and > 0");
    let dt = required(&mut r, "dt", is_positive, "finite and > 0");
    let x0 = match sim.get("x0") {
        Some(v) => r.numbers("simulation.x0", v),
        None => {
            missing.push("simulation.x0");
            None
        }
    };
    if let Some(x0) = &x0 {
        if x0.iter().any(|v| !v.is_finite()) {
            r.flag("simulation.x0: entries must be finite".into());
        }
        if let Some(m) = &model {
            if x0.len() != m.state_dim() {
                r.flag(format!(
                    "simulation.x0: has {} entries, model `{}` has state dimension {}",
                    x0.len(),
                    model_name.as_deref().unwrap_or(""),
                    m.state_dim()
                ));
            }
        }
    }
    let grid_mode = match sim.get("grid_mode") {
        None => Some(GridMode::Union),
        Some(Value::String(s)) => parse_grid_mode(s).or_else(|| {
            r.flag(format!(
                "simulation.grid_mode: expected \"union\" or \"grid-snap\", got \"{s}\""
            ));
            None
        }),
        Some(_) => {
            r.flag("simulation.grid_mode: expected a string".into());
            None
        }
    };
    let regime_c = match sim.get("regime_c") {
        None => None,
        Some(Value::String(s)) if s == "inf" => Some(RegimeSetting::Fixed(Regime::Infinite)),
        Some(Value::String(s)) if s == "per-cell" => Some(RegimeSetting::PerCell),
        Some(Value::String(s)) => {
            r.flag(format!(
                "simulation.regime_c: expected a number, \"inf\" or \"per-cell\", got \"{s}\""
            ));
            None
        }
        Some(v) => r
            .number_where("simulation.regime_c", v, is_nonnegative, "finite and >= 0")
            .map(|c| RegimeSetting::Fixed(Regime::Finite(c))),
    };

    // sweep
    let mut sweep_cells = Vec::new();
    if let Some(t) = r.section(&root, "sweep") {
        r.unknown_keys(t, "sweep", &["epsilons", "pairs"]);
        if let Some(v) = t.get("epsilons") {
            if let Some(eps) = r.numbers("sweep.epsilons", v) {
                for (i, e) in eps.iter().enumerate() {
                    if !is_nonnegative(*e) {
                        r.flag(format!(
                            "sweep.epsilons[{i}]: must be finite and >= 0, got {e}"
                        ));
                    }
                }
                sweep_cells.extend(eps.into_iter().map(|e| (e, delta.unwrap_or(f64::NAN))));
            }
        }
        match t.get("pairs") {
            Some(Value::Array(items)) => {
                for (i, item) in items.iter().enumerate() {
                    let path = format!("sweep.pairs[{i}]");
                    match r.numbers(&path, item) {
                        Some(p) if p.len() == 2 && is_nonnegative(p[0]) && is_positive(p[1]) => {
                            sweep_cells.push((p[0], p[1]))
                        }
                        Some(p) => r.flag(format!(
                            "{path}: expected [epsilon >= 0, delta > 0], got {p:?}"
                        )),
                        None => {}
                    }
                }
            }
            Some(_) => r.flag("sweep.pairs: expected an array of [epsilon, delta] pairs".into()),
            None => {}
        }
    }

    let n_paths = root
        .get("n_paths")
        .and_then(|v| r.count("n_paths", v, 1))
        .unwrap_or(DEFAULT_N_PATHS);
    let seed = root
        .get("seed")
        .and_then(|v| r.count("seed", v, 0))
        .unwrap_or(DEFAULT_SEED);

    // outputs
    let mut outputs = OutputSpec {
        dir: PathBuf::from(DEFAULT_OUT_DIR),
        tables: TableSelection::default(),
        trajectory_path_id: 0,
    };
    if let Some(t) = r.section(&root, "outputs") {
        r.unknown_keys(t, "outputs", &["dir", "tables", "trajectory_path_id"]);
        match t.get("dir") {
            Some(Value::String(s)) => outputs.dir = PathBuf::from(s),
            Some(_) => r.flag("outputs.dir: expected a string".into()),
            None => {}
        }
        match t.get("tables") {
            Some(Value::Array(items)) => {
                let mut sel = TableSelection {
                    summaries: false,
                    ratefit: false,
                    trajectories: false,
                    noise: false,
                };
                for (i, item) in items.iter().enumerate() {
                    match item.as_str() {
                        Some("summaries") => sel.summaries = true,
                        Some("ratefit") => sel.ratefit = true,
                        Some("trajectories") => sel.trajectories = true,
                        Some("noise") => sel.noise = true,
                        _ => r.flag(format!(
                            "outputs.tables[{i}]: expected one of \"summaries\", \"ratefit\", \"trajectories\", \"noise\""
                        )),
                    }
                }
                outputs.tables = sel;
            }
            Some(_) => r.flag("outputs.tables: expected an array of strings".into()),
            None => {}
        }
        if let Some(v) = t.get("trajectory_path_id") {
            if let Some(id) = r.count("outputs.trajectory_path_id", v, 0) {
                outputs.trajectory_path_id = id;
            }
        }
    }

    for key in missing {
        r.flag(format!("{key}: required key is missing"));
    }
    if !r.problems.is_empty() {
        return Err(ConfigError {
            problems: r.problems,
        });
    }

    // Every required value is present and valid past this point.
    let (epsilon, delta, horizon, dt) = (
        epsilon.unwrap(),
        delta.unwrap(),
        horizon.unwrap(),
        dt.unwrap(),
    );
    let cells = if sweep_cells.is_empty() {
        vec![(epsilon, delta)]
    } else {
        sweep_cells
    };
    let (e0, d0) = cells[0];
    let regime = regime_c.unwrap_or(RegimeSetting::Fixed(if e0 > 0.0 {
        Regime::Finite(d0 / e0)
    } else {
        Regime::Infinite
    }));
    let mut simulation =
        SimulationConfig::new(e0, d0, horizon, dt, x0.unwrap()).with_grid_mode(grid_mode.unwrap());
    let mut config = ExperimentConfig {
        model_name: model_name.unwrap(),
        model_params,
        model: model.unwrap(),
        simulation: simulation.clone(),
        regime,
        cells,
        n_paths,
        seed,
        outputs,
    };
    simulation.regime = config.regime_for(e0, d0);
    config.simulation = simulation;
    Ok(config)
}
