//! Registry of the builtin models addressable by name.

use std::collections::BTreeMap;

use sampled_sde_core::{
    builtin_pendulum, builtin_scalar_linear, JacobianSources, Pendulum, ScalarLinear, SystemModel,
};

pub const MODEL_NAMES: &[&str] = &["pendulum", "scalar-linear"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltinModel {
    Pendulum(Pendulum),
    ScalarLinear(ScalarLinear),
}

/// Resolves `name` with its parameters. Problems are returned as messages
/// keyed by config path.
pub fn lookup_model(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<BuiltinModel, Vec<String>> {
    let allowed: &[&str] = match name {
        "pendulum" => &[],
        "scalar-linear" => &["a", "k"],
        _ => {
            return Err(vec![format!(
                "model.name: unknown model `{name}` (known: {})",
                MODEL_NAMES.join(", ")
            )])
        }
    };
    let unknown: Vec<String> = params
        .keys()
        .filter(|k| !allowed.contains(&k.as_str()))
        .map(|k| format!("model.params.{k}: unknown parameter for `{name}`"))
        .collect();
    if !unknown.is_empty() {
        return Err(unknown);
    }
    Ok(match name {
        "pendulum" => BuiltinModel::Pendulum(builtin_pendulum()),
        _ => {
            let a = params.get("a").copied().unwrap_or(2.0);
            let k = params.get("k").copied().unwrap_or(1.0);
            BuiltinModel::ScalarLinear(builtin_scalar_linear(a, k))
        }
    })
}

/// Points on which `check-jacobians` compares derivatives: a 10×10 lattice on
/// `[-2, 2]²` for planar models, 21 points on `[-2, 2]` for scalar ones.
pub fn jacobian_test_points(model: &BuiltinModel) -> Vec<Vec<f64>> {
    match model.state_dim() {
        1 => (0..21).map(|i| vec![-2.0 + 0.2 * i as f64]).collect(),
        _ => {
            let axis: Vec<f64> = (0..10).map(|i| -2.0 + 4.0 * i as f64 / 9.0).collect();
            axis.iter()
                .flat_map(|&a| axis.iter().map(move |&b| vec![a, b]))
                .collect()
        }
    }
}

macro_rules! delegate {
    ($self:ident, $m:ident => $e:expr) => {
        match $self {
            BuiltinModel::Pendulum($m) => $e,
            BuiltinModel::ScalarLinear($m) => $e,
        }
    };
}

impl SystemModel for BuiltinModel {
    fn state_dim(&self) -> usize {
        delegate!(self, m => m.state_dim())
    }
    fn control_dim(&self) -> usize {
        delegate!(self, m => m.control_dim())
    }
    fn drift(&self, x: &[f64], out: &mut [f64]) {
        delegate!(self, m => m.drift(x, out))
    }
    fn control_matrix(&self, x: &[f64], out: &mut [f64]) {
        delegate!(self, m => m.control_matrix(x, out))
    }
    fn control_law(&self, x: &[f64], out: &mut [f64]) {
        delegate!(self, m => m.control_law(x, out))
    }
    fn diffusion(&self, x: &[f64], out: &mut [f64]) {
        delegate!(self, m => m.diffusion(x, out))
    }
    fn drift_jacobian(&self, x: &[f64], out: &mut [f64]) {
        delegate!(self, m => m.drift_jacobian(x, out))
    }
    fn control_law_jacobian(&self, x: &[f64], out: &mut [f64]) {
        delegate!(self, m => m.control_law_jacobian(x, out))
    }
    fn control_matrix_jacobians(&self, x: &[f64], out: &mut [f64]) {
        delegate!(self, m => m.control_matrix_jacobians(x, out))
    }
    fn jacobian_sources(&self) -> JacobianSources {
        delegate!(self, m => m.jacobian_sources())
    }
}
