//! System models: the drift `f`, control matrix `g`, control law `κ`,
//! diffusion `σ` and their Jacobians.
//!
//! Every map writes into a caller-provided buffer so the integrators can run
//! allocation-free in their inner loops. Matrices are row-major. Jacobians
//! default to central finite differences; models with closed-form
//! derivatives override them and report [`JacobianSource::Analytic`].

mod linear;
mod pendulum;

pub use linear::{builtin_scalar_linear, ScalarLinear};
pub use pendulum::{builtin_pendulum, Pendulum};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{mat_mul_into, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianSource {
    Analytic,
    FiniteDifference,
}

/// Where each derivative of a model comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JacobianSources {
    pub drift: JacobianSource,
    pub control_law: JacobianSource,
    pub control_matrix: JacobianSource,
}

impl JacobianSources {
    pub const ANALYTIC: Self = Self {
        drift: JacobianSource::Analytic,
        control_law: JacobianSource::Analytic,
        control_matrix: JacobianSource::Analytic,
    };
    pub const FINITE_DIFFERENCE: Self = Self {
        drift: JacobianSource::FiniteDifference,
        control_law: JacobianSource::FiniteDifference,
        control_matrix: JacobianSource::FiniteDifference,
    };
}

/// A controlled system `dX = [f(X) + g(X) κ(·)] dt + ε σ(X) dW`.
///
/// Implementations must be pure: equal inputs give bitwise-equal outputs,
/// and no interior state is mutated. All maps are total on `ℝⁿ`.
pub trait SystemModel {
    /// `n`
    fn state_dim(&self) -> usize;
    /// `m`
    fn control_dim(&self) -> usize;

    /// `f(x)`, length `n`.
    fn drift(&self, x: &[f64], out: &mut [f64]);
    /// `g(x)`, `n × m`.
    fn control_matrix(&self, x: &[f64], out: &mut [f64]);
    /// `κ(x)`, length `m`.
    fn control_law(&self, x: &[f64], out: &mut [f64]);

    /// `σ(x)`, `n × n`. Identity unless overridden.
    fn diffusion(&self, _x: &[f64], out: &mut [f64]) {
        let n = self.state_dim();
        out.fill(0.0);
        for i in 0..n {
            out[i * n + i] = 1.0;
        }
    }

    /// `Df(x)`, `n × n`.
    fn drift_jacobian(&self, x: &[f64], out: &mut [f64]) {
        let n = self.state_dim();
        central_difference(|y, o| self.drift(y, o), x, n, out);
    }

    /// `Dκ(x)`, `m × n`.
    fn control_law_jacobian(&self, x: &[f64], out: &mut [f64]) {
        let m = self.control_dim();
        central_difference(|y, o| self.control_law(y, o), x, m, out);
    }

    /// `Dg_i(x)` for each column `g_i`, stacked as `m` consecutive `n × n` blocks.
    fn control_matrix_jacobians(&self, x: &[f64], out: &mut [f64]) {
        let (n, m) = (self.state_dim(), self.control_dim());
        let mut full = vec![0.0; n * m * n];
        central_difference(|y, o| self.control_matrix(y, o), x, n * m, &mut full);
        restack_column_jacobians(&full, n, m, out);
    }

    fn jacobian_sources(&self) -> JacobianSources {
        JacobianSources::FINITE_DIFFERENCE
    }
}

/// Central-difference step `max(1, |x_j|) · eps^{1/3}`.
pub fn fd_step(xj: f64) -> f64 {
    f64::max(1.0, libm::fabs(xj)) * libm::cbrt(f64::EPSILON)
}

/// Jacobian of `map: ℝⁿ → ℝ^out_dim` by central differences, written
/// row-major into `out` (`out_dim × n`).
pub fn central_difference<F>(map: F, x: &[f64], out_dim: usize, out: &mut [f64])
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = x.len();
    let mut probe = x.to_vec();
    let mut plus = vec![0.0; out_dim];
    let mut minus = vec![0.0; out_dim];
    for j in 0..n {
        let h = fd_step(x[j]);
        probe[j] = x[j] + h;
        map(&probe, &mut plus);
        probe[j] = x[j] - h;
        map(&probe, &mut minus);
        probe[j] = x[j];
        // use the representable step to cut rounding in the denominator
        let width = (x[j] + h) - (x[j] - h);
        for r in 0..out_dim {
            out[r * n + j] = (plus[r] - minus[r]) / width;
        }
    }
}

/// Rearranges the Jacobian of vec(g) (rows indexed `r * m + i`) into one
/// `n × n` block per column `g_i`.
fn restack_column_jacobians(full: &[f64], n: usize, m: usize, out: &mut [f64]) {
    for i in 0..m {
        for r in 0..n {
            for j in 0..n {
                out[i * n * n + r * n + j] = full[(r * m + i) * n + j];
            }
        }
    }
}

/// `gDκ(x) = g(x) · Dκ(x)`, an `n × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GdkProduct(pub Matrix);

fn check_point_dim<M: SystemModel + ?Sized>(model: &M, x: &[f64]) -> Result<()> {
    if x.len() != model.state_dim() {
        return Err(Error::ModelDefinition(format!(
            "state has length {} but model declares n = {}",
            x.len(),
            model.state_dim()
        )));
    }
    if model.state_dim() == 0 || model.control_dim() == 0 {
        return Err(Error::ModelDefinition("dimensions must be positive".into()));
    }
    Ok(())
}

pub fn eval_gdk<M: SystemModel + ?Sized>(model: &M, x: &[f64]) -> Result<GdkProduct> {
    check_point_dim(model, x)?;
    let (n, m) = (model.state_dim(), model.control_dim());
    let mut g = vec![0.0; n * m];
    let mut dk = vec![0.0; m * n];
    model.control_matrix(x, &mut g);
    model.control_law_jacobian(x, &mut dk);
    let mut out = Matrix::zeros(n, n);
    mat_mul_into(&g, &dk, n, m, n, out.as_mut_slice());
    Ok(GdkProduct(out))
}

/// Result of [`check_jacobians`]: the largest relative deviation between the
/// model's Jacobians and central differences, per derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianReport {
    pub rel_tol: f64,
    pub points_checked: usize,
    pub drift_max_dev: f64,
    pub control_law_max_dev: f64,
    pub control_matrix_max_dev: f64,
}

impl JacobianReport {
    pub fn max_dev(&self) -> f64 {
        self.drift_max_dev
            .max(self.control_law_max_dev)
            .max(self.control_matrix_max_dev)
    }

    pub fn passed(&self) -> bool {
        self.max_dev() <= self.rel_tol
    }
}

/// Deviation `|a − b| / max(1, |b|)` where `b` is the finite-difference value.
fn relative_deviation(analytic: &[f64], fd: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(fd)
        .map(|(a, b)| libm::fabs(a - b) / f64::max(1.0, libm::fabs(*b)))
        .fold(0.0, f64::max)
}

fn ensure_finite(map: &'static str, x: &[f64], values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Evaluation {
            map,
            point: x.to_vec(),
        })
    }
}

/// Compares the model's `Df`, `Dκ`, `Dg_i` against central differences at
/// each point.
pub fn check_jacobians<M: SystemModel + ?Sized>(
    model: &M,
    points: &[Vec<f64>],
    rel_tol: f64,
) -> Result<JacobianReport> {
    if !(rel_tol > 0.0) {
        return Err(Error::Argument(format!(
            "rel_tol must be positive, got {rel_tol}"
        )));
    }
    if points.is_empty() {
        return Err(Error::Argument("no test points".into()));
    }
    let (n, m) = (model.state_dim(), model.control_dim());
    let mut report = JacobianReport {
        rel_tol,
        points_checked: points.len(),
        drift_max_dev: 0.0,
        control_law_max_dev: 0.0,
        control_matrix_max_dev: 0.0,
    };

    let mut f = vec![0.0; n];
    let mut g = vec![0.0; n * m];
    let mut k = vec![0.0; m];
    let mut s = vec![0.0; n * n];
    let mut analytic = vec![0.0; n * m * n];
    let mut fd = vec![0.0; n * m * n];

    for x in points {
        check_point_dim(model, x)?;
        model.drift(x, &mut f);
        ensure_finite("f", x, &f)?;
        model.control_matrix(x, &mut g);
        ensure_finite("g", x, &g)?;
        model.control_law(x, &mut k);
        ensure_finite("kappa", x, &k)?;
        model.diffusion(x, &mut s);
        ensure_finite("sigma", x, &s)?;

        let a = &mut analytic[..n * n];
        model.drift_jacobian(x, a);
        ensure_finite("df", x, a)?;
        central_difference(|y, o| model.drift(y, o), x, n, &mut fd[..n * n]);
        report.drift_max_dev = report
            .drift_max_dev
            .max(relative_deviation(a, &fd[..n * n]));

        let a = &mut analytic[..m * n];
        model.control_law_jacobian(x, a);
        ensure_finite("dkappa", x, a)?;
        central_difference(|y, o| model.control_law(y, o), x, m, &mut fd[..m * n]);
        report.control_law_max_dev = report
            .control_law_max_dev
            .max(relative_deviation(a, &fd[..m * n]));

        model.control_matrix_jacobians(x, &mut analytic);
        ensure_finite("dg", x, &analytic)?;
        let mut full = vec![0.0; n * m * n];
        central_difference(|y, o| model.control_matrix(y, o), x, n * m, &mut full);
        restack_column_jacobians(&full, n, m, &mut fd);
        report.control_matrix_max_dev = report
            .control_matrix_max_dev
            .max(relative_deviation(&analytic, &fd));
    }
    Ok(report)
}
