use super::{JacobianSources, SystemModel};

/// Scalar linear plant `f(x) = a x`, `g ≡ 1`, `κ(y) = −k y`, `σ ≡ 1`.
///
/// The limiting ODE is `ẋ = (a − k) x` and every derivative is constant,
/// which makes this model the reference case for closed-form checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarLinear {
    pub a: f64,
    pub k: f64,
}

pub fn builtin_scalar_linear(a: f64, k: f64) -> ScalarLinear {
    ScalarLinear { a, k }
}

impl SystemModel for ScalarLinear {
    fn state_dim(&self) -> usize {
        1
    }

    fn control_dim(&self) -> usize {
        1
    }

    fn drift(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.a * x[0];
    }

    fn control_matrix(&self, _x: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
    }

    fn control_law(&self, x: &[f64], out: &mut [f64]) {
        out[0] = -self.k * x[0];
    }

    fn diffusion(&self, _x: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
    }

    fn drift_jacobian(&self, _x: &[f64], out: &mut [f64]) {
        out[0] = self.a;
    }

    fn control_law_jacobian(&self, _x: &[f64], out: &mut [f64]) {
        out[0] = -self.k;
    }

    fn control_matrix_jacobians(&self, _x: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
    }

    fn jacobian_sources(&self) -> JacobianSources {
        JacobianSources::ANALYTIC
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::eval_gdk;

    #[test]
    fn substitution() {
        let m = builtin_scalar_linear(2.0, 1.0);
        let (mut f, mut k) = ([0.0], [0.0]);
        m.drift(&[3.0], &mut f);
        m.control_law(&[3.0], &mut k);
        assert_eq!((f[0], k[0]), (6.0, -3.0));
    }

    #[test]
    fn closed_loop_drift_and_linearisation() {
        let m = builtin_scalar_linear(2.0, 1.0);
        let (mut f, mut g, mut k) = ([0.0], [0.0], [0.0]);
        m.drift(&[1.0], &mut f);
        m.control_matrix(&[1.0], &mut g);
        m.control_law(&[1.0], &mut k);
        assert_eq!(f[0] + g[0] * k[0], 1.0);

        for x in [-3.0, 0.0, 0.25, 8.0] {
            let mut df = [0.0];
            m.drift_jacobian(&[x], &mut df);
            assert_eq!(df[0] + eval_gdk(&m, &[x]).unwrap().0.get(0, 0), 1.0);
        }
    }
}
