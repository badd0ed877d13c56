use libm::{cos, sin};

use super::{JacobianSources, SystemModel};

/// Inverted pendulum on a cart-free pivot, stabilised by a smooth feedback law.
///
/// `x₁` is the angle from upright and `x₂` the angular velocity:
///
/// ```text
/// f(x) = (x₂, sin x₁)ᵀ      g(x) = (0, −cos x₁)ᵀ      σ = I₂
/// κ(x) = 2 sin x₁ + 1.35 x₂ cos² x₁ − 0.22 x₂ cos x₁
/// ```
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Pendulum;

const GAIN_ANGLE: f64 = 2.0;
const GAIN_VEL_COS2: f64 = 1.35;
const GAIN_VEL_COS: f64 = 0.22;

pub fn builtin_pendulum() -> Pendulum {
    Pendulum
}

impl SystemModel for Pendulum {
    fn state_dim(&self) -> usize {
        2
    }

    fn control_dim(&self) -> usize {
        1
    }

    fn drift(&self, x: &[f64], out: &mut [f64]) {
        out[0] = x[1];
        out[1] = sin(x[0]);
    }

    fn control_matrix(&self, x: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
        out[1] = -cos(x[0]);
    }

    fn control_law(&self, x: &[f64], out: &mut [f64]) {
        let c = cos(x[0]);
        out[0] = GAIN_ANGLE * sin(x[0]) + GAIN_VEL_COS2 * x[1] * c * c - GAIN_VEL_COS * x[1] * c;
    }

    fn drift_jacobian(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&[0.0, 1.0, cos(x[0]), 0.0]);
    }

    fn control_law_jacobian(&self, x: &[f64], out: &mut [f64]) {
        let (s, c) = (sin(x[0]), cos(x[0]));
        out[0] = GAIN_ANGLE * c - 2.0 * GAIN_VEL_COS2 * x[1] * c * s + GAIN_VEL_COS * x[1] * s;
        out[1] = GAIN_VEL_COS2 * c * c - GAIN_VEL_COS * c;
    }

    fn control_matrix_jacobians(&self, x: &[f64], out: &mut [f64]) {
        // d/dx of (0, −cos x₁)
        out.copy_from_slice(&[0.0, 0.0, sin(x[0]), 0.0]);
    }

    fn jacobian_sources(&self) -> JacobianSources {
        JacobianSources::ANALYTIC
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::check_jacobians;
    use alloc::vec::Vec;

    #[test]
    fn drift_at_unit_angle() {
        let mut f = [0.0; 2];
        Pendulum.drift(&[1.0, 0.0], &mut f);
        assert_eq!(f, [0.0, sin(1.0)]);
    }

    #[test]
    fn control_vanishes_at_origin() {
        let mut k = [1.0];
        Pendulum.control_law(&[0.0, 0.0], &mut k);
        assert_eq!(k, [0.0]);
        let mut g = [9.0; 2];
        Pendulum.control_matrix(&[0.0, 0.0], &mut g);
        assert_eq!(g, [0.0, -1.0]);
    }

    #[test]
    fn control_gradient_at_origin() {
        let mut dk = [0.0; 2];
        Pendulum.control_law_jacobian(&[0.0, 0.0], &mut dk);
        assert_eq!(dk[0], 2.0);
        assert!((dk[1] - 1.13).abs() < 1e-15);
    }

    #[test]
    fn jacobians_match_finite_differences_on_grid() {
        // deterministic 10×10 lattice over [−2, 2]²
        let pts: Vec<Vec<f64>> = (0..100)
            .map(|i| {
                alloc::vec![
                    -2.0 + 4.0 * (i % 10) as f64 / 9.0,
                    -2.0 + 4.0 * (i / 10) as f64 / 9.0
                ]
            })
            .collect();
        let r = check_jacobians(&Pendulum, &pts, 1e-5).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
