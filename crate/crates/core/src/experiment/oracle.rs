//! Closed-form moments for the scalar linear model
//! `f(x) = a x`, `g ≡ 1`, `κ(y) = −k y`, constant `σ`.
//!
//! With `λ = a − k` the limit is `x_t = x₀ e^{λt}`; the fluctuation SDE is
//! `dZ = [λ Z + (c/2) k λ x_t] dt + σ dW`, so
//!
//! ```text
//! E Z_T   = (c/2) k λ x₀ T e^{λT}
//! Var Z_T = σ² (e^{2λT} − 1) / (2λ)       (σ² T when λ = 0)
//! ```

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearOracleMoments {
    pub x_t: f64,
    pub mean_z_t: f64,
    pub var_z_t: f64,
}

pub fn linear_oracle_moments(
    a: f64,
    k: f64,
    c: f64,
    sigma: f64,
    horizon: f64,
    x0: f64,
) -> LinearOracleMoments {
    let lambda = a - k;
    let growth = libm::exp(lambda * horizon);
    let x_t = x0 * growth;
    let mean_z_t = 0.5 * c * k * lambda * x0 * horizon * growth;
    // expm1 keeps the ratio accurate as λ → 0
    let var_z_t = if lambda == 0.0 {
        sigma * sigma * horizon
    } else {
        sigma * sigma * libm::expm1(2.0 * lambda * horizon) / (2.0 * lambda)
    };
    LinearOracleMoments {
        x_t,
        mean_z_t,
        var_z_t,
    }
}
