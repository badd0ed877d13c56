//! Solver checks against independent recursions and closed forms.

use sampled_sde_core::{
    builtin_pendulum, builtin_scalar_linear, generate_path, linear_oracle_moments,
    simulate_coupled, simulate_fluctuation_sde, simulate_limit_ode, simulate_sampled_ode,
    simulate_sampled_sde, sup_error_1norm, GridMode, LimitScheme, Regime, SimulationConfig,
};

#[test]
fn sampled_ode_matches_hand_recursion() {
    // δ = dt: every step holds its own start value, so
    // x_{i+1} = x_i + h (a x_i − k x_i) with the same floating-point ops
    let (a, k) = (2.0, 1.0);
    let m = builtin_scalar_linear(a, k);
    let cfg = SimulationConfig::new(0.0, 0.05, 1.0, 0.05, vec![1.0]);
    let grid = cfg.grid().unwrap();
    let x = simulate_sampled_ode(&m, &cfg).unwrap();
    let mut y = 1.0f64;
    for i in 0..grid.step_count() {
        assert_eq!(x.node(i)[0], y, "node {i}");
        y = y + (a * y + 1.0 * (-k * y)) * grid.step(i);
    }
    // product form Π (1 + h (a − k))
    let product: f64 = (0..grid.step_count())
        .map(|i| 1.0 + grid.step(i) * (a - k))
        .product();
    assert!((x.last()[0] - product).abs() < 1e-12);
}

#[test]
fn sampled_ode_with_coarse_hold_matches_hand_recursion() {
    // δ = 4 dt: hold ratio x_{π}/x_i enters the multiplier
    let (a, k) = (2.0, 1.0);
    let m = builtin_scalar_linear(a, k);
    let cfg = SimulationConfig::new(0.0, 0.25, 1.0, 0.0625, vec![1.0]);
    let x = simulate_sampled_ode(&m, &cfg).unwrap();
    let mut states = vec![1.0f64];
    for i in 0..16 {
        let held = states[(i / 4) * 4];
        let cur = states[i];
        states.push(cur + (a * cur - k * held) * 0.0625);
    }
    for (i, s) in states.iter().enumerate() {
        assert!((x.node(i)[0] - s).abs() < 1e-14, "node {i}");
    }
}

#[test]
fn pendulum_limit_is_resolved() {
    let p = builtin_pendulum();
    let coarse = SimulationConfig::new(0.1, 0.0625, 25.0, 0.01, vec![1.0, 0.0]);
    let fine = SimulationConfig {
        dt: 0.001,
        ..coarse.clone()
    };
    let xc = simulate_limit_ode(&p, &coarse).unwrap();
    let xf = simulate_limit_ode(&p, &fine).unwrap();
    assert!(xc.as_flat().iter().all(|v| v.is_finite()));
    // compare on the coarse nodes shared by both grids (multiples of 0.01 and 0.0625)
    let gc = coarse.grid().unwrap();
    let gf = fine.grid().unwrap();
    let mut worst = 0.0f64;
    for (i, t) in gc.nodes().iter().enumerate() {
        if let Some(j) = gf.nodes().iter().position(|s| (s - t).abs() < 1e-9) {
            worst = worst.max((0..2).map(|c| (xc.node(i)[c] - xf.node(j)[c]).abs()).sum());
        }
    }
    assert!(worst < 1e-4, "sup difference {worst}");
}

#[test]
fn pendulum_coupled_bundle_is_finite_and_refines() {
    let p = builtin_pendulum();
    let cfg = SimulationConfig::new(1.0 / 32.0, 1.0 / 16.0, 25.0, 0.0977, vec![1.0, 0.0])
        .with_grid_mode(GridMode::GridSnap);
    let grid = cfg.grid().unwrap();
    let path = generate_path(&grid, 2, 0, 0).unwrap();
    let b = simulate_coupled(&p, &cfg, &path).unwrap();
    for s in [
        &b.x_sde,
        &b.x_limit,
        b.z_limit.as_ref().unwrap(),
        b.z_rescaled.as_ref().unwrap(),
    ] {
        assert!(s.as_flat().iter().all(|v| v.is_finite()));
    }
    // the deterministic limit at dt/2, compared on the shared nodes
    let half = SimulationConfig {
        dt: 0.0977 / 2.0,
        ..cfg.clone()
    }
    .with_limit_scheme(LimitScheme::Euler);
    let xh = simulate_limit_ode(&p, &half).unwrap();
    let scale = b
        .x_limit
        .as_flat()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for i in 0..grid.len() - 1 {
        worst = worst.max(
            (0..2)
                .map(|c| (b.x_limit.node(i)[c] - xh.node(2 * i)[c]).abs())
                .sum(),
        );
    }
    assert!(
        worst / scale < 0.05,
        "relative sup difference {}",
        worst / scale
    );
}

#[test]
fn zero_noise_identity_on_random_configs() {
    // ε = 0 SDE ≡ sampled ODE node for node, over varied configurations
    let p = builtin_pendulum();
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for case in 0..50 {
        let mode = if case % 2 == 0 {
            GridMode::Union
        } else {
            GridMode::GridSnap
        };
        let cfg = SimulationConfig::new(
            0.0,
            0.01 + 0.3 * next(),
            0.5 + 4.0 * next(),
            0.005 + 0.1 * next(),
            vec![-2.0 + 4.0 * next(), -2.0 + 4.0 * next()],
        )
        .with_grid_mode(mode);
        let grid = cfg.grid().unwrap();
        let path = generate_path(&grid, 2, case, case).unwrap();
        let sde = simulate_sampled_sde(&p, &cfg, &path).unwrap();
        let ode = simulate_sampled_ode(&p, &cfg).unwrap();
        assert_eq!(sde, ode, "case {case}");
    }
}

#[test]
fn fluctuation_variance_regime_one() {
    // a = 2, k = 1, c = 0: Var Z_T = (e^{2T} − 1)/2 at T = 1
    let m = builtin_scalar_linear(2.0, 1.0);
    let cfg = SimulationConfig::new(0.1, 0.1, 1.0, 1e-3, vec![1.0])
        .with_regime(Regime::Finite(0.0))
        .with_limit_scheme(LimitScheme::Euler);
    let grid = cfg.grid().unwrap();
    let x = simulate_limit_ode(&m, &cfg).unwrap();
    let n = 100_000u64;
    let terminal: Vec<f64> = (0..n)
        .map(|id| {
            let path = generate_path(&grid, 1, 17, id).unwrap();
            simulate_fluctuation_sde(&m, &cfg, &x, &path)
                .unwrap()
                .last()[0]
        })
        .collect();
    let mean = terminal.iter().sum::<f64>() / n as f64;
    let sq: Vec<f64> = terminal.iter().map(|z| (z - mean) * (z - mean)).collect();
    let var = sq.iter().sum::<f64>() / (n - 1) as f64;
    let var_se =
        (sq.iter().map(|d| (d - var) * (d - var)).sum::<f64>() / (n - 1) as f64 / n as f64).sqrt();
    let oracle = linear_oracle_moments(2.0, 1.0, 0.0, 1.0, 1.0, 1.0).var_z_t;
    assert!((oracle - 3.1945).abs() < 1e-4);
    assert!(
        (var - oracle).abs() < 3.0 * var_se,
        "var {var} vs {oracle} (se {var_se})"
    );
    assert!(mean.abs() < 3.0 * (var / n as f64).sqrt(), "mean {mean}");
}

#[test]
fn sup_error_between_solvers() {
    let m = builtin_scalar_linear(2.0, 1.0);
    let cfg = SimulationConfig::new(0.0, 0.01, 1.0, 0.01, vec![1.0])
        .with_limit_scheme(LimitScheme::Euler);
    let xs = simulate_sampled_ode(&m, &cfg).unwrap();
    let xl = simulate_limit_ode(&m, &cfg).unwrap();
    // δ = dt: the sampled ODE coincides with Euler on the limit
    assert_eq!(sup_error_1norm(&xs, &xl).unwrap(), 0.0);
}
