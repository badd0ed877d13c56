//! Conversion of results into CSV tables.

use sampled_sde_core::{
    adjacent_inversions, fit_rate, spearman_rho, ErrorSummary, Regime, TrajectoryBundle,
};

use crate::error::Result;
use crate::table::{Cell, Table};

fn regime_cell(regime: Regime) -> Cell {
    match regime {
        Regime::Finite(c) => Cell::Float(c),
        Regime::Infinite => Cell::Float(f64::INFINITY),
    }
}

/// One row per cell. Columns: `epsilon, delta, c, kappa_eps, n_paths,
/// n_diverged`, the LLN and CLT means with standard errors, `term_err_j` with
/// standard errors, then the signed terminal means `term_signed_j`.
/// Undefined metrics are written as `NaN`.
pub fn summaries_table(summaries: &[ErrorSummary], state_dim: usize) -> Result<Table> {
    let mut columns: Vec<String> = [
        "epsilon",
        "delta",
        "c",
        "kappa_eps",
        "n_paths",
        "n_diverged",
        "lln_sup_p1",
        "lln_sup_p1_se",
        "lln_sup_p2",
        "lln_sup_p2_se",
        "clt_sup",
        "clt_sup_se",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for j in 1..=state_dim {
        columns.push(format!("term_err_{j}"));
        columns.push(format!("term_err_{j}_se"));
    }
    for j in 1..=state_dim {
        columns.push(format!("term_signed_{j}"));
        columns.push(format!("term_signed_{j}_se"));
    }
    let mut table = Table::new(columns);
    for s in summaries {
        let mut row = vec![
            s.epsilon.into(),
            s.delta.into(),
            regime_cell(s.regime),
            s.kappa_eps.unwrap_or(f64::NAN).into(),
            s.n_paths.into(),
            s.n_diverged.into(),
            s.lln_sup_p1.mean.into(),
            s.lln_sup_p1.se.into(),
            s.lln_sup_p2.mean.into(),
            s.lln_sup_p2.se.into(),
        ];
        let clt = s.clt_sup.map_or((f64::NAN, f64::NAN), |e| (e.mean, e.se));
        row.push(clt.0.into());
        row.push(clt.1.into());
        for per_component in [&s.terminal_abs_error, &s.terminal_signed_error] {
            for j in 0..state_dim {
                let e = per_component
                    .as_ref()
                    .map_or((f64::NAN, f64::NAN), |v| (v[j].mean, v[j].se));
                row.push(e.0.into());
                row.push(e.1.into());
            }
        }
        table.push_row(row)?;
    }
    Ok(table)
}

/// Named per-cell metric series used for rate fitting.
pub fn metric_series(summaries: &[ErrorSummary], state_dim: usize) -> Vec<(String, Vec<f64>)> {
    let mut out = vec![
        (
            "lln_sup_p1".to_string(),
            summaries.iter().map(|s| s.lln_sup_p1.mean).collect(),
        ),
        (
            "lln_sup_p2".to_string(),
            summaries.iter().map(|s| s.lln_sup_p2.mean).collect(),
        ),
        (
            "clt_sup".to_string(),
            summaries
                .iter()
                .map(|s| s.clt_sup.map_or(f64::NAN, |e| e.mean))
                .collect::<Vec<_>>(),
        ),
    ];
    for j in 0..state_dim {
        out.push((
            format!("term_err_{j1}", j1 = j + 1),
            summaries
                .iter()
                .map(|s| {
                    s.terminal_abs_error
                        .as_ref()
                        .map_or(f64::NAN, |v| v[j].mean)
                })
                .collect(),
        ));
    }
    out
}

/// One row per metric: the least-squares slope of `log₂ metric` against
/// `log₂ ε`, the Spearman correlation of the metric with `1/ε`, and the number
/// of adjacent non-decreases as `ε` shrinks. Metrics that are undefined or
/// nonpositive in some cell get `NaN` fit values.
pub fn ratefit_table(summaries: &[ErrorSummary], state_dim: usize) -> Result<Table> {
    let mut table = Table::new([
        "metric",
        "slope",
        "intercept",
        "r_squared",
        "spearman_rho",
        "adjacent_inversions",
        "n_points",
    ]);
    let mut order: Vec<usize> = (0..summaries.len()).collect();
    order.sort_by(|&a, &b| summaries[b].epsilon.total_cmp(&summaries[a].epsilon));
    let inv_eps: Vec<f64> = order.iter().map(|&i| 1.0 / summaries[i].epsilon).collect();
    for (name, values) in metric_series(summaries, state_dim) {
        let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        let points: Vec<(f64, f64)> = order
            .iter()
            .map(|&i| (summaries[i].epsilon, values[i]))
            .collect();
        let (slope, intercept, r2) = match fit_rate(&points) {
            Ok(fit) => (fit.slope, fit.intercept, fit.r_squared),
            Err(_) => (f64::NAN, f64::NAN, f64::NAN),
        };
        let rho = if sorted.iter().all(|v| v.is_finite()) {
            spearman_rho(&inv_eps, &sorted).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        table.push_row(vec![
            name.as_str().into(),
            slope.into(),
            intercept.into(),
            r2.into(),
            rho.into(),
            (adjacent_inversions(&sorted) as u64).into(),
            (summaries.len() as u64).into(),
        ])?;
    }
    Ok(table)
}

/// One row per grid node: `t, X_j, x_j, Z_j, err_j` with
/// `err_j = X_j − x_j − ε Z_j`. Without a fluctuation limit (regime 3) the
/// `Z` and `err` columns are replaced by `R_j = (X_j − x_j)/δ`.
pub fn trajectories_table(bundle: &TrajectoryBundle<'_>) -> Result<Table> {
    let n = bundle.x_sde.dim();
    let mut columns = vec!["t".to_string()];
    columns.extend((1..=n).map(|j| format!("X_{j}")));
    columns.extend((1..=n).map(|j| format!("x_{j}")));
    match &bundle.z_limit {
        Some(_) => {
            columns.extend((1..=n).map(|j| format!("Z_{j}")));
            columns.extend((1..=n).map(|j| format!("err_{j}")));
        }
        None => columns.extend((1..=n).map(|j| format!("R_{j}"))),
    }
    let mut table = Table::new(columns);
    for (i, &t) in bundle.grid.nodes().iter().enumerate() {
        let big = bundle.x_sde.node(i);
        let small = bundle.x_limit.node(i);
        let mut row: Vec<Cell> = vec![t.into()];
        row.extend(big.iter().map(|&v| Cell::Float(v)));
        row.extend(small.iter().map(|&v| Cell::Float(v)));
        match &bundle.z_limit {
            Some(z) => {
                let z = z.node(i);
                row.extend(z.iter().map(|&v| Cell::Float(v)));
                row.extend((0..n).map(|j| Cell::Float(big[j] - small[j] - bundle.epsilon * z[j])));
            }
            None => {
                let r = bundle
                    .z_rescaled
                    .as_ref()
                    .expect("rescaled deviation is always present");
                row.extend(r.node(i).iter().map(|&v| Cell::Float(v)));
            }
        }
        table.push_row(row)?;
    }
    Ok(table)
}
