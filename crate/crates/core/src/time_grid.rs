//! The sampling operator `π_δ(t) = δ⌊t/δ⌋` and integration grids that
//! carry, for every node, the index of the most recent sample instant.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default cap on the number of grid nodes.
pub const DEFAULT_MAX_NODES: usize = 1 << 25;

/// Relative tolerance (times the horizon) under which two nodes are merged.
pub const MERGE_TOL: f64 = 1e-12;

/// Largest computed multiple `k·δ` with `k·δ ≤ t`.
///
/// The floor of `t/δ` is corrected by one in either direction so that the
/// result is consistent with the products `(k as f64) * δ` used when building
/// grids: `pi_delta(k·δ, δ) == k·δ` bitwise.
pub fn pi_delta(t: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Argument(format!(
            "sampling period must be positive, got {delta}"
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Argument(format!(
            "time must be finite and nonnegative, got {t}"
        )));
    }
    let mut k = libm::floor(t / delta);
    if (k + 1.0) * delta <= t {
        k += 1.0;
    } else if k * delta > t {
        k -= 1.0;
    }
    Ok(k * delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMode {
    /// Nodes are the union of the base grid and every sample instant, so the
    /// held value is an exactly computed state.
    Union,
    /// Uniform base grid only; the held value is taken at the last node not
    /// after the sample instant.
    GridSnap,
}

/// Strictly increasing nodes on `[0, T]` plus, per node, the index of the
/// node holding the most recent sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    sample_index: Vec<usize>,
    delta: f64,
    horizon: f64,
    mode: GridMode,
}

impl TimeGrid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn sample_index(&self) -> &[usize] {
        &self.sample_index
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn step_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Length of step `i`, from node `i` to node `i + 1`.
    pub fn step(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }
}

pub fn build_grid(horizon: f64, dt: f64, delta: f64, mode: GridMode) -> Result<TimeGrid> {
    build_grid_capped(horizon, dt, delta, mode, DEFAULT_MAX_NODES)
}

/// Multiples `k·step` not exceeding `limit`.
fn multiples(step: f64, limit: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut k = 0u64;
    loop {
        let t = k as f64 * step;
        if t > limit {
            break;
        }
        out.push(t);
        k += 1;
    }
    out
}

pub fn build_grid_capped(
    horizon: f64,
    dt: f64,
    delta: f64,
    mode: GridMode,
    max_nodes: usize,
) -> Result<TimeGrid> {
    for (name, v) in [("horizon", horizon), ("dt", dt), ("delta", delta)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Argument(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    let tol = MERGE_TOL * horizon;
    let estimate = libm::ceil(horizon / dt)
        + if mode == GridMode::Union {
            libm::ceil(horizon / delta)
        } else {
            0.0
        }
        + 2.0;
    if estimate > max_nodes as f64 {
        return Err(Error::Resource(format!(
            "grid would need about {estimate} nodes, cap is {max_nodes}"
        )));
    }

    let base = multiples(dt, horizon + tol);
    let (mut nodes, mut is_sample) = match mode {
        GridMode::Union => {
            let samples = multiples(delta, horizon + tol);
            merge_sorted(&base, &samples, tol)
        }
        GridMode::GridSnap => {
            let flags = base.iter().map(|_| false).collect();
            (base, flags)
        }
    };

    // the horizon is always the final node
    match nodes.last() {
        Some(&last) if libm::fabs(last - horizon) <= tol => {
            *nodes.last_mut().unwrap() = horizon;
        }
        _ => {
            nodes.push(horizon);
            is_sample.push(false);
        }
    }

    let sample_index = match mode {
        GridMode::Union => {
            let mut idx = Vec::with_capacity(nodes.len());
            let mut current = 0;
            for (i, s) in is_sample.iter().enumerate() {
                if *s {
                    current = i;
                }
                idx.push(current);
            }
            idx
        }
        GridMode::GridSnap => {
            let mut idx = Vec::with_capacity(nodes.len());
            for &t in &nodes {
                let sample = pi_delta(t, delta)?;
                let count = nodes.partition_point(|&s| s <= sample + tol);
                idx.push(count.saturating_sub(1));
            }
            idx
        }
    };

    Ok(TimeGrid {
        nodes,
        sample_index,
        delta,
        horizon,
        mode,
    })
}

/// Merges base nodes with sample instants; within `tol` the sample value wins.
fn merge_sorted(base: &[f64], samples: &[f64], tol: f64) -> (Vec<f64>, Vec<bool>) {
    let mut nodes = Vec::with_capacity(base.len() + samples.len());
    let mut flags = Vec::with_capacity(base.len() + samples.len());
    let (mut i, mut j) = (0, 0);
    while i < base.len() || j < samples.len() {
        let take_sample = match (base.get(i), samples.get(j)) {
            (Some(&b), Some(&s)) => {
                if libm::fabs(b - s) <= tol {
                    i += 1;
                    true
                } else {
                    s < b
                }
            }
            (None, Some(_)) => true,
            _ => false,
        };
        let (v, flag) = if take_sample {
            j += 1;
            (samples[j - 1], true)
        } else {
            i += 1;
            (base[i - 1], false)
        };
        if let Some(&last) = nodes.last() {
            if v - last <= tol {
                // near-coincident neighbours: keep one, prefer the sample
                if flag {
                    *nodes.last_mut().unwrap() = v;
                    *flags.last_mut().unwrap() = true;
                }
                continue;
            }
        }
        nodes.push(v);
        flags.push(flag);
    }
    (nodes, flags)
}
