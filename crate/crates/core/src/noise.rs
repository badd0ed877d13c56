//! Brownian increments on a [`TimeGrid`], keyed by `(seed, path_id)`.
//!
//! Each path draws from its own ChaCha8 stream: the generator is seeded from
//! `seed` and `path_id` selects one of its 2⁶⁴ independent streams. Within a
//! stream, draws are consumed step-major, component-minor. A path is thus a
//! pure function of `(seed, path_id, grid, dim)` and never depends on which
//! thread or in what order paths are produced.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::time_grid::TimeGrid;

#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath<'g> {
    grid: &'g TimeGrid,
    dim: usize,
    seed: u64,
    path_id: u64,
    /// `step_count × dim`, row-major.
    increments: Vec<f64>,
}

pub fn generate_path(
    grid: &TimeGrid,
    dim: usize,
    seed: u64,
    path_id: u64,
) -> Result<BrownianPath<'_>> {
    if dim == 0 {
        return Err(Error::Argument("noise dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_id);
    let steps = grid.step_count();
    let mut increments = Vec::with_capacity(steps * dim);
    for i in 0..steps {
        let scale = libm::sqrt(grid.step(i));
        for _ in 0..dim {
            let z: f64 = StandardNormal.sample(&mut rng);
            increments.push(scale * z);
        }
    }
    Ok(BrownianPath {
        grid,
        dim,
        seed,
        path_id,
        increments,
    })
}

impl<'g> BrownianPath<'g> {
    /// Wraps externally supplied increments, e.g. replayed from a dump or
    /// rescaled for a linearity check.
    pub fn from_increments(
        grid: &'g TimeGrid,
        dim: usize,
        seed: u64,
        increments: Vec<f64>,
    ) -> Result<Self> {
        if dim == 0 || increments.len() != grid.step_count() * dim {
            return Err(Error::Argument(format!(
                "expected {} increments of dimension {dim}, got {}",
                grid.step_count() * dim,
                increments.len()
            )));
        }
        Ok(Self {
            grid,
            dim,
            seed,
            path_id: 0,
            increments,
        })
    }

    pub fn grid(&self) -> &'g TimeGrid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path_id(&self) -> u64 {
        self.path_id
    }

    pub fn step_count(&self) -> usize {
        self.increments.len() / self.dim
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// Increment `W(t_{i+1}) − W(t_i)`.
    pub fn increment_between(&self, i: usize) -> Result<&[f64]> {
        if i >= self.step_count() {
            return Err(Error::Argument(format!(
                "step {i} out of range (path has {} steps)",
                self.step_count()
            )));
        }
        Ok(self.row(i))
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.increments[i * self.dim..(i + 1) * self.dim]
    }

    /// `W_T − W_0`.
    pub fn terminal_value(&self) -> Vec<f64> {
        let mut w = alloc::vec![0.0; self.dim];
        for i in 0..self.step_count() {
            for (a, b) in w.iter_mut().zip(self.row(i)) {
                *a += b;
            }
        }
        w
    }
}
