//! Binary dump of Brownian increments.
//!
//! Layout, all little-endian: 8-byte magic, `dim: u64`, `steps: u64`,
//! `seed: u64`, then `steps × dim` `f64` increments, step-major.

use std::io::{Read, Write};

use sampled_sde_core::{BrownianPath, TimeGrid};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 8] = *b"SSDENOIS";
pub const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDump {
    pub dim: usize,
    pub steps: usize,
    pub seed: u64,
    pub increments: Vec<f64>,
}

impl NoiseDump {
    pub fn from_path(path: &BrownianPath<'_>) -> Self {
        Self {
            dim: path.dim(),
            steps: path.step_count(),
            seed: path.seed(),
            increments: path.increments().to_vec(),
        }
    }

    /// Rebuilds a path on `grid`, which must have `steps` steps.
    pub fn into_path(self, grid: &TimeGrid) -> Result<BrownianPath<'_>> {
        Ok(BrownianPath::from_increments(
            grid,
            self.dim,
            self.seed,
            self.increments,
        )?)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = [0u8; HEADER_LEN];
        header[..8].copy_from_slice(&MAGIC);
        header[8..16].copy_from_slice(&(self.dim as u64).to_le_bytes());
        header[16..24].copy_from_slice(&(self.steps as u64).to_le_bytes());
        header[24..32].copy_from_slice(&self.seed.to_le_bytes());
        w.write_all(&header)?;
        let mut body = Vec::with_capacity(self.increments.len() * 8);
        for v in &self.increments {
            body.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&body)?;
        w.flush()
    }

    /// Parses a dump. `origin` labels errors.
    pub fn read_from<R: Read>(mut r: R, origin: &std::path::Path) -> Result<Self> {
        let bad = |reason: String| Error::Format {
            path: origin.into(),
            reason,
        };
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)
            .map_err(|e| Error::io(origin, e))?;
        if bytes.len() < HEADER_LEN || bytes[..8] != MAGIC {
            return Err(bad("not a noise dump (bad magic or short header)".into()));
        }
        let word = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8-byte slice"));
        let (dim, steps, seed) = (word(8), word(16), word(24));
        let count = dim
            .checked_mul(steps)
            .and_then(|c| usize::try_from(c).ok())
            .ok_or_else(|| bad(format!("dim {dim} × steps {steps} overflows")))?;
        let body = &bytes[HEADER_LEN..];
        if body.len() != count * 8 {
            return Err(bad(format!(
                "expected {} payload bytes, found {}",
                count * 8,
                body.len()
            )));
        }
        let increments = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Self {
            dim: dim as usize,
            steps: steps as usize,
            seed,
            increments,
        })
    }
}
