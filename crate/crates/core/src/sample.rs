//! Deterministic seeded sampling. Every draw is keyed by the scene seed
//! plus a label path, hashed through sha256 into a ChaCha stream, so
//! distinct pipeline stages get independent but reproducible randomness.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::Mat;

#[derive(Clone, Debug)]
pub struct SeedCtx {
    key: [u8; 32],
}

impl SeedCtx {
    pub fn new(seed: u64) -> Self {
        let mut h = Sha256::new();
        h.update(b"sprayforge");
        h.update(seed.to_le_bytes());
        SeedCtx {
            key: h.finalize().into(),
        }
    }

    /// Independent child stream for a named stage.
    pub fn child(&self, label: &str) -> SeedCtx {
        let mut h = Sha256::new();
        h.update(self.key);
        h.update([0x2f]);
        h.update(label.as_bytes());
        SeedCtx {
            key: h.finalize().into(),
        }
    }

    /// Child stream for a retry or loop iteration.
    pub fn attempt(&self, label: &str, idx: u32) -> SeedCtx {
        self.child(&format!("{label}.{idx}"))
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.key)
    }

    /// Uniform integers in [-bound, bound], bound >= 1.
    pub fn ints(&self, len: usize, bound: i64) -> Vec<i64> {
        assert!(bound >= 1);
        let size = 2 * bound as u64 + 1;
        let limit = u64::MAX - (u64::MAX % size);
        let mut rng = self.rng();
        let mut out = Vec::with_capacity(len);
        while out.len() < len {
            let r = rng.next_u64();
            if r < limit {
                out.push((r % size) as i64 - bound);
            }
        }
        out
    }

    pub fn int_matrix(&self, rows: usize, cols: usize, bound: i64) -> Mat {
        let flat = self.ints(rows * cols, bound);
        Mat::from_int_rows(
            &(0..rows)
                .map(|i| flat[i * cols..(i + 1) * cols].to_vec())
                .collect::<Vec<_>>(),
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub enum SampleShape {
    Vector(usize),
    Matrix(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sampled {
    Vector(Vec<i64>),
    Matrix(Vec<Vec<i64>>),
}

/// Entry point matching the sampling contract: integer coordinates bounded
/// by `bound`, fully determined by (shape, seed, bound).
pub fn sample_generic(shape: SampleShape, seed: u64, bound: i64) -> Result<Sampled> {
    if bound < 1 {
        return Err(Error::ZeroInput {
            what: "sampling bound".into(),
        });
    }
    let ctx = SeedCtx::new(seed);
    match shape {
        SampleShape::Vector(len) => Ok(Sampled::Vector(ctx.child("vector").ints(len, bound))),
        SampleShape::Matrix(r, c) => {
            let flat = ctx.child("matrix").ints(r * c, bound);
            Ok(Sampled::Matrix(
                (0..r).map(|i| flat[i * c..(i + 1) * c].to_vec()).collect(),
            ))
        }
    }
}
