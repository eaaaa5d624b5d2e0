//! Deterministic point sets on axis-aligned boxes.
//!
//! Point `i` is a pure function of `(seed, i)`, so any parallel schedule
//! reproduces the serial result bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// Counter-based pseudo-random stream.
    #[default]
    Uniform,
    /// Randomly shifted Halton sequence.
    LowDiscrepancy,
}

const PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131,
];

#[derive(Debug, Clone)]
pub struct BoxSampler {
    kind: SamplerKind,
    bounds: Vec<(f64, f64)>,
    base: ChaCha8Rng,
    shift: Vec<f64>,
}

impl BoxSampler {
    pub fn new(kind: SamplerKind, seed: u64, bounds: &[(f64, f64)]) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidArgument("empty bounding box".into()));
        }
        for (j, &(lo, hi)) in bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::UnboundedSupport);
            }
            if !(hi > lo) {
                return Err(Error::InvalidArgument(format!("empty range in dimension {j}")));
            }
        }
        if kind == SamplerKind::LowDiscrepancy && bounds.len() > PRIMES.len() {
            return Err(Error::InvalidArgument(format!(
                "low-discrepancy sampler supports at most {} dimensions",
                PRIMES.len()
            )));
        }
        let base = ChaCha8Rng::seed_from_u64(seed);
        let mut shift_rng = base.clone();
        shift_rng.set_stream(u64::MAX);
        let shift = (0..bounds.len()).map(|_| shift_rng.random::<f64>()).collect();
        Ok(BoxSampler {
            kind,
            bounds: bounds.to_vec(),
            base,
            shift,
        })
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).product()
    }

    /// Writes point `index` into `out` (length `dim`).
    pub fn point(&self, index: u64, out: &mut [f64]) {
        match self.kind {
            SamplerKind::Uniform => {
                let mut rng = self.base.clone();
                rng.set_stream(index);
                for (o, &(lo, hi)) in out.iter_mut().zip(&self.bounds) {
                    *o = lo + (hi - lo) * rng.random::<f64>();
                }
            }
            SamplerKind::LowDiscrepancy => {
                for (j, (o, &(lo, hi))) in out.iter_mut().zip(&self.bounds).enumerate() {
                    let u = (radical_inverse(index + 1, PRIMES[j]) + self.shift[j]).fract();
                    *o = lo + (hi - lo) * u;
                }
            }
        }
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}
