//! Reproducible Gaussian sampling.
//!
//! The generator is ChaCha20 (`rand_chacha`), keyed by `seed_from_u64(seed)`
//! and switched to the 64-bit stream `stream`. Uniforms take the top 53 bits
//! of each `next_u64`; normals come in pairs from the Box–Muller transform.
//! None of these steps depend on the platform, so a `(seed, stream)` pair
//! produces the same bits everywhere.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::matrix::Matrix;

/// Version tag of the sampling scheme above. Bump it if any step changes.
pub const SAMPLER_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream: u64,
    inner: ChaCha20Rng,
    spare: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
            spare: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn next_uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.next_uniform();
        let u2 = self.next_uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

/// `rows x cols` matrix of independent standard normals, filled column-major.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut SeededRng) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.next_normal()).collect();
    Matrix::from_col_major(rows, cols, data).expect("length matches by construction")
}
