//! Seeded random numbers with counter-based stream splitting.
//!
//! Every stochastic component of the crate draws from a [`StreamRng`]
//! derived from a single master seed and a stream id. Paths, held-out
//! batches, and weight initialisation each get their own stream, so
//! results are bit-identical for a fixed seed no matter how work is
//! scheduled across threads.

/// Stream id offsets carving the 64-bit stream space by purpose.
pub mod streams {
    pub const TRAIN: u64 = 0;
    pub const HELDOUT: u64 = 1 << 40;
    pub const VALIDATION: u64 = 2 << 40;
    pub const EVALUATION: u64 = 3 << 40;
    pub const INIT: u64 = 4 << 40;
    pub const SCENARIO: u64 = 5 << 40;
    pub const SHUFFLE: u64 = 6 << 40;
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// splitmix64 generator seeded from a (master seed, stream id) pair.
#[derive(Debug, Clone)]
pub struct StreamRng {
    state: u64,
    cached_normal: Option<f64>,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        // Two mixing rounds so that nearby (seed, stream) pairs decorrelate.
        let mut s = seed;
        let a = splitmix64(&mut s);
        let mut t = stream ^ 0x6a09e667f3bcc909;
        let b = splitmix64(&mut t);
        Self {
            state: a ^ b.rotate_left(17),
            cached_normal: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        splitmix64(&mut self.state)
    }

    /// Uniform draw in (0, 1]; never returns 0 so it is safe under `ln`.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
    }

    /// Standard normal via Box-Muller, caching the second deviate.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.cached_normal.take() {
            return z;
        }
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.cached_normal = Some(r * theta.sin());
        r * theta.cos()
    }
}
