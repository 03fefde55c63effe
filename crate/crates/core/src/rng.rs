//! Counter-based random streams.
//!
//! Every random draw is addressed by `(seed, domain, path_index, position)`.
//! The ChaCha8 key is the 32-byte block
//! `seed.to_le_bytes() ‖ domain.to_le_bytes() ‖ b"mtail/v1" ‖ [0; 8]`, the
//! ChaCha stream id is the path index, and draws within a path consume the
//! keystream sequentially from word 0. A path therefore produces the same
//! values no matter which worker or chunk simulates it.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent keystreams used by the simulators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamDomain {
    /// Sign and atom choices of martingale steps.
    Steps = 1,
    /// F₀-measurable environment (self-normalized magnitudes).
    Environment = 2,
    /// Rademacher padding of the stopped-path augmentation.
    Augmentation = 3,
}

const KEY_TAG: &[u8; 8] = b"mtail/v1";

/// Keystream for one path in one domain.
pub struct PathRng {
    inner: ChaCha8Rng,
    bits: u64,
    remaining: u32,
}

impl PathRng {
    pub fn new(seed: u64, domain: StreamDomain, path_index: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
        key[16..24].copy_from_slice(KEY_TAG);
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(path_index);
        Self {
            inner,
            bits: 0,
            remaining: 0,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// One fair bit; 64 bits are drawn per keystream word, LSB first.
    #[inline]
    pub fn next_bit(&mut self) -> bool {
        if self.remaining == 0 {
            self.bits = self.inner.next_u64();
            self.remaining = 64;
        }
        let bit = self.bits & 1 == 1;
        self.bits >>= 1;
        self.remaining -= 1;
        bit
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
