//! Counter-addressed Gaussian draws and seed derivation.
//!
//! Every draw is a pure function of `(seed, stream, index)`: a ChaCha8
//! keystream is selected by seed and stream, and the `index`-th normal is
//! built by Box–Muller from the two 64-bit words at a fixed keystream
//! position. Regenerating a sub-range therefore never perturbs its
//! neighbours.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Keystream offset that maps signed grid indices onto a contiguous range.
const INDEX_BIAS: i64 = 1 << 60;
/// 32-bit keystream words consumed per normal draw.
const WORDS_PER_DRAW: u128 = 4;

/// Per-purpose seed: the first eight bytes of SHA-256 over `(root, label)`.
pub fn derive_seed(root: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(root.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Sequential reader of addressed standard normals.
pub struct NormalStream {
    rng: ChaCha8Rng,
}

impl NormalStream {
    /// Positions the stream so that the next draw is the one addressed by `index`.
    pub fn at(seed: u64, stream: u64, index: i64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let slot = (index as i128 + INDEX_BIAS as i128) as u128;
        rng.set_word_pos(slot * WORDS_PER_DRAW);
        NormalStream { rng }
    }

    pub fn next_normal(&mut self) -> f64 {
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        // u1 in (0, 1], u2 in [0, 1)
        let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn next_uniform(&mut self) -> f64 {
        let a = self.rng.next_u64();
        // consume a full draw slot so uniform and normal addressing agree
        let _ = self.rng.next_u64();
        (a >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// The single normal addressed by `(seed, stream, index)`.
pub fn normal_at(seed: u64, stream: u64, index: i64) -> f64 {
    NormalStream::at(seed, stream, index).next_normal()
}

/// Fills `out[i]` with the normal addressed by `start + i`.
pub fn fill_normals(seed: u64, stream: u64, start: i64, out: &mut [f64]) {
    let mut s = NormalStream::at(seed, stream, start);
    for x in out.iter_mut() {
        *x = s.next_normal();
    }
}
