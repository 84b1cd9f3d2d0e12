//! Counter-based randomness keyed on `(seed, row, column)`.
//!
//! Every projection row owns one ChaCha8 stream (`stream = row`), and column
//! `q` consumes the `q`-th 64-bit word of that stream. Any entry can therefore
//! be regenerated in isolation, and a sequential sweep over the columns yields
//! the same values.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UNIT: f64 = 1.0 / (1u64 << 53) as f64;

/// Sequential generator over the columns of one row.
pub struct RowStream {
    rng: ChaCha8Rng,
}

impl RowStream {
    pub fn new(seed: u64, row: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(row);
        Self { rng }
    }

    /// Next uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_uniform(&mut self) -> f64 {
        to_unit(self.rng.next_u64())
    }
}

#[inline]
fn to_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * UNIT
}

/// The uniform variate for entry `(row, column)`, identical to the `column`-th
/// draw of [`RowStream::new(seed, row)`].
pub fn entry_uniform(seed: u64, row: u64, column: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row);
    // one u64 spans two 32-bit words
    rng.set_word_pos(2 * column as u128);
    to_unit(rng.next_u64())
}

/// Independent child seed for trial `index` of an experiment seeded with `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index.wrapping_add(0x9e37_79b9_7f4a_7c15));
    rng.next_u64()
}

/// A seeded ChaCha8 generator for non-projection randomness (signals, profiles).
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
