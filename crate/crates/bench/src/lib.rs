//! Shared fixtures for the criterion benches.

use ergoshift::{Cocycle, Mat, Word};

/// Saddle plus shear over a two-letter alphabet; mildly hyperbolic.
pub fn bench_cocycle() -> Cocycle {
    let a0 = Mat::diagonal(&[0.5, 2.0]);
    let a1 = Mat::from_row_major(2, &[0.9, 0.4, -0.1, 1.0]).unwrap();
    Cocycle::new(vec![a0, a1]).unwrap()
}

/// Pseudo-random word with a fixed seed (xorshift), reproducible.
pub fn bench_word(len: usize) -> Word {
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut symbols = Vec::with_capacity(len);
    for _ in 0..len {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        symbols.push((state & 1) as u8);
    }
    Word::new(symbols, 2).unwrap()
}
