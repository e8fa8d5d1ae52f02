//! Inputs shared by the benchmarks.

use cdc_core::{BitVec, Gf2Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `rows x cols` matrix whose rows are drawn from a span of dimension
/// `rank`, so elimination meets both pivots and dependent rows.
pub fn low_rank_matrix(seed: u64, rows: usize, cols: usize, rank: usize) -> Gf2Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_row = |rng: &mut ChaCha8Rng| BitVec::from_bits((0..cols).map(|_| rng.random_bool(0.5)));
    let generators: Vec<BitVec> = (0..rank).map(|_| random_row(&mut rng)).collect();
    let rows = (0..rows)
        .map(|_| {
            let mut acc = BitVec::zeros(cols);
            for g in &generators {
                if rng.random_bool(0.5) {
                    acc.xor_assign(g);
                }
            }
            acc
        })
        .collect();
    Gf2Matrix::new(rows, cols).expect("rows have equal length")
}
