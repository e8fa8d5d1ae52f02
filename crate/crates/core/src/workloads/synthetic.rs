//! Random intermediate values with a tunable amount of exact repetition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::IntermediateStore;
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::placement::JobSpec;

/// Values are drawn in `(q, n)` order. Each one after the first copies a
/// uniformly chosen earlier value with probability `duplicate_prob`, and is
/// otherwise uniform over `T`-bit strings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRankWorkload {
    pub seed: u64,
    pub duplicate_prob: f64,
}

impl SyntheticRankWorkload {
    pub fn new(seed: u64, duplicate_prob: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&duplicate_prob) {
            return Err(Error::InvalidInput(format!(
                "duplicate probability {duplicate_prob} outside [0, 1]"
            )));
        }
        Ok(SyntheticRankWorkload { seed, duplicate_prob })
    }

    pub fn map(&self, spec: &JobSpec) -> Result<IntermediateStore> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let t = spec.value_bits;
        let mut drawn: Vec<BitVec> = Vec::with_capacity(spec.functions * spec.files);
        for _ in 0..spec.functions * spec.files {
            let v = if !drawn.is_empty() && rng.random_bool(self.duplicate_prob) {
                drawn[rng.random_range(0..drawn.len())].clone()
            } else {
                let words = (0..t.div_ceil(64)).map(|_| rng.random::<u64>()).collect();
                BitVec::from_words(words, t)
            };
            drawn.push(v);
        }
        IntermediateStore::new(*spec, drawn)
    }
}
