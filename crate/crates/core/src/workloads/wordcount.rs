//! Word counting: `v_{q,n}` is the number of occurrences of symbol `q` in
//! block `n`, encoded in `T` bits with the least significant bit first.

use std::collections::BTreeMap;
use std::io::Read;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::IntermediateStore;
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::placement::JobSpec;

/// The six seven-symbol blocks of the worked example.
pub const EXAMPLE_SEQUENCE: &str = "1212231 2111121 2312131 3112132 1131414 1141231";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordCountWorkload {
    alphabet: usize,
    blocks: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tokenizer {
    /// Tokens are maximal runs of non-whitespace.
    Whitespace,
    /// Every non-whitespace character is a token.
    Chars,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub total_tokens: usize,
    pub kept_tokens: usize,
    pub dropped_tokens: usize,
    pub distinct_tokens: usize,
    /// Token assigned to symbol `q` is `vocabulary[q - 1]`.
    pub vocabulary: Vec<String>,
}

impl WordCountWorkload {
    pub fn new(alphabet: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::InvalidInput("alphabet size Q must be positive".into()));
        }
        if let Some(&bad) = blocks.iter().flatten().find(|&&s| !(1..=alphabet).contains(&s)) {
            return Err(Error::InvalidInput(format!(
                "symbol {bad} outside 1..={alphabet}"
            )));
        }
        Ok(WordCountWorkload { alphabet, blocks })
    }

    /// The worked example: Q = 4, N = 6.
    pub fn example() -> Self {
        let (w, _) = ingest_text(EXAMPLE_SEQUENCE.as_bytes(), 4, 6, Tokenizer::Chars)
            .expect("example sequence ingests");
        w
    }

    /// `files` blocks of `block_len` symbols drawn with Zipf weights
    /// `1 / rank^exponent`. Larger exponents give sparser count tables.
    pub fn random(seed: u64, alphabet: usize, files: usize, block_len: usize, exponent: f64) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::InvalidInput("alphabet size Q must be positive".into()));
        }
        let weights: Vec<f64> = (1..=alphabet).map(|i| (i as f64).powf(-exponent)).collect();
        let dist = WeightedIndex::new(&weights)
            .map_err(|e| Error::InvalidInput(format!("bad symbol weights: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks = (0..files)
            .map(|_| (0..block_len).map(|_| dist.sample(&mut rng) + 1).collect())
            .collect();
        WordCountWorkload::new(alphabet, blocks)
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn count(&self, q: usize, n: usize) -> u64 {
        self.blocks[n - 1].iter().filter(|&&s| s == q).count() as u64
    }

    /// Occurrences of `q` over the whole text, counted without going through
    /// blocks or intermediate values.
    pub fn total_count(&self, q: usize) -> u64 {
        self.blocks.iter().flatten().filter(|&&s| s == q).count() as u64
    }

    fn check(&self, spec: &JobSpec) -> Result<()> {
        if self.blocks.len() != spec.files {
            return Err(Error::Dimension(format!(
                "{} blocks but N = {}",
                self.blocks.len(),
                spec.files
            )));
        }
        if self.alphabet != spec.functions {
            return Err(Error::Dimension(format!(
                "alphabet of {} symbols but Q = {}",
                self.alphabet, spec.functions
            )));
        }
        Ok(())
    }

    pub fn map(&self, spec: &JobSpec) -> Result<IntermediateStore> {
        self.check(spec)?;
        IntermediateStore::from_fn(*spec, |q, n| BitVec::from_uint(self.count(q, n), spec.value_bits))
    }
}

/// Reads UTF-8 text, maps the `alphabet` most frequent tokens to symbols
/// `1..=alphabet` (ties broken lexicographically) and splits the token
/// stream into `files` blocks of `ceil(len / files)` tokens; the last blocks
/// may be shorter or empty. Tokens outside the vocabulary are dropped after
/// splitting, so they never shift block boundaries.
pub fn ingest_text<R: Read>(
    mut input: R,
    alphabet: usize,
    files: usize,
    tokenizer: Tokenizer,
) -> Result<(WordCountWorkload, IngestReport)> {
    if alphabet == 0 {
        return Err(Error::InvalidInput("alphabet size Q must be positive".into()));
    }
    if files == 0 {
        return Err(Error::InvalidInput("block count N must be positive".into()));
    }
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| Error::InvalidInput(format!("cannot read text: {e}")))?;
    let tokens: Vec<String> = match tokenizer {
        Tokenizer::Whitespace => text.split_whitespace().map(str::to_owned).collect(),
        Tokenizer::Chars => text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(String::from)
            .collect(),
    };
    if tokens.is_empty() {
        return Err(Error::InvalidInput("input contains no tokens".into()));
    }

    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &tokens {
        *freq.entry(t.as_str()).or_default() += 1;
    }
    let mut ranked: Vec<(&str, usize)> = freq.into_iter().collect();
    // BTreeMap order is lexicographic; the stable sort keeps it among ties.
    ranked.sort_by_key(|&(_, n)| std::cmp::Reverse(n));
    let vocabulary: Vec<String> = ranked.iter().take(alphabet).map(|(t, _)| t.to_string()).collect();
    let symbol_of: BTreeMap<&str, usize> = vocabulary
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i + 1))
        .collect();

    let block_len = tokens.len().div_ceil(files);
    let mut blocks = vec![Vec::new(); files];
    let mut kept = 0;
    for (i, t) in tokens.iter().enumerate() {
        if let Some(&sym) = symbol_of.get(t.as_str()) {
            blocks[i / block_len].push(sym);
            kept += 1;
        }
    }
    let report = IngestReport {
        total_tokens: tokens.len(),
        kept_tokens: kept,
        dropped_tokens: tokens.len() - kept,
        distinct_tokens: ranked.len(),
        vocabulary,
    };
    Ok((WordCountWorkload::new(alphabet, blocks)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_at(store: &IntermediateStore, q: usize, n: usize) -> u64 {
        store.get(q, n).to_uint().unwrap()
    }

    #[test]
    fn example_counts() {
        let w = WordCountWorkload::example();
        let spec = JobSpec::new(4, 6, 4, 2, 1, 6).unwrap();
        let store = w.map(&spec).unwrap();
        assert_eq!(count_at(&store, 1, 1), 3);
        assert_eq!(count_at(&store, 1, 2), 5);
        assert_eq!(count_at(&store, 1, 3), 3);
        assert_eq!(count_at(&store, 2, 3), 2);
        assert_eq!(count_at(&store, 3, 3), 2);
        assert_eq!(count_at(&store, 4, 1), 0);
        assert_eq!(count_at(&store, 4, 2), 0);
        assert_eq!(w.total_count(1), 22);
    }

    #[test]
    fn example_ingest_maps_digits_to_themselves() {
        let (_, report) = ingest_text(EXAMPLE_SEQUENCE.as_bytes(), 4, 6, Tokenizer::Chars).unwrap();
        assert_eq!(report.vocabulary, vec!["1", "2", "3", "4"]);
        assert_eq!(report.total_tokens, 42);
        assert_eq!(report.dropped_tokens, 0);
        let w = WordCountWorkload::example();
        assert!(w.blocks().iter().all(|b| b.len() == 7));
        assert_eq!(w.blocks()[0], vec![1, 2, 1, 2, 2, 3, 1]);
    }

    #[test]
    fn overflow_is_an_error() {
        let w = WordCountWorkload::new(2, vec![vec![1; 8], vec![]]).unwrap();
        let spec = JobSpec::new(2, 2, 2, 1, 1, 3).unwrap();
        assert_eq!(w.map(&spec).unwrap_err(), Error::Overflow { value: 8, bits: 3 });
        assert!(w.map(&spec.with_value_bits(4)).is_ok());
    }

    #[test]
    fn empty_block_counts_zero() {
        let w = WordCountWorkload::new(2, vec![vec![], vec![1, 2]]).unwrap();
        let store = w.map(&JobSpec::new(2, 2, 2, 1, 1, 4).unwrap()).unwrap();
        assert!(store.get(1, 1).is_zero() && store.get(2, 1).is_zero());
    }

    #[test]
    fn single_token_conservation() {
        let (w, _) = ingest_text("a a a a a".as_bytes(), 1, 2, Tokenizer::Whitespace).unwrap();
        assert_eq!(w.count(1, 1) + w.count(1, 2), 5);
    }

    #[test]
    fn two_token_blocks_sum_to_lengths() {
        let text = "x y y x x y x y y y x";
        let (w, report) = ingest_text(text.as_bytes(), 2, 4, Tokenizer::Whitespace).unwrap();
        // y (6) outranks x (5)
        assert_eq!(report.vocabulary, vec!["y", "x"]);
        let raw: Vec<&str> = text.split_whitespace().collect();
        for n in 1..=4 {
            let expected_len = raw.chunks(3).nth(n - 1).map_or(0, <[&str]>::len);
            assert_eq!(w.count(1, n) + w.count(2, n), expected_len as u64);
        }
    }

    #[test]
    fn rare_tokens_are_dropped_and_reported() {
        let (w, report) = ingest_text("b a c a b a".as_bytes(), 2, 2, Tokenizer::Whitespace).unwrap();
        assert_eq!(report.vocabulary, vec!["a", "b"]);
        assert_eq!(report.dropped_tokens, 1);
        assert_eq!(w.blocks()[1], vec![1, 2, 1]);
    }

    #[test]
    fn ingest_errors() {
        assert!(ingest_text("   ".as_bytes(), 2, 2, Tokenizer::Whitespace).is_err());
        assert!(ingest_text("a".as_bytes(), 0, 2, Tokenizer::Whitespace).is_err());
        assert!(ingest_text("a".as_bytes(), 1, 0, Tokenizer::Whitespace).is_err());
    }

    #[test]
    fn random_text_is_seeded() {
        let a = WordCountWorkload::random(3, 10, 5, 20, 1.2).unwrap();
        let b = WordCountWorkload::random(3, 10, 5, 20, 1.2).unwrap();
        assert_eq!(a, b);
        for q in 1..=10 {
            let per_block: u64 = (1..=5).map(|n| a.count(q, n)).sum();
            assert_eq!(per_block, a.total_count(q));
        }
    }
}
