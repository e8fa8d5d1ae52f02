//! Map functions, reduce functions and single-machine references for the
//! supported workloads.

mod lintrans;
mod store;
mod synthetic;
mod wordcount;

use serde::{Deserialize, Serialize};

pub use lintrans::{format_matrix, LinearTransformWorkload, Redundancy};
pub use store::IntermediateStore;
pub use synthetic::SyntheticRankWorkload;
pub use wordcount::{ingest_text, IngestReport, Tokenizer, WordCountWorkload, EXAMPLE_SEQUENCE};

use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::placement::JobSpec;

/// Output of one reduce function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReduceOutput {
    /// Word count: total occurrences of the symbol.
    Count(u64),
    /// Linear transforms and synthetic values: `v_{q,1} || ... || v_{q,N}`.
    Bits(BitVec),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Workload {
    WordCount(WordCountWorkload),
    LinearTransform(LinearTransformWorkload),
    CodedLinearTransform(LinearTransformWorkload, Redundancy),
    Synthetic(SyntheticRankWorkload),
}

impl Workload {
    pub fn kind(&self) -> &'static str {
        match self {
            Workload::WordCount(_) => "wordcount",
            Workload::LinearTransform(_) => "lintrans",
            Workload::CodedLinearTransform(..) => "lintrans-coded",
            Workload::Synthetic(_) => "synthetic",
        }
    }

    /// Map phase: every `v_{q,n}`.
    pub fn map(&self, spec: &JobSpec) -> Result<IntermediateStore> {
        spec.validate()?;
        match self {
            Workload::WordCount(w) => w.map(spec),
            Workload::LinearTransform(w) => w.map(spec),
            Workload::CodedLinearTransform(w, red) => w.coded_map(*red, spec),
            Workload::Synthetic(w) => w.map(spec),
        }
    }

    /// Reduce function `h_q` applied to `v_{q,1}, ..., v_{q,N}` in file order.
    pub fn reduce<'a, I>(&self, values: I) -> Result<ReduceOutput>
    where
        I: IntoIterator<Item = &'a BitVec>,
    {
        match self {
            Workload::WordCount(_) => {
                let mut total = 0u64;
                for v in values {
                    let c = v
                        .to_uint()
                        .ok_or_else(|| Error::InvalidInput("count wider than 64 bits".into()))?;
                    total = total
                        .checked_add(c)
                        .ok_or_else(|| Error::InvalidInput("count sum overflows u64".into()))?;
                }
                Ok(ReduceOutput::Count(total))
            }
            _ => Ok(ReduceOutput::Bits(BitVec::concat(values))),
        }
    }

    /// Every output `phi_q` computed directly on one machine, indexed by `q - 1`.
    pub fn reference_outputs(&self, spec: &JobSpec) -> Result<Vec<ReduceOutput>> {
        let q_range = 1..=spec.functions;
        match self {
            Workload::WordCount(w) => Ok(q_range.map(|q| ReduceOutput::Count(w.total_count(q))).collect()),
            Workload::LinearTransform(w) => {
                let ys = w.products()?;
                let t = spec.value_bits;
                Ok(q_range
                    .map(|q| ReduceOutput::Bits(BitVec::concat(ys.iter().map(|y| y.slice((q - 1) * t, t)).collect::<Vec<_>>().iter())))
                    .collect())
            }
            Workload::CodedLinearTransform(w, Redundancy::Parity) => {
                let ys = w.products()?;
                let t = spec.value_bits;
                let k = spec.nodes;
                let piece = |y: &BitVec, q: usize| -> BitVec {
                    if q < k {
                        y.slice((q - 1) * t, t)
                    } else {
                        (0..k - 1).fold(BitVec::zeros(t), |acc, i| acc.xor(&y.slice(i * t, t)))
                    }
                };
                Ok(q_range
                    .map(|q| ReduceOutput::Bits(BitVec::concat(ys.iter().map(|y| piece(y, q)).collect::<Vec<_>>().iter())))
                    .collect())
            }
            Workload::Synthetic(w) => {
                let store = w.map(spec)?;
                Ok(q_range
                    .map(|q| ReduceOutput::Bits(BitVec::concat(store.function_values(q))))
                    .collect())
            }
        }
    }
}
