use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::placement::JobSpec;

/// All intermediate values `v_{q,n}`, each `T` bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntermediateStore {
    spec: JobSpec,
    values: Vec<BitVec>,
}

impl IntermediateStore {
    /// `values` in row-major `(q, n)` order: index `(q-1)*N + (n-1)`.
    pub fn new(spec: JobSpec, values: Vec<BitVec>) -> Result<Self> {
        let expected = spec.functions * spec.files;
        if values.len() != expected {
            return Err(Error::Dimension(format!(
                "{} intermediate values, expected Q*N = {expected}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| v.len() != spec.value_bits) {
            return Err(Error::Dimension(format!(
                "intermediate value of {} bits, expected T = {}",
                v.len(),
                spec.value_bits
            )));
        }
        Ok(IntermediateStore { spec, values })
    }

    pub fn from_fn<F>(spec: JobSpec, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<BitVec>,
    {
        let mut values = Vec::with_capacity(spec.functions * spec.files);
        for q in 1..=spec.functions {
            for n in 1..=spec.files {
                values.push(f(q, n)?);
            }
        }
        IntermediateStore::new(spec, values)
    }

    pub fn spec(&self) -> &JobSpec {
        &self.spec
    }

    pub fn get(&self, q: usize, n: usize) -> &BitVec {
        assert!(
            (1..=self.spec.functions).contains(&q) && (1..=self.spec.files).contains(&n),
            "v_({q},{n}) out of range"
        );
        &self.values[(q - 1) * self.spec.files + (n - 1)]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `v_{q,1}, ..., v_{q,N}`.
    pub fn function_values(&self, q: usize) -> &[BitVec] {
        let start = (q - 1) * self.spec.files;
        &self.values[start..start + self.spec.files]
    }
}
