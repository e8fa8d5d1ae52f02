//! Distributed linear transforms `y_n = A x_n` over GF(2).
//!
//! The rows of `A` are split into `Q` equal blocks `A_1..A_Q`; reduce
//! function `q` owns block `q` and `v_{q,n} = A_q x_n` has `T = m / Q` bits.
//!
//! Matrix text format, used for `--input`:
//!
//! ```text
//! gf2-matrix <rows> <cols>
//! <row 1 as hex>
//! ...
//! ```
//!
//! Each row is little-endian packed hex (byte `j` holds columns `8j..8j+8`,
//! lowest column in the lowest bit). A workload file holds two such
//! sections: `A` first, then the inputs `x_1..x_N` as rows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::IntermediateStore;
use crate::error::{Error, Result};
use crate::gf2::{BitVec, Gf2Matrix};
use crate::placement::JobSpec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearTransformWorkload {
    matrix: Gf2Matrix,
    inputs: Vec<BitVec>,
}

/// How coded storage `U_k = E_k A` is generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Redundancy {
    /// `A` is cut into `K - 1` row blocks held as-is; block `K` is their XOR.
    Parity,
}

fn random_bits(rng: &mut ChaCha8Rng, len: usize, density: f64) -> BitVec {
    BitVec::from_bits((0..len).map(|_| rng.random_bool(density)))
}

impl LinearTransformWorkload {
    pub fn new(matrix: Gf2Matrix, inputs: Vec<BitVec>) -> Result<Self> {
        if let Some(x) = inputs.iter().find(|x| x.len() != matrix.ncols()) {
            return Err(Error::Dimension(format!(
                "input of length {} for a matrix with {} columns",
                x.len(),
                matrix.ncols()
            )));
        }
        Ok(LinearTransformWorkload { matrix, inputs })
    }

    /// Random `rows x cols` matrix and `count` inputs; each bit is one with
    /// probability `density`.
    pub fn random(seed: u64, rows: usize, cols: usize, count: usize, density: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&density) {
            return Err(Error::InvalidInput(format!("density {density} outside [0, 1]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = (0..rows).map(|_| random_bits(&mut rng, cols, density)).collect();
        let matrix = Gf2Matrix::new(a, cols)?;
        let inputs = (0..count).map(|_| random_bits(&mut rng, cols, density)).collect();
        LinearTransformWorkload::new(matrix, inputs)
    }

    pub fn matrix(&self) -> &Gf2Matrix {
        &self.matrix
    }

    pub fn inputs(&self) -> &[BitVec] {
        &self.inputs
    }

    fn check_inputs(&self, spec: &JobSpec) -> Result<()> {
        if self.inputs.len() != spec.files {
            return Err(Error::Dimension(format!(
                "{} input vectors but N = {}",
                self.inputs.len(),
                spec.files
            )));
        }
        Ok(())
    }

    fn check_blocks(&self, blocks: usize, spec: &JobSpec) -> Result<()> {
        let m = self.matrix.nrows();
        if !m.is_multiple_of(blocks) || m / blocks != spec.value_bits {
            return Err(Error::Dimension(format!(
                "{m} matrix rows do not split into {blocks} blocks of T = {} rows",
                spec.value_bits
            )));
        }
        Ok(())
    }

    /// `v_{q,n} = A_q x_n`; needs `Q | m` and `T = m / Q`.
    pub fn map(&self, spec: &JobSpec) -> Result<IntermediateStore> {
        self.check_inputs(spec)?;
        self.check_blocks(spec.functions, spec)?;
        let t = spec.value_bits;
        let blocks: Vec<Gf2Matrix> = (0..spec.functions)
            .map(|q| self.matrix.row_block(q * t, t))
            .collect();
        IntermediateStore::from_fn(*spec, |q, n| blocks[q - 1].mul_vec(&self.inputs[n - 1]))
    }

    /// Storage blocks `U_1..U_K` for the given redundancy pattern.
    pub fn coded_blocks(&self, redundancy: Redundancy, spec: &JobSpec) -> Result<Vec<Gf2Matrix>> {
        let k = spec.nodes;
        if k < 2 {
            return Err(Error::InvalidInput("coded storage needs at least 2 nodes".into()));
        }
        if spec.functions != k {
            return Err(Error::Dimension(format!(
                "coded transform needs Q = K, got Q = {} and K = {k}",
                spec.functions
            )));
        }
        self.check_blocks(k - 1, spec)?;
        let t = spec.value_bits;
        match redundancy {
            Redundancy::Parity => {
                let mut blocks: Vec<Gf2Matrix> =
                    (0..k - 1).map(|i| self.matrix.row_block(i * t, t)).collect();
                let mut parity = Gf2Matrix::zeros(t, self.matrix.ncols()).into_rows();
                for b in &blocks {
                    for (p, row) in parity.iter_mut().zip(b.rows()) {
                        p.xor_assign(row);
                    }
                }
                blocks.push(Gf2Matrix::new(parity, self.matrix.ncols())?);
                Ok(blocks)
            }
        }
    }

    /// `v_{k,n} = U_k x_n` with `U_k` from [`Self::coded_blocks`].
    pub fn coded_map(&self, redundancy: Redundancy, spec: &JobSpec) -> Result<IntermediateStore> {
        self.check_inputs(spec)?;
        let blocks = self.coded_blocks(redundancy, spec)?;
        IntermediateStore::from_fn(*spec, |q, n| blocks[q - 1].mul_vec(&self.inputs[n - 1]))
    }

    /// Full products `A x_n`, one per input.
    pub fn products(&self) -> Result<Vec<BitVec>> {
        self.inputs.iter().map(|x| self.matrix.mul_vec(x)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format_matrix(&self.matrix);
        let inputs = Gf2Matrix::new(self.inputs.clone(), self.matrix.ncols()).expect("checked at construction");
        out.push_str(&format_matrix(&inputs));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let matrix = parse_section(&mut lines)?;
        let inputs = parse_section(&mut lines)?;
        if lines.next().is_some() {
            return Err(Error::Malformed("trailing data after input section".into()));
        }
        LinearTransformWorkload::new(matrix, inputs.into_rows())
    }
}

pub fn format_matrix(m: &Gf2Matrix) -> String {
    let mut out = format!("gf2-matrix {} {}\n", m.nrows(), m.ncols());
    for r in m.rows() {
        out.push_str(&r.to_hex());
        out.push('\n');
    }
    out
}

fn parse_section<'a, I: Iterator<Item = &'a str>>(lines: &mut I) -> Result<Gf2Matrix> {
    let header = lines
        .next()
        .ok_or_else(|| Error::Malformed("missing gf2-matrix header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let dims = match fields.as_slice() {
        ["gf2-matrix", r, c] => r.parse::<usize>().ok().zip(c.parse::<usize>().ok()),
        _ => None,
    };
    let (rows, cols) = dims.ok_or_else(|| Error::Malformed(format!("bad header {header:?}")))?;
    let mut out = Vec::with_capacity(rows);
    for i in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| Error::Malformed(format!("expected {rows} rows, found {i}")))?;
        out.push(BitVec::from_hex(line, cols)?);
    }
    Gf2Matrix::new(out, cols)
}
