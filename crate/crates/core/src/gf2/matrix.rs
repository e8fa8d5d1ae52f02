//! Row matrices over GF(2) and basis extraction.

use serde::{Deserialize, Serialize};

use super::BitVec;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gf2Matrix {
    rows: Vec<BitVec>,
    ncols: usize,
}

impl Gf2Matrix {
    pub fn new(rows: Vec<BitVec>, ncols: usize) -> Result<Self> {
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
            return Err(Error::Dimension(format!(
                "row {i} has {} bits, expected {ncols}",
                r.len()
            )));
        }
        Ok(Gf2Matrix { rows, ncols })
    }

    /// Matrix from rows that must all share one length. An empty list gives a
    /// 0x0 matrix.
    pub fn from_rows(rows: Vec<BitVec>) -> Result<Self> {
        let ncols = rows.first().map_or(0, BitVec::len);
        Gf2Matrix::new(rows, ncols)
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Gf2Matrix {
            rows: vec![BitVec::zeros(ncols); nrows],
            ncols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let mut r = BitVec::zeros(n);
                r.set(i, true);
                r
            })
            .collect();
        Gf2Matrix { rows, ncols: n }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.rows[i]
    }

    pub fn into_rows(self) -> Vec<BitVec> {
        self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    /// Matrix-vector product `M x`.
    pub fn mul_vec(&self, x: &BitVec) -> Result<BitVec> {
        if x.len() != self.ncols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.ncols
            )));
        }
        Ok(BitVec::from_bits(self.rows.iter().map(|r| r.dot(x))))
    }

    /// Rows `start..start + count` as a new matrix.
    pub fn row_block(&self, start: usize, count: usize) -> Gf2Matrix {
        Gf2Matrix {
            rows: self.rows[start..start + count].to_vec(),
            ncols: self.ncols,
        }
    }

    pub fn rank(&self) -> usize {
        rank_and_basis(self).rank()
    }
}

/// A row space basis plus, for every original row, the combination of basis
/// rows that reproduces it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisDecomposition {
    pub basis: Vec<BitVec>,
    pub coeffs: Vec<BitVec>,
    pub ncols: usize,
}

impl BasisDecomposition {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }
}

struct EchelonRow {
    pivot: usize,
    reduced: BitVec,
    // combination of basis rows equal to `reduced`
    combo: BitVec,
}

/// Gaussian elimination over GF(2), one row at a time.
///
/// The basis is the list of original rows that were independent of every row
/// before them, in input order. Elimination pivots on the first nonzero
/// column of each newly independent row.
pub fn rank_and_basis(m: &Gf2Matrix) -> BasisDecomposition {
    let nrows = m.nrows();
    let mut echelon: Vec<EchelonRow> = Vec::new();
    let mut basis: Vec<BitVec> = Vec::new();
    let mut coeffs: Vec<BitVec> = Vec::with_capacity(nrows);

    for row in m.rows() {
        let mut cur = row.clone();
        let mut combo = BitVec::zeros(nrows);
        for e in &echelon {
            if cur.get(e.pivot) {
                cur.xor_assign(&e.reduced);
                combo.xor_assign(&e.combo);
            }
        }
        match cur.first_one() {
            None => coeffs.push(combo),
            Some(pivot) => {
                let idx = basis.len();
                basis.push(row.clone());
                combo.set(idx, true);
                let mut unit = BitVec::zeros(nrows);
                unit.set(idx, true);
                coeffs.push(unit);
                echelon.push(EchelonRow {
                    pivot,
                    reduced: cur,
                    combo,
                });
            }
        }
    }

    let rho = basis.len();
    let coeffs = coeffs.into_iter().map(|c| c.slice(0, rho)).collect();
    BasisDecomposition {
        basis,
        coeffs,
        ncols: m.ncols(),
    }
}

/// Rebuilds the original rows from a decomposition.
pub fn reconstruct(b: &BasisDecomposition) -> Result<Gf2Matrix> {
    let rho = b.rank();
    if let Some(v) = b.basis.iter().find(|v| v.len() != b.ncols) {
        return Err(Error::Malformed(format!(
            "basis vector of length {} in a decomposition with {} columns",
            v.len(),
            b.ncols
        )));
    }
    let mut rows = Vec::with_capacity(b.coeffs.len());
    for (i, c) in b.coeffs.iter().enumerate() {
        if c.len() != rho {
            return Err(Error::Malformed(format!(
                "coefficient vector {i} has length {}, rank is {rho}",
                c.len()
            )));
        }
        let mut row = BitVec::zeros(b.ncols);
        for (j, v) in b.basis.iter().enumerate() {
            if c.get(j) {
                row.xor_assign(v);
            }
        }
        rows.push(row);
    }
    Gf2Matrix::new(rows, b.ncols)
}
