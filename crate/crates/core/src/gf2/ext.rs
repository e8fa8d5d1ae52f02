//! GF(2^λ) arithmetic for small λ and the Vandermonde coefficient matrices
//! used by multi-component coded messages.
//!
//! Elements are polynomials over GF(2) packed into a `u32`, bit `i` being the
//! coefficient of `x^i`. Each degree uses one fixed modulus:
//!
//! | λ  | modulus                         | hex     |
//! |----|---------------------------------|---------|
//! | 1  | x + 1                           | 0x3     |
//! | 2  | x^2 + x + 1                     | 0x7     |
//! | 3  | x^3 + x + 1                     | 0xB     |
//! | 4  | x^4 + x + 1                     | 0x13    |
//! | 5  | x^5 + x^2 + 1                   | 0x25    |
//! | 6  | x^6 + x + 1                     | 0x43    |
//! | 7  | x^7 + x + 1                     | 0x83    |
//! | 8  | x^8 + x^4 + x^3 + x^2 + 1       | 0x11D   |
//! | 9  | x^9 + x^4 + 1                   | 0x211   |
//! | 10 | x^10 + x^3 + 1                  | 0x409   |
//! | 11 | x^11 + x^2 + 1                  | 0x805   |
//! | 12 | x^12 + x^6 + x^4 + x + 1        | 0x1053  |
//! | 13 | x^13 + x^4 + x^3 + x + 1        | 0x201B  |
//! | 14 | x^14 + x^10 + x^6 + x + 1       | 0x4443  |
//! | 15 | x^15 + x + 1                    | 0x8003  |
//! | 16 | x^16 + x^12 + x^3 + x + 1       | 0x1100B |
//!
//! These are the usual primitive polynomials from coding-theory tables.

use crate::error::{Error, Result};
use crate::gf2::BitVec;

pub const MAX_DEGREE: u32 = 16;

const MODULI: [u32; 16] = [
    0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B,
];

/// An element of some GF(2^λ). Arithmetic goes through [`ExtField`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtElement(pub u32);

impl ExtElement {
    pub const ZERO: ExtElement = ExtElement(0);
    pub const ONE: ExtElement = ExtElement(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtField {
    degree: u32,
    modulus: u32,
}

impl ExtField {
    pub fn new(degree: u32) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(Error::UnsupportedDegree(degree));
        }
        Ok(ExtField {
            degree,
            modulus: MODULI[degree as usize - 1],
        })
    }

    /// Smallest field with more than `points` elements, i.e. at least
    /// `points` distinct nonzero elements.
    pub fn with_distinct_points(points: usize) -> Result<Self> {
        let degree = (1..=MAX_DEGREE)
            .find(|&d| (1usize << d) > points)
            .ok_or(Error::FieldTooSmall {
                degree: MAX_DEGREE,
                needed: points,
            })?;
        ExtField::new(degree)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn order(&self) -> usize {
        1usize << self.degree
    }

    pub fn element(&self, value: u32) -> Result<ExtElement> {
        if (value as u64) >> self.degree != 0 {
            return Err(Error::InvalidInput(format!(
                "{value:#x} is not an element of GF(2^{})",
                self.degree
            )));
        }
        Ok(ExtElement(value))
    }

    /// Nonzero elements in increasing order of their bit pattern.
    pub fn nonzero_elements(&self) -> impl Iterator<Item = ExtElement> {
        (1..(1u32 << self.degree)).map(ExtElement)
    }

    #[inline]
    pub fn add(&self, a: ExtElement, b: ExtElement) -> ExtElement {
        ExtElement(a.0 ^ b.0)
    }

    /// Shift-and-add multiplication with reduction after each shift.
    pub fn mul(&self, a: ExtElement, b: ExtElement) -> ExtElement {
        let top = 1u32 << self.degree;
        let mut acc = 0u32;
        let mut x = a.0;
        let mut y = b.0;
        while y != 0 {
            if y & 1 == 1 {
                acc ^= x;
            }
            y >>= 1;
            x <<= 1;
            if x & top != 0 {
                x ^= self.modulus;
            }
        }
        ExtElement(acc)
    }

    pub fn pow(&self, a: ExtElement, mut e: u64) -> ExtElement {
        let mut base = a;
        let mut acc = ExtElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `a^(2^λ - 2)`; `None` for zero.
    pub fn inverse(&self, a: ExtElement) -> Option<ExtElement> {
        if a.is_zero() {
            None
        } else {
            Some(self.pow(a, (1u64 << self.degree) - 2))
        }
    }

    /// Multiplies a bit string by a scalar, one λ-bit symbol at a time.
    /// Symbol `j` covers bits `jλ..(j+1)λ` with the first bit as the
    /// constant coefficient. The length must be a multiple of λ.
    pub fn scale(&self, scalar: ExtElement, v: &BitVec) -> BitVec {
        let d = self.degree as usize;
        assert_eq!(v.len() % d, 0, "length {} not a multiple of λ = {d}", v.len());
        if scalar == ExtElement::ONE {
            return v.clone();
        }
        let mut out = BitVec::zeros(v.len());
        if scalar.is_zero() {
            return out;
        }
        for j in 0..v.len() / d {
            let mut sym = 0u32;
            for t in 0..d {
                if v.get(j * d + t) {
                    sym |= 1 << t;
                }
            }
            let prod = self.mul(scalar, ExtElement(sym)).0;
            for t in 0..d {
                if (prod >> t) & 1 == 1 {
                    out.set(j * d + t, true);
                }
            }
        }
        out
    }
}

/// `n x m` matrix with entry `(i, j) = a_j^i`, where `a_j` is the `j`-th
/// nonzero field element (1-based, increasing bit pattern). Row 0 is all ones.
pub fn vandermonde(field: &ExtField, m: usize, n: usize) -> Result<Vec<Vec<ExtElement>>> {
    if field.order() <= m {
        return Err(Error::FieldTooSmall {
            degree: field.degree(),
            needed: m,
        });
    }
    if n > m {
        return Err(Error::Dimension(format!(
            "vandermonde with {n} rows and only {m} columns"
        )));
    }
    let points: Vec<ExtElement> = field.nonzero_elements().take(m).collect();
    Ok((0..n)
        .map(|i| points.iter().map(|&a| field.pow(a, i as u64)).collect())
        .collect())
}
