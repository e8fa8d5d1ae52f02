//! Rank compression of a node's coded messages.
//!
//! For each group size `l`, node `k` stacks its `C(K-1, l-1)` message
//! vectors into a GF(2) matrix, sends a row basis of rank `rho_{k,l}`, and
//! one `rho`-bit coefficient vector per original message.

use serde::{Deserialize, Serialize};

use super::encode::{groups_of, CodedMessage};
use crate::error::{Error, Result};
use crate::gf2::{rank_and_basis, reconstruct, BasisDecomposition, BitVec, Gf2Matrix};
use crate::placement::{binomial, NodeSet};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LdPayload {
    pub node: usize,
    pub group_size: usize,
    /// Length of every original message vector.
    pub message_bits: usize,
    pub basis: Vec<BitVec>,
    /// One coefficient vector per group, groups in lexicographic order.
    pub coeffs: Vec<BitVec>,
}

impl LdPayload {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// `rho * message_bits + rho * message_count`.
    pub fn bit_cost(&self) -> usize {
        self.rank() * self.message_bits + self.rank() * self.coeffs.len()
    }

    /// Transmitted bits, counted from the actual vectors.
    pub fn wire_bits(&self) -> usize {
        self.basis.iter().map(BitVec::len).sum::<usize>() + self.coeffs.iter().map(BitVec::len).sum::<usize>()
    }
}

/// Compresses all messages node `k` sends to groups of size `group_size`.
/// `messages` must be in the order of [`groups_of`].
pub fn ld_compress(k: usize, group_size: usize, nodes: usize, messages: &[CodedMessage]) -> Result<LdPayload> {
    let expected = binomial(nodes - 1, group_size - 1) as usize;
    if messages.len() != expected {
        return Err(Error::InvalidInput(format!(
            "{} messages for node {k}, group size {group_size}; expected C({}, {}) = {expected}",
            messages.len(),
            nodes - 1,
            group_size - 1
        )));
    }
    for (m, g) in messages.iter().zip(groups_of(k, group_size, nodes)) {
        if m.sender != k || m.group != g {
            return Err(Error::InvalidInput(format!(
                "message from node {} to {} where node {k} to {g} was expected",
                m.sender, m.group
            )));
        }
    }
    let rows: Vec<BitVec> = messages.iter().map(CodedMessage::vector).collect();
    let message_bits = rows.first().map_or(0, BitVec::len);
    let matrix = Gf2Matrix::new(rows, message_bits)
        .map_err(|_| Error::InvalidInput(format!("node {k} messages differ in length")))?;
    let d = rank_and_basis(&matrix);
    Ok(LdPayload {
        node: k,
        group_size,
        message_bits,
        basis: d.basis,
        coeffs: d.coeffs,
    })
}

/// Original message vectors, in group order.
pub fn ld_decompress(p: &LdPayload) -> Result<Vec<BitVec>> {
    let d = BasisDecomposition {
        basis: p.basis.clone(),
        coeffs: p.coeffs.clone(),
        ncols: p.message_bits,
    };
    Ok(reconstruct(&d)?.into_rows())
}

/// Decompressed vectors paired with the groups they were sent to.
pub fn ld_decompress_groups(p: &LdPayload, nodes: usize) -> Result<Vec<(NodeSet, BitVec)>> {
    let groups = groups_of(p.node, p.group_size, nodes);
    if groups.len() != p.coeffs.len() {
        return Err(Error::Malformed(format!(
            "payload of node {} holds {} coefficient vectors for {} groups",
            p.node,
            p.coeffs.len(),
            groups.len()
        )));
    }
    Ok(groups.into_iter().zip(ld_decompress(p)?).collect())
}
