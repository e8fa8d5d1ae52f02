use serde::{Deserialize, Serialize};

use super::vset::{build_vset, segment_bits, segment_usymbol, ValueSource};
use crate::error::{Error, Result};
use crate::gf2::{vandermonde, BitVec, ExtField};
use crate::placement::{binomial, ksubsets, NodeSet, Placement};

/// `X_k^S`: the `n_S` components node `k` multicasts to group `S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodedMessage {
    pub sender: usize,
    pub group: NodeSet,
    pub components: Vec<BitVec>,
}

impl CodedMessage {
    /// All components back to back.
    pub fn vector(&self) -> BitVec {
        BitVec::concat(&self.components)
    }

    pub fn bits(&self) -> usize {
        self.components.iter().map(BitVec::len).sum()
    }
}

/// `m_S = C(|S|-1, r-1)`: r-subsets of the group containing the sender.
pub fn source_segments(r: usize, group_size: usize) -> usize {
    binomial(group_size - 1, r - 1) as usize
}

/// `n_S = C(|S|-2, r-1)`: components per message.
pub fn message_components(r: usize, group_size: usize) -> usize {
    binomial(group_size - 2, r - 1) as usize
}

/// Coefficient field for groups of this size, or `None` when a message has
/// a single all-ones row and is a plain XOR.
pub fn coefficient_field(r: usize, group_size: usize) -> Result<Option<ExtField>> {
    if message_components(r, group_size) <= 1 {
        Ok(None)
    } else {
        ExtField::with_distinct_points(source_segments(r, group_size)).map(Some)
    }
}

/// Bits per component: the segment length, rounded up to whole field
/// symbols when a coefficient field is in use.
pub fn component_bits(placement: &Placement, group_size: usize) -> Result<usize> {
    let seg = segment_bits(placement, group_size);
    Ok(match coefficient_field(placement.spec().r, group_size)? {
        None => seg,
        Some(f) => seg.next_multiple_of(f.degree() as usize),
    })
}

/// Length of the full message vector `X_k^S`.
pub fn message_bits(placement: &Placement, group_size: usize) -> Result<usize> {
    Ok(message_components(placement.spec().r, group_size) * component_bits(placement, group_size)?)
}

/// Groups of size `group_size` containing `node`, in lexicographic order.
pub fn groups_of(node: usize, group_size: usize, nodes: usize) -> Vec<NodeSet> {
    ksubsets(nodes, group_size)
        .into_iter()
        .filter(|g| g.contains(node))
        .collect()
}

/// Builds `X_k^S = A_S [U_{S_(k)[1],k}; ...; U_{S_(k)[m_S],k}]`.
///
/// `S_(k)[i]` runs over the r-subsets of `S` containing `k` in lexicographic
/// order. With one component the message is the XOR of the segments;
/// otherwise row `i` of `A_S` is `(a_1^i, ..., a_m^i)` over GF(2^λ), applied
/// symbol-wise to zero-padded segments.
pub fn encode_cdc<V: ValueSource + ?Sized>(
    k: usize,
    group: NodeSet,
    placement: &Placement,
    values: &V,
) -> Result<CodedMessage> {
    let r = placement.spec().r;
    if !group.contains(k) {
        return Err(Error::InvalidInput(format!("node {k} is not in group {group}")));
    }
    let mut segments = Vec::new();
    for holders in group.subsets(r).into_iter().filter(|h| h.contains(k)) {
        let u = segment_usymbol(&build_vset(group, holders, placement)?, values)?;
        segments.push(u.segment_for(k).expect("sender holds the batch").clone());
    }

    let components = match coefficient_field(r, group.len())? {
        None => {
            let mut acc = BitVec::zeros(segments[0].len());
            for s in &segments {
                acc.xor_assign(s);
            }
            vec![acc]
        }
        Some(field) => {
            let width = component_bits(placement, group.len())?;
            for s in &mut segments {
                s.pad_zeros(width - s.len());
            }
            let a = vandermonde(&field, segments.len(), message_components(r, group.len()))?;
            a.iter()
                .map(|row| {
                    let mut acc = BitVec::zeros(width);
                    for (coef, seg) in row.iter().zip(&segments) {
                        acc.xor_assign(&field.scale(*coef, seg));
                    }
                    acc
                })
                .collect()
        }
    };
    Ok(CodedMessage {
        sender: k,
        group,
        components,
    })
}

/// Every message node `k` sends to groups of size `group_size`, in the
/// order of [`groups_of`].
pub fn encode_node_messages<V: ValueSource + ?Sized>(
    k: usize,
    group_size: usize,
    placement: &Placement,
    values: &V,
) -> Result<Vec<CodedMessage>> {
    groups_of(k, group_size, placement.spec().nodes)
        .into_iter()
        .map(|g| encode_cdc(k, g, placement, values))
        .collect()
}
