//! XOR peeling for `s = 1`.
//!
//! For every group `S` containing the receiver `k`, the message from each
//! other member `j` is the XOR of `j`'s segments of the U-symbols of all
//! r-subsets of `S` containing `j`. Only the subset `S \ {k}` carries values
//! `k` lacks; every other subset contains `k`, so `k` rebuilds those segments
//! from its own files and strips them off. The `r` peeled segments
//! reassemble the U-symbol `k` needs.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::encode::groups_of;
use super::vset::{build_vset, segment_bits, segment_usymbol, ValueSource};
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::placement::{NodeSet, Placement};
use crate::workloads::IntermediateStore;

/// The values a node computed in the map phase: every `v_{q,n}` with `n`
/// in the node's file set.
pub struct LocalView<'a> {
    node: usize,
    store: &'a IntermediateStore,
    files: &'a BTreeSet<usize>,
}

impl<'a> LocalView<'a> {
    pub fn new(node: usize, store: &'a IntermediateStore, placement: &'a Placement) -> Result<Self> {
        Ok(LocalView {
            node,
            store,
            files: placement.node_files(node)?,
        })
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn holds(&self, n: usize) -> bool {
        self.files.contains(&n)
    }
}

impl ValueSource for LocalView<'_> {
    fn value(&self, q: usize, n: usize) -> Result<&BitVec> {
        if self.holds(n) {
            Ok(self.store.get(q, n))
        } else {
            Err(Error::InvalidInput(format!(
                "node {} did not map file {n}",
                self.node
            )))
        }
    }
}

/// Message vectors a node has heard, keyed by `(sender, group)`.
#[derive(Clone, Debug, Default)]
pub struct ReceivedMessages {
    messages: HashMap<(usize, NodeSet), BitVec>,
}

impl ReceivedMessages {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, sender: usize, group: NodeSet, vector: BitVec) {
        self.messages.insert((sender, group), vector);
    }

    pub fn get(&self, sender: usize, group: NodeSet) -> Option<&BitVec> {
        self.messages.get(&(sender, group))
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }
}

/// Recovers every value in `needed_values(k)`.
pub fn decode_cdc_s1(
    k: usize,
    received: &ReceivedMessages,
    local: &LocalView<'_>,
    placement: &Placement,
) -> Result<BTreeMap<(usize, usize), BitVec>> {
    let spec = placement.spec();
    if spec.s != 1 {
        return Err(Error::Unsupported(format!("XOR peeling needs s = 1, got s = {}", spec.s)));
    }
    if local.node() != k {
        return Err(Error::InvalidInput(format!(
            "local view of node {} used to decode node {k}",
            local.node()
        )));
    }
    let r = spec.r;
    let t = spec.value_bits;
    let seg_bits = segment_bits(placement, r + 1);
    let mut recovered = BTreeMap::new();
    let mut missing = Vec::new();

    if r >= spec.nodes {
        return Ok(recovered);
    }
    for group in groups_of(k, r + 1, spec.nodes) {
        let target = group.remove(k);
        let vset = build_vset(group, target, placement)?;
        let mut pieces = Vec::with_capacity(r);
        for j in target.iter() {
            let Some(msg) = received.get(j, group) else {
                break;
            };
            if msg.len() != seg_bits {
                return Err(Error::Malformed(format!(
                    "message from node {j} to {group} has {} bits, expected {seg_bits}",
                    msg.len()
                )));
            }
            let mut acc = msg.clone();
            for holders in group.subsets(r) {
                if holders == target || !holders.contains(j) {
                    continue;
                }
                let u = segment_usymbol(&build_vset(group, holders, placement)?, local)?;
                acc.xor_assign(u.segment_for(j).expect("j is a holder"));
            }
            pieces.push(acc);
        }
        if pieces.len() < r {
            missing.extend_from_slice(&vset.value_ids);
            continue;
        }
        let payload = BitVec::concat(&pieces);
        for (i, &id) in vset.value_ids.iter().enumerate() {
            recovered.insert(id, payload.slice(i * t, t));
        }
    }
    if !missing.is_empty() {
        missing.sort_unstable();
        return Err(Error::IncompleteShuffle { node: k, missing });
    }
    Ok(recovered)
}
