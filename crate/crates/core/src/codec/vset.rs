use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::placement::{binomial, NodeSet, Placement};
use crate::workloads::IntermediateStore;

/// Read access to intermediate values, possibly restricted to one node's files.
pub trait ValueSource {
    fn value(&self, q: usize, n: usize) -> Result<&BitVec>;
}

impl ValueSource for IntermediateStore {
    fn value(&self, q: usize, n: usize) -> Result<&BitVec> {
        Ok(self.get(q, n))
    }
}

/// Values needed by every node of `group \ holders`, by no node outside
/// `group`, and mapped by exactly the nodes of `holders`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VSet {
    pub group: NodeSet,
    pub holders: NodeSet,
    /// `(q, n)` pairs, ascending by `q` then `n`.
    pub value_ids: Vec<(usize, usize)>,
}

fn check_group(placement: &Placement, group: NodeSet) -> Result<()> {
    let spec = placement.spec();
    if !group.is_subset(NodeSet::all(spec.nodes)) {
        return Err(Error::InvalidInput(format!("group {group} has nodes outside 1..={}", spec.nodes)));
    }
    if !spec.group_sizes().contains(&group.len()) {
        return Err(Error::InvalidInput(format!(
            "group {group} has size {}, valid sizes are {:?}",
            group.len(),
            spec.group_sizes()
        )));
    }
    Ok(())
}

pub fn build_vset(group: NodeSet, holders: NodeSet, placement: &Placement) -> Result<VSet> {
    check_group(placement, group)?;
    let spec = placement.spec();
    if !holders.is_subset(group) || holders.len() != spec.r {
        return Err(Error::InvalidInput(format!(
            "holders {holders} must be an r-subset (r = {}) of group {group}",
            spec.r
        )));
    }
    let receivers = group.difference(holders);
    let files = placement
        .file_batch(holders)
        .expect("every r-subset owns a file batch");

    // Reducer sets P with receivers ⊆ P ⊆ group, |P| = s.
    let mut funcs: Vec<usize> = Vec::new();
    if let Some(extra) = spec.s.checked_sub(receivers.len()) {
        for x in holders.subsets(extra) {
            let p = receivers.union(x);
            funcs.extend_from_slice(placement.reduce_batch(p).expect("every s-subset owns a reduce batch"));
        }
    }
    funcs.sort_unstable();

    let value_ids = funcs
        .iter()
        .flat_map(|&q| files.iter().map(move |&n| (q, n)))
        .collect();
    Ok(VSet {
        group,
        holders,
        value_ids,
    })
}

/// Number of values in every V-set of a group of size `group_size`:
/// `C(r, |S| - s) * eta1 * eta2`.
pub fn vset_size(placement: &Placement, group_size: usize) -> usize {
    let spec = placement.spec();
    binomial(spec.r, group_size - spec.s) as usize * spec.eta1() * spec.eta2()
}

/// Bits per segment for groups of size `group_size`. The V-set payload is
/// zero-padded up to a multiple of `r` when it does not divide evenly.
pub fn segment_bits(placement: &Placement, group_size: usize) -> usize {
    let spec = placement.spec();
    (vset_size(placement, group_size) * spec.value_bits).div_ceil(spec.r)
}

/// Concatenated V-set values split into `r` segments; segment `i` belongs
/// to the `i`-th smallest holder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct USymbol {
    pub group: NodeSet,
    pub holders: NodeSet,
    /// Unpadded concatenation of the values.
    pub payload: BitVec,
    pub segments: Vec<BitVec>,
}

impl USymbol {
    pub fn segment_for(&self, node: usize) -> Option<&BitVec> {
        self.holders.position(node).map(|i| &self.segments[i])
    }
}

pub fn segment_usymbol<V: ValueSource + ?Sized>(vset: &VSet, values: &V) -> Result<USymbol> {
    let r = vset.holders.len();
    let mut payload = BitVec::new();
    for &(q, n) in &vset.value_ids {
        payload.extend_from(values.value(q, n)?);
    }
    let seg = payload.len().div_ceil(r);
    let mut padded = payload.clone();
    padded.pad_zeros(seg * r - payload.len());
    let segments = if seg == 0 {
        vec![BitVec::new(); r]
    } else {
        padded.chunks(seg)
    };
    assert_eq!(segments.len(), r, "segment split of {} bits into {r} parts", padded.len());
    Ok(USymbol {
        group: vset.group,
        holders: vset.holders,
        payload,
        segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::placement::{make_placement, JobSpec};
    use crate::workloads::{SyntheticRankWorkload, WordCountWorkload};

    fn set(nodes: &[usize]) -> NodeSet {
        NodeSet::from_nodes(nodes.iter().copied())
    }

    #[test]
    fn example_vset_and_segments() {
        let spec = JobSpec::new(4, 6, 4, 2, 1, 6).unwrap();
        let p = make_placement(&spec).unwrap();
        let v = build_vset(set(&[1, 2, 3]), set(&[1, 3]), &p).unwrap();
        assert_eq!(v.value_ids, vec![(2, 2)]);

        let store = WordCountWorkload::example().map(&spec).unwrap();
        let u = segment_usymbol(&v, &store).unwrap();
        let v22 = store.get(2, 2);
        assert_eq!(u.segment_for(1).unwrap(), &v22.slice(0, 3));
        assert_eq!(u.segment_for(3).unwrap(), &v22.slice(3, 3));
        assert!(u.segment_for(2).is_none());
    }

    #[test]
    fn bad_subsets_rejected() {
        let spec = JobSpec::new(4, 6, 4, 2, 1, 6).unwrap();
        let p = make_placement(&spec).unwrap();
        assert!(build_vset(set(&[1, 2]), set(&[1, 2]), &p).is_err());
        assert!(build_vset(set(&[1, 2, 3]), set(&[1]), &p).is_err());
        assert!(build_vset(set(&[1, 2, 3]), set(&[1, 4]), &p).is_err());
    }

    /// Direct membership test against the defining predicate.
    fn predicate_vset(p: &Placement, group: NodeSet, holders: NodeSet) -> Vec<(usize, usize)> {
        let spec = p.spec();
        let outside = NodeSet::all(spec.nodes).difference(group);
        let receivers = group.difference(holders);
        let mut out = Vec::new();
        for q in 1..=spec.functions {
            let needed_by_all = receivers.iter().all(|k| p.node_funcs(k).unwrap().contains(&q));
            let needed_outside = outside.iter().any(|k| p.node_funcs(k).unwrap().contains(&q));
            for n in 1..=spec.files {
                let held_by_all = holders.iter().all(|k| p.node_files(k).unwrap().contains(&n));
                let held_elsewhere = NodeSet::all(spec.nodes)
                    .difference(holders)
                    .iter()
                    .any(|k| p.node_files(k).unwrap().contains(&n));
                if needed_by_all && !needed_outside && held_by_all && !held_elsewhere {
                    out.push((q, n));
                }
            }
        }
        out
    }

    #[test]
    fn vsets_match_predicate_oracle() {
        for (k, r, s) in [(5, 2, 2), (4, 1, 2), (5, 3, 2), (5, 2, 3), (4, 2, 1), (6, 2, 3)] {
            let spec = JobSpec::new(k, 2 * binomial(k, r) as usize, binomial(k, s) as usize, r, s, 4).unwrap();
            let p = make_placement(&spec).unwrap();
            for l in spec.group_sizes() {
                for group in crate::placement::ksubsets(k, l) {
                    for holders in group.subsets(r) {
                        let v = build_vset(group, holders, &p).unwrap();
                        assert_eq!(v.value_ids, predicate_vset(&p, group, holders));
                        assert_eq!(v.value_ids.len(), vset_size(&p, l));
                    }
                }
            }
        }
    }

    #[test]
    fn single_holder_segment_is_payload_and_partition_holds() {
        let spec = JobSpec::new(4, 4, 4, 1, 1, 8).unwrap();
        let p = make_placement(&spec).unwrap();
        let store = SyntheticRankWorkload::new(2, 0.0).unwrap().map(&spec).unwrap();
        let u = segment_usymbol(&build_vset(set(&[1, 2]), set(&[1]), &p).unwrap(), &store).unwrap();
        assert_eq!(u.segments, vec![u.payload.clone()]);

        let spec = JobSpec::new(5, 10, 5, 3, 1, 9).unwrap();
        let p = make_placement(&spec).unwrap();
        let store = SyntheticRankWorkload::new(2, 0.0).unwrap().map(&spec).unwrap();
        let u = segment_usymbol(&build_vset(set(&[1, 2, 3, 5]), set(&[1, 3, 5]), &p).unwrap(), &store).unwrap();
        assert_eq!(u.segments.len(), 3);
        assert_eq!(BitVec::concat(&u.segments), u.payload);
    }

    #[test]
    fn uneven_payload_is_padded() {
        // one 7-bit value split in 2 → segments of 4 bits
        let spec = JobSpec::new(3, 3, 3, 2, 1, 7).unwrap();
        let p = make_placement(&spec).unwrap();
        let store = SyntheticRankWorkload::new(4, 0.0).unwrap().map(&spec).unwrap();
        let u = segment_usymbol(&build_vset(set(&[1, 2, 3]), set(&[1, 2]), &p).unwrap(), &store).unwrap();
        assert_eq!(segment_bits(&p, 3), 4);
        assert!(u.segments.iter().all(|s| s.len() == 4));
        assert!(!u.segments[1].get(3));
        assert_eq!(BitVec::concat(&u.segments).slice(0, 7), u.payload);
    }
}
