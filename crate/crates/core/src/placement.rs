//! Job parameters, node subsets and the symmetric batch placement.
//!
//! Files are split into one batch per `r`-subset of nodes and reduce
//! functions into one batch per `s`-subset. Subsets are enumerated in
//! lexicographic order of their sorted members and batch `i` takes the `i`-th
//! contiguous block of indices. All node, file and function indices are
//! 1-based.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_NODES: usize = 64;

/// Binomial coefficient; zero when `k > n`. Panics on `u64` overflow.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial coefficient overflows u64")
}

/// A set of nodes from `1..=64`, stored as a bitmask.
///
/// Ordering is lexicographic on the ascending member lists, which is the
/// enumeration order used for batches and multicast groups.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct NodeSet(u64);

impl NodeSet {
    pub fn empty() -> Self {
        NodeSet(0)
    }

    pub fn from_nodes<I: IntoIterator<Item = usize>>(nodes: I) -> Self {
        let mut bits = 0u64;
        for k in nodes {
            assert!((1..=MAX_NODES).contains(&k), "node id {k} out of range");
            bits |= 1 << (k - 1);
        }
        NodeSet(bits)
    }

    /// `{1, ..., k}`.
    pub fn all(k: usize) -> Self {
        NodeSet::from_nodes(1..=k)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, k: usize) -> bool {
        (1..=MAX_NODES).contains(&k) && (self.0 >> (k - 1)) & 1 == 1
    }

    pub fn insert(&mut self, k: usize) {
        *self = self.union(NodeSet::from_nodes([k]));
    }

    pub fn remove(self, k: usize) -> NodeSet {
        self.difference(NodeSet::from_nodes([k]))
    }

    pub fn union(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & other.0)
    }

    pub fn difference(self, other: NodeSet) -> NodeSet {
        NodeSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: NodeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize + 1)
    }

    /// Members in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let k = rest.trailing_zeros() as usize + 1;
                rest &= rest - 1;
                Some(k)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// 0-based position of `k` among the members.
    pub fn position(self, k: usize) -> Option<usize> {
        self.contains(k)
            .then(|| (self.0 & ((1u64 << (k - 1)) - 1)).count_ones() as usize)
    }

    /// All `t`-subsets of this set, in lexicographic order.
    pub fn subsets(self, t: usize) -> Vec<NodeSet> {
        let members = self.to_vec();
        ksubsets(members.len(), t)
            .into_iter()
            .map(|s| NodeSet::from_nodes(s.iter().map(|i| members[i - 1])))
            .collect()
    }
}

impl Ord for NodeSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

impl PartialOrd for NodeSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, k) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for NodeSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_vec().serialize(s)
    }
}

impl<'de> Deserialize<'de> for NodeSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let nodes = Vec::<usize>::deserialize(d)?;
        if let Some(bad) = nodes.iter().find(|k| !(1..=MAX_NODES).contains(k)) {
            return Err(serde::de::Error::custom(format!("node id {bad} out of range")));
        }
        Ok(NodeSet::from_nodes(nodes))
    }
}

/// All `t`-subsets of `{1..k}` in lexicographic order.
pub fn ksubsets(k: usize, t: usize) -> Vec<NodeSet> {
    assert!(k <= MAX_NODES, "at most {MAX_NODES} nodes supported");
    if t > k {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(binomial(k, t) as usize);
    let mut cur: Vec<usize> = (1..=t).collect();
    loop {
        out.push(NodeSet::from_nodes(cur.iter().copied()));
        // rightmost position that can still advance
        let Some(i) = (0..t).rev().find(|&i| cur[i] < k - (t - 1 - i)) else {
            break;
        };
        cur[i] += 1;
        for j in i + 1..t {
            cur[j] = cur[j - 1] + 1;
        }
    }
    out
}

/// The job tuple `(K, N, Q, r, s, T)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JobSpec {
    #[serde(rename = "K")]
    pub nodes: usize,
    #[serde(rename = "N")]
    pub files: usize,
    #[serde(rename = "Q")]
    pub functions: usize,
    /// Computation load: each file is mapped on `r` nodes.
    pub r: usize,
    /// Each reduce function is computed on `s` nodes.
    pub s: usize,
    /// Bit length of every intermediate value.
    #[serde(rename = "T")]
    pub value_bits: usize,
}

impl JobSpec {
    pub fn new(nodes: usize, files: usize, functions: usize, r: usize, s: usize, value_bits: usize) -> Result<Self> {
        let spec = JobSpec {
            nodes,
            files,
            functions,
            r,
            s,
            value_bits,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.nodes;
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if !(2..=MAX_NODES).contains(&k) {
            return bad(format!("K = {k} must be in 2..={MAX_NODES}"));
        }
        if !(1..=k).contains(&self.r) {
            return bad(format!("r = {} must be in 1..=K ({k})", self.r));
        }
        if !(1..=k).contains(&self.s) {
            return bad(format!("s = {} must be in 1..=K ({k})", self.s));
        }
        if self.value_bits == 0 {
            return bad("T must be at least 1".into());
        }
        if self.files == 0 || self.functions == 0 {
            return bad("N and Q must be positive".into());
        }
        let cr = binomial(k, self.r);
        if !(self.files as u64).is_multiple_of(cr) {
            return bad(format!(
                "N = {} is not divisible by C(K,r) = C({k},{}) = {cr}",
                self.files, self.r
            ));
        }
        let cs = binomial(k, self.s);
        if !(self.functions as u64).is_multiple_of(cs) {
            return bad(format!(
                "Q = {} is not divisible by C(K,s) = C({k},{}) = {cs}",
                self.functions, self.s
            ));
        }
        Ok(())
    }

    /// Files per batch, `N / C(K,r)`.
    pub fn eta1(&self) -> usize {
        self.files / binomial(self.nodes, self.r) as usize
    }

    /// Functions per batch, `Q / C(K,s)`.
    pub fn eta2(&self) -> usize {
        self.functions / binomial(self.nodes, self.s) as usize
    }

    /// `Q * N * T`, the normalizer of the communication load.
    pub fn total_bits(&self) -> u64 {
        (self.functions * self.files * self.value_bits) as u64
    }

    /// Multicast group sizes `max(r+1, s) ..= min(r+s, K)`.
    pub fn group_sizes(&self) -> std::ops::RangeInclusive<usize> {
        (self.r + 1).max(self.s)..=(self.r + self.s).min(self.nodes)
    }

    pub fn with_value_bits(mut self, value_bits: usize) -> Self {
        self.value_bits = value_bits;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Batch {
    pub nodes: NodeSet,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Placement {
    spec: JobSpec,
    file_batches: Vec<Batch>,
    reduce_batches: Vec<Batch>,
    node_files: Vec<BTreeSet<usize>>,
    node_funcs: Vec<BTreeSet<usize>>,
    file_holders: Vec<NodeSet>,
    func_reducers: Vec<NodeSet>,
    file_batch_index: HashMap<NodeSet, usize>,
    reduce_batch_index: HashMap<NodeSet, usize>,
}

fn make_batches(k: usize, t: usize, per_batch: usize) -> Vec<Batch> {
    ksubsets(k, t)
        .into_iter()
        .enumerate()
        .map(|(i, nodes)| Batch {
            nodes,
            members: (i * per_batch + 1..=(i + 1) * per_batch).collect(),
        })
        .collect()
}

pub fn make_placement(spec: &JobSpec) -> Result<Placement> {
    spec.validate()?;
    let k = spec.nodes;
    let file_batches = make_batches(k, spec.r, spec.eta1());
    let reduce_batches = make_batches(k, spec.s, spec.eta2());

    let mut node_files = vec![BTreeSet::new(); k];
    let mut file_holders = vec![NodeSet::empty(); spec.files];
    for b in &file_batches {
        for &n in &b.members {
            file_holders[n - 1] = b.nodes;
            for node in b.nodes.iter() {
                node_files[node - 1].insert(n);
            }
        }
    }
    let mut node_funcs = vec![BTreeSet::new(); k];
    let mut func_reducers = vec![NodeSet::empty(); spec.functions];
    for b in &reduce_batches {
        for &q in &b.members {
            func_reducers[q - 1] = b.nodes;
            for node in b.nodes.iter() {
                node_funcs[node - 1].insert(q);
            }
        }
    }
    let file_batch_index = file_batches.iter().enumerate().map(|(i, b)| (b.nodes, i)).collect();
    let reduce_batch_index = reduce_batches.iter().enumerate().map(|(i, b)| (b.nodes, i)).collect();

    Ok(Placement {
        spec: *spec,
        file_batches,
        reduce_batches,
        node_files,
        node_funcs,
        file_holders,
        func_reducers,
        file_batch_index,
        reduce_batch_index,
    })
}

impl Placement {
    pub fn spec(&self) -> &JobSpec {
        &self.spec
    }

    pub fn file_batches(&self) -> &[Batch] {
        &self.file_batches
    }

    pub fn reduce_batches(&self) -> &[Batch] {
        &self.reduce_batches
    }

    /// `B_T`: files mapped by exactly the nodes of `holders`.
    pub fn file_batch(&self, holders: NodeSet) -> Option<&[usize]> {
        self.file_batch_index
            .get(&holders)
            .map(|&i| self.file_batches[i].members.as_slice())
    }

    /// `D_P`: functions reduced by exactly the nodes of `reducers`.
    pub fn reduce_batch(&self, reducers: NodeSet) -> Option<&[usize]> {
        self.reduce_batch_index
            .get(&reducers)
            .map(|&i| self.reduce_batches[i].members.as_slice())
    }

    fn check_node(&self, k: usize) -> Result<()> {
        if (1..=self.spec.nodes).contains(&k) {
            Ok(())
        } else {
            Err(Error::UnknownNode {
                node: k,
                nodes: self.spec.nodes,
            })
        }
    }

    /// `M_k`.
    pub fn node_files(&self, k: usize) -> Result<&BTreeSet<usize>> {
        self.check_node(k)?;
        Ok(&self.node_files[k - 1])
    }

    /// `W_k`.
    pub fn node_funcs(&self, k: usize) -> Result<&BTreeSet<usize>> {
        self.check_node(k)?;
        Ok(&self.node_funcs[k - 1])
    }

    pub fn file_holders(&self, n: usize) -> NodeSet {
        self.file_holders[n - 1]
    }

    pub fn func_reducers(&self, q: usize) -> NodeSet {
        self.func_reducers[q - 1]
    }

    /// Every `(q, n)` node `k` reduces but does not map, ordered by `q` then `n`.
    pub fn needed_values(&self, k: usize) -> Result<Vec<(usize, usize)>> {
        self.check_node(k)?;
        let files = &self.node_files[k - 1];
        Ok(self.node_funcs[k - 1]
            .iter()
            .flat_map(|&q| {
                (1..=self.spec.files)
                    .filter(|n| !files.contains(n))
                    .map(move |n| (q, n))
            })
            .collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("placement serializes")
    }
}

#[derive(Serialize)]
struct PlacementDoc<'a> {
    spec: &'a JobSpec,
    eta1: usize,
    eta2: usize,
    file_batches: &'a [Batch],
    reduce_batches: &'a [Batch],
    node_files: Vec<&'a BTreeSet<usize>>,
    node_funcs: Vec<&'a BTreeSet<usize>>,
}

impl Serialize for Placement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PlacementDoc {
            spec: &self.spec,
            eta1: self.spec.eta1(),
            eta2: self.spec.eta2(),
            file_batches: &self.file_batches,
            reduce_batches: &self.reduce_batches,
            node_files: self.node_files.iter().collect(),
            node_funcs: self.node_funcs.iter().collect(),
        }
        .serialize(s)
    }
}
