//! Map, shuffle and reduce over `K` simulated nodes on a lossless broadcast
//! bus. Only bit counts matter; every broadcast is seen by every node.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{self, Load};
use crate::codec::{
    build_vset, decode_cdc_s1, encode_node_messages, ld_compress, ld_decompress, ld_decompress_groups,
    CodedMessage, LdPayload, LocalView, ReceivedMessages,
};
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::placement::{make_placement, ksubsets, JobSpec, NodeSet, Placement};
use crate::workloads::{IntermediateStore, ReduceOutput, Workload};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Uncoded,
    Cdc,
    CdcLd,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Uncoded, Scheme::Cdc, Scheme::CdcLd];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Uncoded => "uncoded",
            Scheme::Cdc => "cdc",
            Scheme::CdcLd => "cdc-ld",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uncoded" => Ok(Scheme::Uncoded),
            "cdc" => Ok(Scheme::Cdc),
            "cdc-ld" => Ok(Scheme::CdcLd),
            other => Err(Error::InvalidInput(format!(
                "unknown scheme {other:?} (expected uncoded, cdc or cdc-ld)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Broadcast {
    Uncoded { q: usize, n: usize, value: BitVec },
    Cdc { group: NodeSet, components: Vec<BitVec> },
    CdcLd(LdPayload),
}

impl Broadcast {
    /// Bits on the wire, from payload lengths.
    pub fn bits(&self) -> u64 {
        match self {
            Broadcast::Uncoded { value, .. } => value.len() as u64,
            Broadcast::Cdc { components, .. } => components.iter().map(|c| c.len() as u64).sum(),
            Broadcast::CdcLd(p) => p.wire_bits() as u64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTranscript {
    pub node: usize,
    /// Running counter kept while the node broadcast.
    pub bits: u64,
    pub broadcasts: Vec<Broadcast>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShuffleTranscript {
    pub scheme: Scheme,
    pub spec: JobSpec,
    pub nodes: Vec<NodeTranscript>,
}

impl ShuffleTranscript {
    fn from_broadcasts(scheme: Scheme, spec: JobSpec, per_node: Vec<Vec<Broadcast>>) -> Self {
        let nodes = per_node
            .into_iter()
            .enumerate()
            .map(|(i, broadcasts)| {
                let mut bits = 0;
                for b in &broadcasts {
                    bits += b.bits();
                }
                NodeTranscript {
                    node: i + 1,
                    bits,
                    broadcasts,
                }
            })
            .collect();
        ShuffleTranscript { scheme, spec, nodes }
    }

    /// `b_k` for every node, recounted from the payloads.
    pub fn bits_per_node(&self) -> Vec<u64> {
        self.nodes
            .iter()
            .map(|n| n.broadcasts.iter().map(Broadcast::bits).sum())
            .collect()
    }

    pub fn total_bits(&self) -> u64 {
        self.bits_per_node().iter().sum()
    }

    pub fn load(&self) -> Load {
        analytics::load_from_bits(self.total_bits(), &self.spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Malformed(format!("transcript: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankEntry {
    pub node: usize,
    pub group_size: usize,
    pub rank: usize,
    pub messages: usize,
    pub message_bits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeOutputs {
    pub node: usize,
    /// Reduce outputs keyed by function index.
    pub outputs: BTreeMap<usize, ReduceOutput>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Verification {
    Pass,
    Fail { reason: String },
    /// `s >= 2`: messages are encoded and counted but not decoded.
    NotApplicable,
}

impl Verification {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verification::Pass)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunResult {
    pub spec: JobSpec,
    pub scheme: Scheme,
    pub workload: String,
    #[serde(skip)]
    pub transcript: ShuffleTranscript,
    pub bits_per_node: Vec<u64>,
    pub total_bits: u64,
    #[serde(with = "analytics::ratio_string")]
    pub load: Load,
    pub load_f64: f64,
    pub ranks: Vec<RankEntry>,
    pub outputs: Vec<NodeOutputs>,
    pub verification: Verification,
    /// Every needed value lies in some V-set addressed to its node (`s >= 2`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage_ok: Option<bool>,
    /// Decompressed messages equal the encoded ones (`cdc-ld`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ld_roundtrip_ok: Option<bool>,
}

impl RunResult {
    /// `rho_l = sum_k rho_{k,l} / K` per group size.
    pub fn average_ranks(&self) -> BTreeMap<usize, Load> {
        analytics::average_ranks(&self.ranks, self.spec.nodes)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run result serializes")
    }
}

/// Sends every needed `(q, n)` once, from the smallest node mapping `n`.
pub fn run_uncoded_shuffle(placement: &Placement, store: &IntermediateStore) -> Result<ShuffleTranscript> {
    let spec = *placement.spec();
    if spec.s != 1 {
        return Err(Error::Unsupported(format!("uncoded shuffle needs s = 1, got s = {}", spec.s)));
    }
    let mut per_node = vec![Vec::new(); spec.nodes];
    for q in 1..=spec.functions {
        let reducer = placement.func_reducers(q).min().expect("one reducer");
        for n in 1..=spec.files {
            let holders = placement.file_holders(n);
            if !holders.contains(reducer) {
                let sender = holders.min().expect("r >= 1 holders");
                per_node[sender - 1].push(Broadcast::Uncoded {
                    q,
                    n,
                    value: store.get(q, n).clone(),
                });
            }
        }
    }
    Ok(ShuffleTranscript::from_broadcasts(Scheme::Uncoded, spec, per_node))
}

fn encode_all(placement: &Placement, store: &IntermediateStore) -> Result<Vec<Vec<Vec<CodedMessage>>>> {
    let spec = placement.spec();
    (1..=spec.nodes)
        .into_par_iter()
        .map(|k| {
            spec.group_sizes()
                .map(|l| encode_node_messages(k, l, placement, store))
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

/// Coded multicast: node `k` sends `X_k^S` to every valid group `S` containing it.
pub fn run_cdc_shuffle(placement: &Placement, store: &IntermediateStore) -> Result<ShuffleTranscript> {
    let per_node = encode_all(placement, store)?
        .into_iter()
        .map(|by_size| {
            by_size
                .into_iter()
                .flatten()
                .map(|m| Broadcast::Cdc {
                    group: m.group,
                    components: m.components,
                })
                .collect()
        })
        .collect();
    Ok(ShuffleTranscript::from_broadcasts(Scheme::Cdc, *placement.spec(), per_node))
}

pub struct LdShuffle {
    pub transcript: ShuffleTranscript,
    pub ranks: Vec<RankEntry>,
    pub roundtrip_ok: bool,
}

/// `cdc` messages compressed per (node, group size).
pub fn run_cdc_ld_shuffle(placement: &Placement, store: &IntermediateStore) -> Result<LdShuffle> {
    let spec = *placement.spec();
    let encoded = encode_all(placement, store)?;
    let compressed: Vec<Vec<(LdPayload, bool)>> = encoded
        .par_iter()
        .enumerate()
        .map(|(i, by_size)| {
            spec.group_sizes()
                .zip(by_size)
                .map(|(l, msgs)| {
                    let p = ld_compress(i + 1, l, spec.nodes, msgs)?;
                    let back = ld_decompress(&p)?;
                    let same = back.iter().zip(msgs).all(|(b, m)| *b == m.vector()) && back.len() == msgs.len();
                    Ok((p, same))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut ranks = Vec::new();
    let mut roundtrip_ok = true;
    let mut per_node = Vec::with_capacity(spec.nodes);
    for payloads in compressed {
        let mut out = Vec::new();
        for (p, same) in payloads {
            roundtrip_ok &= same;
            ranks.push(RankEntry {
                node: p.node,
                group_size: p.group_size,
                rank: p.rank(),
                messages: p.coeffs.len(),
                message_bits: p.message_bits,
            });
            out.push(Broadcast::CdcLd(p));
        }
        per_node.push(out);
    }
    Ok(LdShuffle {
        transcript: ShuffleTranscript::from_broadcasts(Scheme::CdcLd, spec, per_node),
        ranks,
        roundtrip_ok,
    })
}

/// Everything node `k` needs, extracted from the broadcasts of the other nodes.
pub fn recover_node(
    k: usize,
    transcript: &ShuffleTranscript,
    placement: &Placement,
    store: &IntermediateStore,
) -> Result<BTreeMap<(usize, usize), BitVec>> {
    let spec = placement.spec();
    let local = LocalView::new(k, store, placement)?;
    let others = transcript.nodes.iter().filter(|n| n.node != k);
    match transcript.scheme {
        Scheme::Uncoded => {
            let funcs = placement.node_funcs(k)?;
            let mut got = BTreeMap::new();
            for b in others.flat_map(|n| &n.broadcasts) {
                let Broadcast::Uncoded { q, n, value } = b else {
                    return Err(Error::Malformed("non-uncoded broadcast in an uncoded transcript".into()));
                };
                if funcs.contains(q) && !local.holds(*n) {
                    got.insert((*q, *n), value.clone());
                }
            }
            let missing: Vec<_> = placement
                .needed_values(k)?
                .into_iter()
                .filter(|id| !got.contains_key(id))
                .collect();
            if !missing.is_empty() {
                return Err(Error::IncompleteShuffle { node: k, missing });
            }
            Ok(got)
        }
        Scheme::Cdc | Scheme::CdcLd => {
            let mut rx = ReceivedMessages::new();
            for nt in others {
                for b in &nt.broadcasts {
                    match (transcript.scheme, b) {
                        (Scheme::Cdc, Broadcast::Cdc { group, components }) => {
                            if group.contains(k) {
                                rx.insert(nt.node, *group, BitVec::concat(components));
                            }
                        }
                        (Scheme::CdcLd, Broadcast::CdcLd(p)) => {
                            if p.node != nt.node {
                                return Err(Error::Malformed(format!(
                                    "payload of node {} broadcast by node {}",
                                    p.node, nt.node
                                )));
                            }
                            for (group, v) in ld_decompress_groups(p, spec.nodes)? {
                                if group.contains(k) {
                                    rx.insert(nt.node, group, v);
                                }
                            }
                        }
                        _ => {
                            return Err(Error::Malformed(format!(
                                "unexpected broadcast in a {} transcript",
                                transcript.scheme
                            )))
                        }
                    }
                }
            }
            decode_cdc_s1(k, &rx, &local, placement)
        }
    }
}

/// Evaluates every reduce function of node `k` from local and recovered values.
pub fn reduce_phase(
    k: usize,
    placement: &Placement,
    store: &IntermediateStore,
    recovered: &BTreeMap<(usize, usize), BitVec>,
    workload: &Workload,
) -> Result<BTreeMap<usize, ReduceOutput>> {
    let spec = placement.spec();
    let local = LocalView::new(k, store, placement)?;
    let mut outputs = BTreeMap::new();
    let mut missing = Vec::new();
    for &q in placement.node_funcs(k)? {
        let mut values = Vec::with_capacity(spec.files);
        for n in 1..=spec.files {
            let v = if local.holds(n) {
                Some(store.get(q, n))
            } else {
                recovered.get(&(q, n))
            };
            match v {
                Some(v) => values.push(v),
                None => missing.push((q, n)),
            }
        }
        if values.len() == spec.files {
            outputs.insert(q, workload.reduce(values)?);
        }
    }
    if !missing.is_empty() {
        return Err(Error::IncompleteShuffle { node: k, missing });
    }
    Ok(outputs)
}

fn compare(outputs: &[NodeOutputs], reference: &[ReduceOutput]) -> Verification {
    for no in outputs {
        for (q, out) in &no.outputs {
            if *out != reference[q - 1] {
                return Verification::Fail {
                    reason: format!("node {} computed a wrong output for function {q}", no.node),
                };
            }
        }
    }
    Verification::Pass
}

/// Decodes and reduces at every node, then checks against the
/// single-machine reference. Decode failures are reported as `Fail`.
pub fn deliver(
    transcript: &ShuffleTranscript,
    placement: &Placement,
    store: &IntermediateStore,
    workload: &Workload,
) -> Result<(Vec<NodeOutputs>, Verification)> {
    let spec = placement.spec();
    if spec.s != 1 {
        return Ok((Vec::new(), Verification::NotApplicable));
    }
    let reference = workload.reference_outputs(spec)?;
    let per_node: Vec<Result<NodeOutputs>> = (1..=spec.nodes)
        .into_par_iter()
        .map(|k| {
            let recovered = recover_node(k, transcript, placement, store)?;
            let outputs = reduce_phase(k, placement, store, &recovered, workload)?;
            Ok(NodeOutputs { node: k, outputs })
        })
        .collect();
    let mut outputs = Vec::with_capacity(spec.nodes);
    for r in per_node {
        match r {
            Ok(o) => outputs.push(o),
            Err(e @ (Error::Malformed(_) | Error::IncompleteShuffle { .. } | Error::InvalidInput(_))) => {
                return Ok((outputs, Verification::Fail { reason: e.to_string() }));
            }
            Err(e) => return Err(e),
        }
    }
    let verdict = compare(&outputs, &reference);
    Ok((outputs, verdict))
}

/// Replays a stored transcript: every node decodes from it using its own
/// map outputs and the result is checked against the reference.
pub fn verify_transcript(transcript: &ShuffleTranscript, workload: &Workload) -> Result<(Vec<NodeOutputs>, Verification)> {
    let placement = make_placement(&transcript.spec)?;
    if transcript.nodes.len() != transcript.spec.nodes
        || transcript.nodes.iter().enumerate().any(|(i, n)| n.node != i + 1)
    {
        return Ok((
            Vec::new(),
            Verification::Fail {
                reason: "transcript node list does not match K".into(),
            },
        ));
    }
    let store = workload.map(&transcript.spec)?;
    deliver(transcript, &placement, &store, workload)
}

/// For `s >= 2`: checks that each value a node needs belongs to a V-set
/// whose group contains the node and whose holders exclude it.
pub fn check_coverage(placement: &Placement) -> Result<bool> {
    let spec = placement.spec();
    for k in 1..=spec.nodes {
        for (q, n) in placement.needed_values(k)? {
            let holders = placement.file_holders(n);
            let group = holders.union(placement.func_reducers(q));
            if !spec.group_sizes().contains(&group.len()) || holders.contains(k) || !group.contains(k) {
                return Ok(false);
            }
            if !build_vset(group, holders, placement)?.value_ids.contains(&(q, n)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Runs map, shuffle and (for `s = 1`) decode and reduce.
pub fn run(spec: &JobSpec, workload: &Workload, scheme: Scheme) -> Result<RunResult> {
    let placement = make_placement(spec)?;
    if scheme == Scheme::Uncoded && spec.s != 1 {
        return Err(Error::Unsupported(format!("uncoded shuffle needs s = 1, got s = {}", spec.s)));
    }
    let store = workload.map(spec)?;

    let (transcript, ranks, ld_roundtrip_ok) = match scheme {
        Scheme::Uncoded => (run_uncoded_shuffle(&placement, &store)?, Vec::new(), None),
        Scheme::Cdc => (run_cdc_shuffle(&placement, &store)?, Vec::new(), None),
        Scheme::CdcLd => {
            let ld = run_cdc_ld_shuffle(&placement, &store)?;
            (ld.transcript, ld.ranks, Some(ld.roundtrip_ok))
        }
    };

    let (outputs, verification) = deliver(&transcript, &placement, &store, workload)?;
    let coverage_ok = (spec.s != 1).then(|| check_coverage(&placement)).transpose()?;

    let bits_per_node: Vec<u64> = transcript.nodes.iter().map(|n| n.bits).collect();
    let total_bits = bits_per_node.iter().sum();
    let load = analytics::load_from_bits(total_bits, spec);
    Ok(RunResult {
        spec: *spec,
        scheme,
        workload: workload.kind().to_string(),
        transcript,
        bits_per_node,
        total_bits,
        load_f64: analytics::to_f64(&load),
        load,
        ranks,
        outputs,
        verification,
        coverage_ok,
        ld_roundtrip_ok,
    })
}

/// Groups of size `l` in lexicographic order, for inspection and fixtures.
pub fn groups(spec: &JobSpec, l: usize) -> Vec<NodeSet> {
    ksubsets(spec.nodes, l)
}
