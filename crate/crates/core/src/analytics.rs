//! Closed-form communication loads, empirical-vs-analytic reports and the
//! sweep tables behind the trade-off figures.
//!
//! Every load is an exact rational. Floats only appear when a table is
//! written out as CSV.

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{self, RankEntry, RunResult, Scheme};
use crate::error::{Error, Result};
use crate::placement::{binomial, JobSpec};
use crate::workloads::Workload;

pub type Load = BigRational;

pub fn ratio(num: i64, den: i64) -> Load {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn int(v: u64) -> Load {
    BigRational::from_integer(BigInt::from(v))
}

fn c(n: usize, k: usize) -> Load {
    int(binomial(n, k))
}

pub fn to_f64(x: &Load) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `x` with 12 significant digits, trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{}", if x == 0.0 { 0.0 } else { x });
    }
    let digits = 11 - x.abs().log10().floor() as i32;
    let s = format!("{:.*}", digits.max(0) as usize, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Serde adapter writing a rational as `"p/q"`.
pub mod ratio_string {
    use super::Load;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Load, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(x)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Load, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| D::Error::custom(format!("bad rational {s:?}")))
    }
}

mod ratio_map {
    use super::Load;
    use serde::ser::SerializeMap;
    use serde::Serializer;
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(m: &BTreeMap<usize, Load>, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            map.serialize_entry(k, &v.to_string())?;
        }
        map.end()
    }
}

mod ratio_opt {
    use super::Load;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(x: &Option<Load>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(x) => s.collect_str(x),
            None => s.serialize_none(),
        }
    }
}

/// `L = sum_k b_k / (QNT)`.
pub fn load_from_bits(bits: u64, spec: &JobSpec) -> Load {
    BigRational::new(BigInt::from(bits), BigInt::from(spec.total_bits()))
}

/// `1 - r/K`.
pub fn l_uncoded(r: usize, k: usize) -> Load {
    int(1) - ratio(r as i64, k as i64)
}

/// Coded load for general `s`:
/// `sum_l l C(K,l) C(l-2,r-1) C(r,l-s) / (r C(K,r) C(K,s))`.
pub fn l_cdc(r: usize, s: usize, k: usize) -> Load {
    let den = int(r as u64) * c(k, r) * c(k, s);
    let mut sum = Load::zero();
    for l in (r + 1).max(s)..=(r + s).min(k) {
        sum += int(l as u64) * c(k, l) * c(l - 2, r - 1) * c(r, l - s);
    }
    sum / den
}

/// `(1/r)(1 - r/K)`, the coded load at `s = 1`.
pub fn l_cdc_s1(r: usize, k: usize) -> Load {
    ratio(1, r as i64) * l_uncoded(r, k)
}

/// Average rank `rho_l` per group size.
pub type RhoTable = BTreeMap<usize, Load>;

/// Rank-compressed load as stated:
/// `sum_l (C(l-2,r-1) C(r,l-s) / (r C(K,r)) + K C(K-1,l-1) / (QNT)) rho_l`.
pub fn l_cdc_ld(spec: &JobSpec, rho: &RhoTable) -> Load {
    ld_sum(spec, rho, &int(1))
}

/// The same expression with the first term scaled by `K / C(K,s)`, as
/// obtained by counting `rho_{k,l}` basis vectors of `n_S` segments at every
/// node. Identical to [`l_cdc_ld`] when `s = 1`.
pub fn l_cdc_ld_derived(spec: &JobSpec, rho: &RhoTable) -> Load {
    ld_sum(spec, rho, &scale_factor(spec.nodes, spec.s))
}

/// `K / C(K,s)`.
pub fn scale_factor(k: usize, s: usize) -> Load {
    int(k as u64) / c(k, s)
}

fn ld_sum(spec: &JobSpec, rho: &RhoTable, first_scale: &Load) -> Load {
    let (k, r, s) = (spec.nodes, spec.r, spec.s);
    let qnt = int(spec.total_bits());
    let mut sum = Load::zero();
    for l in spec.group_sizes() {
        let Some(rho_l) = rho.get(&l) else { continue };
        let first = c(l - 2, r - 1) * c(r, l - s) / (int(r as u64) * c(k, r)) * first_scale;
        let second = int(k as u64) * c(k - 1, l - 1) / &qnt;
        sum += (first + second) * rho_l;
    }
    sum
}

/// `(1/(r C(K,r)) + K C(K-1,r)/(QNT)) rho_{r+1}`.
pub fn l_cdc_ld_s1(r: usize, k: usize, q: usize, n: usize, t: usize, rho: &Load) -> Load {
    if r >= k {
        return Load::zero();
    }
    let first = int(1) / (int(r as u64) * c(k, r));
    let second = int(k as u64) * c(k - 1, r) / int((q * n * t) as u64);
    (first + second) * rho
}

/// `rho_l = sum_k rho_{k,l} / K`.
pub fn average_ranks(ranks: &[RankEntry], nodes: usize) -> RhoTable {
    let mut sums: BTreeMap<usize, u64> = BTreeMap::new();
    for e in ranks {
        *sums.entry(e.group_size).or_default() += e.rank as u64;
    }
    sums.into_iter()
        .map(|(l, total)| (l, ratio(total as i64, nodes as i64)))
        .collect()
}

/// `(empirical - analytic) / analytic`; the plain difference when the
/// analytic load is zero.
pub fn relative_deviation(empirical: &Load, analytic: &Load) -> Load {
    if analytic.is_zero() {
        empirical.clone()
    } else {
        (empirical - analytic) / analytic
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticEntry {
    /// Row label, e.g. `cdc` or `cdc-ld:scaled`.
    pub label: String,
    #[serde(with = "ratio_string")]
    pub value: Load,
    #[serde(with = "ratio_string")]
    pub deviation: Load,
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LoadReport {
    pub spec: JobSpec,
    pub scheme: Scheme,
    pub bits_per_node: Vec<u64>,
    pub total_bits: u64,
    #[serde(with = "ratio_string")]
    pub l_empirical: Load,
    #[serde(serialize_with = "ratio_map::serialize")]
    pub rho: RhoTable,
    pub analytic: Vec<AnalyticEntry>,
    /// `K / C(K,s)` between the two rank-compressed readings.
    #[serde(serialize_with = "ratio_opt::serialize")]
    pub scale_factor: Option<Load>,
    /// Set when the two readings disagree and at most one can match.
    pub flag: Option<String>,
}

impl LoadReport {
    pub fn from_run(res: &RunResult) -> Self {
        let spec = res.spec;
        let (k, r, s) = (spec.nodes, spec.r, spec.s);
        let emp = res.load.clone();
        let rho = res.average_ranks();
        let mut formulas: Vec<(String, Load)> = Vec::new();
        let mut scale = None;
        let mut flag = None;
        match res.scheme {
            Scheme::Uncoded => formulas.push(("uncoded".into(), l_uncoded(r, k))),
            Scheme::Cdc => formulas.push(("cdc".into(), l_cdc(r, s, k))),
            Scheme::CdcLd if s == 1 => formulas.push(("cdc-ld".into(), l_cdc_ld(&spec, &rho))),
            Scheme::CdcLd => {
                let f = scale_factor(k, s);
                formulas.push(("cdc-ld:unscaled".into(), l_cdc_ld(&spec, &rho)));
                formulas.push(("cdc-ld:scaled".into(), l_cdc_ld_derived(&spec, &rho)));
                if f != int(1) {
                    flag = Some(format!(
                        "first term of the rank-compressed load read with and without the factor K/C(K,s) = {f}; \
                         the counted bits are compared against both"
                    ));
                }
                scale = Some(f);
            }
        }
        let analytic = formulas
            .into_iter()
            .map(|(label, value)| AnalyticEntry {
                deviation: relative_deviation(&emp, &value),
                exact: emp == value,
                label,
                value,
            })
            .collect();
        LoadReport {
            spec,
            scheme: res.scheme,
            bits_per_node: res.bits_per_node.clone(),
            total_bits: res.total_bits,
            l_empirical: emp,
            rho,
            analytic,
            scale_factor: scale,
            flag,
        }
    }

    pub fn any_exact(&self) -> bool {
        self.analytic.iter().any(|a| a.exact)
    }
}

pub const LOADS_HEADER: [&str; 6] = ["scheme", "r", "s", "L_empirical", "L_analytic", "deviation"];

/// One `loads.csv` row per analytic entry of every report.
pub fn write_loads_csv<W: Write>(out: W, reports: &[LoadReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LOADS_HEADER).map_err(csv_err)?;
    for rep in reports {
        for a in &rep.analytic {
            w.write_record([
                a.label.clone(),
                rep.spec.r.to_string(),
                rep.spec.s.to_string(),
                format_sig(to_f64(&rep.l_empirical)),
                format_sig(to_f64(&a.value)),
                format_sig(to_f64(&a.deviation)),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig2Row {
    pub r: usize,
    /// `m N log2(q) / (r K C(K,r))`.
    #[serde(with = "ratio_string")]
    pub msg_len_bits: Load,
    /// `C(K, r+1)`.
    pub count_paper: u64,
    /// `C(K-1, r)`, messages per node.
    pub count_alt: u64,
}

/// Length of an encoded message against the number of messages, for
/// `r = 1..K-1`, in a linear-transform job with an `m`-row matrix over a
/// field of `q` elements. The number of functions does not enter.
pub fn fig2_table(k: usize, n: usize, m: usize, q: u64) -> Result<Vec<Fig2Row>> {
    if k < 2 || n == 0 || m == 0 {
        return Err(Error::InvalidInput("K >= 2, N > 0 and m > 0 are required".into()));
    }
    if q < 2 || !q.is_power_of_two() {
        return Err(Error::InvalidInput(format!("field size q = {q} is not a power of two")));
    }
    let log_q = q.trailing_zeros() as u64;
    Ok((1..k)
        .map(|r| Fig2Row {
            r,
            msg_len_bits: int((m * n) as u64 * log_q) / (int((r * k) as u64) * c(k, r)),
            count_paper: binomial(k, r + 1),
            count_alt: binomial(k - 1, r),
        })
        .collect())
}

pub fn write_fig2_csv<W: Write>(out: W, rows: &[Fig2Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "msg_len_bits", "count_paper", "count_alt"]).map_err(csv_err)?;
    for row in rows {
        w.write_record([
            row.r.to_string(),
            format_sig(to_f64(&row.msg_len_bits)),
            row.count_paper.to_string(),
            row.count_alt.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig3Row {
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(with = "ratio_string")]
    pub l_cdc: Load,
    #[serde(with = "ratio_string")]
    pub l_cdc_ld: Load,
}

/// Coded and rank-compressed loads of an `s = 1` job as `T` varies, with a
/// constant average rank.
pub fn fig3_sweep(base: &JobSpec, ts: impl IntoIterator<Item = usize>, rho: &Load) -> Result<Vec<Fig3Row>> {
    if base.s != 1 {
        return Err(Error::Unsupported("the T sweep is defined for s = 1".into()));
    }
    let l_cdc = l_cdc_s1(base.r, base.nodes);
    ts.into_iter()
        .map(|t| {
            let spec = base.with_value_bits(t);
            spec.validate()?;
            Ok(Fig3Row {
                t,
                l_cdc: l_cdc.clone(),
                l_cdc_ld: l_cdc_ld(&spec, &RhoTable::from([(base.r + 1, rho.clone())])),
            })
        })
        .collect()
}

pub fn write_fig3_csv<W: Write>(out: W, rows: &[Fig3Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["T", "L_cdc", "L_cdc_ld"]).map_err(csv_err)?;
    for row in rows {
        w.write_record([
            row.t.to_string(),
            format_sig(to_f64(&row.l_cdc)),
            format_sig(to_f64(&row.l_cdc_ld)),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))
}

pub type WorkloadFactory = Box<dyn Fn(&JobSpec) -> Result<Workload> + Sync + Send>;

/// How the rank-compressed column of a trade-off sweep obtains `rho_l`.
pub enum RhoModel {
    /// The same average rank for every group size.
    Constant(Load),
    /// Every node's messages linearly independent: `rho_l = min(C(K-1,l-1), message bits)`.
    FullRank,
    /// Ranks measured by running the rank-compressed shuffle on a workload.
    Measured(WorkloadFactory),
}

impl RhoModel {
    pub fn describe(&self) -> String {
        match self {
            RhoModel::Constant(x) => format!("constant rho = {x}"),
            RhoModel::FullRank => "full rank".into(),
            RhoModel::Measured(_) => "measured from a workload run".into(),
        }
    }

    fn table(&self, spec: &JobSpec) -> Result<(RhoTable, Option<Load>)> {
        match self {
            RhoModel::Constant(x) => Ok((spec.group_sizes().map(|l| (l, x.clone())).collect(), None)),
            RhoModel::FullRank => {
                let placement = crate::placement::make_placement(spec)?;
                let mut t = RhoTable::new();
                for l in spec.group_sizes() {
                    let bits = crate::codec::message_bits(&placement, l)? as u64;
                    t.insert(l, int(binomial(spec.nodes - 1, l - 1).min(bits)));
                }
                Ok((t, None))
            }
            RhoModel::Measured(factory) => {
                let res = engine::run(spec, &factory(spec)?, Scheme::CdcLd)?;
                Ok((res.average_ranks(), Some(res.load)))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fig4Row {
    pub r: usize,
    #[serde(with = "ratio_string")]
    pub l_uncoded: Load,
    #[serde(with = "ratio_string")]
    pub l_cdc: Load,
    #[serde(with = "ratio_string")]
    pub l_cdc_ld: Load,
    #[serde(serialize_with = "ratio_map::serialize")]
    pub rho: RhoTable,
    /// Counted load of the measuring run, when the ranks were measured.
    #[serde(serialize_with = "ratio_opt::serialize")]
    pub l_cdc_ld_counted: Option<Load>,
}

/// Loads of the three schemes as the computation load `r` varies. Rows whose
/// `(K, N, Q, r, s)` violate the divisibility rules are skipped with a
/// warning.
pub fn tradeoff_sweep(
    base: &JobSpec,
    rs: impl IntoIterator<Item = usize>,
    model: &RhoModel,
) -> Result<Vec<Fig4Row>> {
    let rs: Vec<usize> = rs.into_iter().collect();
    let rows: Vec<Option<Result<Fig4Row>>> = rs
        .par_iter()
        .map(|&r| {
            let spec = JobSpec { r, ..*base };
            if let Err(e) = spec.validate() {
                log::warn!("skipping r = {r}: {e}");
                return None;
            }
            Some(model.table(&spec).map(|(rho, counted)| Fig4Row {
                r,
                l_uncoded: l_uncoded(r, spec.nodes),
                l_cdc: l_cdc(r, spec.s, spec.nodes),
                l_cdc_ld: l_cdc_ld_derived(&spec, &rho),
                rho,
                l_cdc_ld_counted: counted,
            }))
        })
        .collect();
    let mut out: Vec<Fig4Row> = rows.into_iter().flatten().collect::<Result<_>>()?;
    out.sort_by_key(|row| row.r);
    Ok(out)
}

pub fn write_fig4_csv<W: Write>(out: W, rows: &[Fig4Row]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r", "L_uncoded", "L_cdc", "L_cdc_ld"]).map_err(csv_err)?;
    for row in rows {
        w.write_record([
            row.r.to_string(),
            format_sig(to_f64(&row.l_uncoded)),
            format_sig(to_f64(&row.l_cdc)),
            format_sig(to_f64(&row.l_cdc_ld)),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))
}

/// Serialized form of a rational for JSON documents that are read back.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatioString(#[serde(with = "ratio_string")] pub Load);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncoded_examples() {
        assert_eq!(l_uncoded(2, 4), ratio(1, 2));
        assert_eq!(l_uncoded(4, 4), Load::zero());
        assert_eq!(l_uncoded(1, 10), ratio(9, 10));
    }

    #[test]
    fn coded_examples() {
        assert_eq!(l_cdc(2, 1, 4), ratio(1, 4));
        for k in 2..=10 {
            assert_eq!(l_cdc(1, 1, k), ratio(k as i64 - 1, k as i64));
        }
        assert_eq!(l_cdc_s1(5, 10), ratio(1, 10));
    }

    #[test]
    fn general_s_reduces_to_s1_form() {
        for k in 2..=12 {
            for r in 1..k {
                assert_eq!(l_cdc(r, 1, k), l_cdc_s1(r, k), "K={k} r={r}");
            }
        }
    }

    #[test]
    fn crossover_at_t12() {
        let spec = JobSpec::new(4, 6, 4, 2, 1, 12).unwrap();
        let rho = RhoTable::from([(3, int(2))]);
        assert_eq!(l_cdc_ld(&spec, &rho), ratio(1, 4));
        assert_eq!(l_cdc_ld_s1(2, 4, 4, 6, 12, &int(2)), ratio(1, 4));
        assert_eq!(l_cdc_ld(&spec, &RhoTable::from([(3, Load::zero())])), Load::zero());
        assert!(l_cdc_ld(&spec.with_value_bits(13), &rho) < ratio(1, 4));
        assert!(l_cdc_ld(&spec.with_value_bits(11), &rho) > ratio(1, 4));
    }

    #[test]
    fn readings_agree_only_when_scale_is_one() {
        let spec = JobSpec::new(5, 10, 10, 2, 2, 8).unwrap();
        let rho: RhoTable = spec.group_sizes().map(|l| (l, int(3))).collect();
        assert_eq!(scale_factor(5, 1), int(1));
        assert_eq!(scale_factor(5, 2), ratio(1, 2));
        assert_ne!(l_cdc_ld(&spec, &rho), l_cdc_ld_derived(&spec, &rho));
        let s1 = JobSpec::new(5, 10, 5, 2, 1, 8).unwrap();
        let rho1 = RhoTable::from([(3, ratio(7, 5))]);
        assert_eq!(l_cdc_ld(&s1, &rho1), l_cdc_ld_derived(&s1, &rho1));
        assert_eq!(l_cdc_ld(&s1, &rho1), l_cdc_ld_s1(2, 5, 5, 10, 8, &ratio(7, 5)));
    }

    #[test]
    fn fig2_values() {
        let rows = fig2_table(16, 128, 2048, 2).unwrap();
        assert_eq!(rows.len(), 15);
        assert_eq!(rows[0].msg_len_bits, int(1024));
        assert_eq!(rows[0].count_paper, 120);
        assert_eq!(rows[1].msg_len_bits, ratio(16384, 240));
        assert_eq!(rows[1].count_paper, 560);
        assert_eq!(rows[14].count_paper, 1);
        assert_eq!(rows[14].count_alt, 1);
        assert!(fig2_table(16, 128, 2048, 6).is_err());
        assert_eq!(fig2_table(4, 8, 8, 4).unwrap()[0].msg_len_bits, int(8));
    }

    #[test]
    fn sig_digits() {
        assert_eq!(format_sig(0.25), "0.25");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(1024.0), "1024");
        assert_eq!(format_sig(16384.0 / 240.0), "68.2666666667");
        assert_eq!(format_sig(0.0), "0");
    }

    #[test]
    fn sweep_skips_invalid_rows() {
        let base = JobSpec::new(5, 10, 5, 2, 1, 8).unwrap();
        let rows = tradeoff_sweep(&base, 1..=4, &RhoModel::Constant(int(1))).unwrap();
        // C(5,1) = 5 and C(5,4) = 5 divide 10 as well
        assert_eq!(rows.iter().map(|r| r.r).collect::<Vec<_>>(), vec![1, 2, 3, 4]);
        let base = JobSpec::new(5, 15, 5, 1, 1, 8).unwrap();
        let rows = tradeoff_sweep(&base, 1..=4, &RhoModel::Constant(int(1))).unwrap();
        assert_eq!(rows.iter().map(|r| r.r).collect::<Vec<_>>(), vec![1, 4]);
    }

    #[test]
    fn ratio_string_roundtrip() {
        let x = RatioString(ratio(-7, 21));
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, "\"-1/3\"");
        assert_eq!(serde_json::from_str::<RatioString>(&s).unwrap(), x);
    }
}
