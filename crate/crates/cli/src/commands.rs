use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use cdc_core::analytics::{
    self, fig2_table, fig3_sweep, format_sig, to_f64, tradeoff_sweep, write_fig2_csv, write_fig3_csv,
    write_fig4_csv, write_loads_csv, Load, RhoModel,
};
use cdc_core::engine::verify_transcript;
use cdc_core::workloads::IngestReport;
use cdc_core::{run, JobSpec, LoadReport, RunResult, Scheme, ShuffleTranscript, Verification};
use serde::Serialize;
use serde_json::json;

use crate::config::{build_workload, preset, JobConfig, JobFlags};
use crate::CliError;

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct SchemeRun<'a> {
    result: &'a RunResult,
    report: LoadReport,
}

#[derive(Serialize)]
struct RunDocument<'a> {
    config: &'a JobConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    ingest: Option<&'a IngestReport>,
    runs: Vec<SchemeRun<'a>>,
}

/// Runs every selected scheme, writes `loads.csv` and `result.json`.
pub fn cmd_run(flags: &JobFlags) -> Result<(), CliError> {
    let cfg = flags.resolve()?;
    let spec = cfg.spec()?;
    let schemes = cfg.schemes(&spec)?;
    let built = build_workload(&cfg.workload, &spec)?;

    let results = schemes
        .iter()
        .map(|&scheme| run(&spec, &built.workload, scheme).map_err(CliError::from))
        .collect::<Result<Vec<_>, _>>()?;
    let reports: Vec<LoadReport> = results.iter().map(LoadReport::from_run).collect();

    let dir = cfg.out_dir();
    create_dir(&dir)?;
    write_loads_csv(create(&dir.join("loads.csv"))?, &reports)?;
    let doc = RunDocument {
        config: &cfg,
        ingest: built.ingest.as_ref(),
        runs: results
            .iter()
            .zip(&reports)
            .map(|(result, report)| SchemeRun {
                result,
                report: report.clone(),
            })
            .collect(),
    };
    write_json(&dir.join("result.json"), &doc)?;

    let mut failed = Vec::new();
    for (res, rep) in results.iter().zip(&reports) {
        println!(
            "{:<8} L = {} ({})  bits per node = {:?}  verification: {}",
            res.scheme.name(),
            res.load,
            format_sig(res.load_f64),
            res.bits_per_node,
            verdict(&res.verification)
        );
        for a in &rep.analytic {
            println!(
                "         {:<16} analytic {} ({}) {}",
                a.label,
                a.value,
                format_sig(to_f64(&a.value)),
                if a.exact { "exact" } else { "differs" }
            );
        }
        if let Some(flag) = &rep.flag {
            println!("         note: {flag}");
        }
        if let Verification::Fail { reason } = &res.verification {
            failed.push(format!("{}: {reason}", res.scheme));
        }
        if res.coverage_ok == Some(false) {
            failed.push(format!("{}: some needed value is in no V-set addressed to its node", res.scheme));
        }
        if res.ld_roundtrip_ok == Some(false) {
            failed.push(format!("{}: decompressed messages differ from the encoded ones", res.scheme));
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join("; ")))
    }
}

fn verdict(v: &Verification) -> &'static str {
    match v {
        Verification::Pass => "pass",
        Verification::Fail { .. } => "FAIL",
        Verification::NotApplicable => "n/a (s >= 2, accounting only)",
    }
}

fn parse_rho(text: &str) -> Result<Load, CliError> {
    text.parse::<Load>()
        .ok()
        .filter(|x| *x >= Load::from_integer(0.into()))
        .ok_or_else(|| CliError::Config(format!("rho must be a non-negative integer or p/q, got {text:?}")))
}

fn rho_model(cfg: &JobConfig) -> Result<RhoModel, CliError> {
    match cfg.rho.as_deref().unwrap_or("2") {
        "full" => Ok(RhoModel::FullRank),
        "measured" => {
            let wl = cfg.workload.clone();
            Ok(RhoModel::Measured(Box::new(move |spec: &JobSpec| {
                build_workload(&wl, spec)
                    .map(|b| b.workload)
                    .map_err(|e| cdc_core::Error::InvalidInput(e.to_string()))
            })))
        }
        other => Ok(RhoModel::Constant(parse_rho(other)?)),
    }
}

/// Writes the CSV table for a `fig2`, `fig3` or `fig4` preset.
pub fn cmd_sweep(flags: &JobFlags) -> Result<PathBuf, CliError> {
    let name = flags
        .preset
        .clone()
        .ok_or_else(|| CliError::Config("sweep needs --preset fig2, fig3 or fig4".into()))?;
    let cfg = flags.resolve()?;
    let dir = cfg.out_dir();
    create_dir(&dir)?;
    let need = |v: Option<usize>, field: &str| {
        v.ok_or_else(|| CliError::Config(format!("missing {field} for the {name} sweep")))
    };
    let path = dir.join(format!("{name}.csv"));
    match name.as_str() {
        "fig2" => {
            let rows = fig2_table(
                need(cfg.nodes, "K")?,
                need(cfg.files, "N")?,
                need(cfg.m, "m")?,
                cfg.field_size.unwrap_or(2),
            )?;
            write_fig2_csv(create(&path)?, &rows)?;
            for row in &rows {
                let shorter = to_f64(&row.msg_len_bits) < row.count_paper as f64;
                println!(
                    "r = {:>2}  length {:>14}  messages {:>6}  {}",
                    row.r,
                    format_sig(to_f64(&row.msg_len_bits)),
                    row.count_paper,
                    if shorter { "length < count" } else { "" }
                );
            }
        }
        "fig3" => {
            let base = cfg.spec()?;
            let rho = parse_rho(cfg.rho.as_deref().unwrap_or("2"))?;
            let (lo, hi) = (cfg.t_min.unwrap_or(1), cfg.t_max.unwrap_or(64));
            if lo == 0 || lo > hi {
                return Err(CliError::Config(format!("bad T range {lo}..={hi}")));
            }
            let rows = fig3_sweep(&base, lo..=hi, &rho)?;
            write_fig3_csv(create(&path)?, &rows)?;
            write_json(
                &dir.join("fig3.meta.json"),
                &json!({
                    "preset": name,
                    "spec": base,
                    "rho_model": RhoModel::Constant(rho.clone()).describe(),
                    "rho": rho.to_string(),
                    "rows": rows,
                }),
            )?;
            if let Some(x) = rows.iter().find(|r| r.l_cdc_ld <= r.l_cdc) {
                println!("rank-compressed load reaches the coded load at T = {} ({})", x.t, x.l_cdc_ld);
            }
        }
        "fig4" => {
            let k = need(cfg.nodes, "K")?;
            let base = JobSpec {
                nodes: k,
                files: need(cfg.files, "N")?,
                functions: need(cfg.functions, "Q")?,
                r: 1,
                s: cfg.s.unwrap_or(1),
                value_bits: need(cfg.value_bits, "T")?,
            };
            let model = rho_model(&cfg)?;
            let rows = tradeoff_sweep(&base, 1..k, &model)?;
            write_fig4_csv(create(&path)?, &rows)?;
            write_json(
                &dir.join("fig4.meta.json"),
                &json!({
                    "preset": name,
                    "spec": base,
                    "rho_model": model.describe(),
                    "rows": rows,
                }),
            )?;
            for row in &rows {
                println!(
                    "r = {}  uncoded {}  cdc {}  cdc-ld {}",
                    row.r,
                    format_sig(to_f64(&row.l_uncoded)),
                    format_sig(to_f64(&row.l_cdc)),
                    format_sig(to_f64(&row.l_cdc_ld))
                );
            }
        }
        other => return Err(CliError::Config(format!("no sweep for preset {other:?}"))),
    }
    Ok(path)
}

/// Transcripts of the `paper-wordcount` preset job, one file per scheme.
pub fn cmd_fixture(flags: &JobFlags) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = preset("paper-wordcount")?;
    cfg.overlay(&flags.resolve()?);
    let spec = cfg.spec()?;
    let built = build_workload(&cfg.workload, &spec)?;
    let dir = cfg.out_dir();
    create_dir(&dir)?;
    let mut written = Vec::new();
    for scheme in cfg.schemes(&spec)? {
        let res = run(&spec, &built.workload, scheme)?;
        let path = dir.join(format!("transcript-{scheme}.json"));
        let mut text = res.transcript.to_json();
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        println!("{}", path.display());
        written.push(path);
    }
    let job = dir.join("job.json");
    write_json(&job, &cfg)?;
    written.push(job);
    Ok(written)
}

/// Decodes a stored transcript at every node and checks the outputs.
pub fn cmd_replay(transcript: &Path, flags: &JobFlags) -> Result<(), CliError> {
    let text = fs::read_to_string(transcript).map_err(|e| CliError::Io(format!("{}: {e}", transcript.display())))?;
    let t = ShuffleTranscript::from_json(&text).map_err(|e| CliError::Config(e.to_string()))?;
    let cfg = flags.resolve()?;
    if cfg.workload.kind.is_none() {
        return Err(CliError::Config(
            "replay needs the workload: pass --preset, --config or --workload".into(),
        ));
    }
    let built = build_workload(&cfg.workload, &t.spec)?;
    let (_, verdict) = verify_transcript(&t, &built.workload)?;
    let recount = t.bits_per_node();
    let counters: Vec<u64> = t.nodes.iter().map(|n| n.bits).collect();
    match verdict {
        Verification::Pass if recount == counters => {
            println!(
                "{}: pass, {} bits, L = {}",
                t.scheme,
                t.total_bits(),
                analytics::load_from_bits(t.total_bits(), &t.spec)
            );
            Ok(())
        }
        Verification::Pass => Err(CliError::Verification(format!(
            "bit counters {counters:?} disagree with the payloads {recount:?}"
        ))),
        Verification::Fail { reason } => Err(CliError::Verification(reason)),
        Verification::NotApplicable => {
            if t.scheme == Scheme::Uncoded {
                return Err(CliError::Unsupported("uncoded transcript with s >= 2".into()));
            }
            println!("{}: s >= 2, nothing to decode; {} bits", t.scheme, t.total_bits());
            Ok(())
        }
    }
}
