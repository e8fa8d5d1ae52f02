//! Job configuration: embedded presets, an optional JSON file and command
//! line flags, merged in that order.

use std::fs;
use std::path::{Path, PathBuf};

use cdc_core::workloads::{
    ingest_text, IngestReport, LinearTransformWorkload, Redundancy, SyntheticRankWorkload, Tokenizer,
    WordCountWorkload,
};
use cdc_core::{JobSpec, Scheme, Workload};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Tokens per block for `wordcount-random`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_len: Option<usize>,
    /// Zipf exponent for `wordcount-random`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    /// `whitespace` or `chars`, for `text`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tokenizer: Option<String>,
    /// Input vector length for the linear-transform workloads.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    /// Probability that a synthetic value repeats an earlier one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duplicate_prob: Option<f64>,
}

/// Every field is optional; later layers override earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub files: Option<usize>,
    #[serde(rename = "Q", skip_serializing_if = "Option::is_none")]
    pub functions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub value_bits: Option<usize>,
    /// `uncoded`, `cdc`, `cdc-ld` or `all`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub workload: WorkloadConfig,
    /// Average rank for sweeps: an integer or `p/q`, `full`, or `measured`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<String>,
    /// Matrix rows for the message-length table.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Field size for the message-length table.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field_size: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_min: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<usize>,
    /// Read from config files but never echoed, so outputs do not depend on
    /// where they are written.
    #[serde(skip_serializing)]
    pub out_dir: Option<PathBuf>,
}

fn is_default<T: Default + PartialEq>(x: &T) -> bool {
    *x == T::default()
}

macro_rules! overlay {
    ($dst:expr, $src:expr, $($field:ident),*) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl JobConfig {
    pub fn overlay(&mut self, top: &JobConfig) {
        overlay!(self, top, nodes, files, functions, r, s, value_bits, scheme, rho, m, field_size, t_min, t_max, out_dir);
        overlay!(
            self.workload,
            top.workload,
            kind,
            input,
            seed,
            block_len,
            exponent,
            tokenizer,
            cols,
            density,
            duplicate_prob
        );
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    fn need(&self, v: Option<usize>, name: &str) -> Result<usize, CliError> {
        v.ok_or_else(|| CliError::Config(format!("missing {name} (set --{name} or \"{name}\" in the config)")))
    }

    pub fn spec(&self) -> Result<JobSpec, CliError> {
        let spec = JobSpec {
            nodes: self.need(self.nodes, "K")?,
            files: self.need(self.files, "N")?,
            functions: self.need(self.functions, "Q")?,
            r: self.need(self.r, "r")?,
            s: self.s.unwrap_or(1),
            value_bits: self.need(self.value_bits, "T")?,
        };
        spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(spec)
    }

    pub fn schemes(&self, spec: &JobSpec) -> Result<Vec<Scheme>, CliError> {
        match self.scheme.as_deref().unwrap_or("all") {
            "all" if spec.s == 1 => Ok(Scheme::ALL.to_vec()),
            "all" => {
                log::warn!("uncoded shuffle skipped: it needs s = 1");
                Ok(vec![Scheme::Cdc, Scheme::CdcLd])
            }
            name => Ok(vec![name.parse().map_err(|e: cdc_core::Error| CliError::Config(e.to_string()))?]),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

pub const PRESETS: [&str; 5] = ["paper-wordcount", "general-s", "fig2", "fig3", "fig4"];

/// Embedded presets. `paper-wordcount` is the six-block example job;
/// `general-s` exercises `s = 2`; `fig2`, `fig3` and `fig4` hold the sweep
/// parameters.
pub fn preset(name: &str) -> Result<JobConfig, CliError> {
    let wordcount = |t| JobConfig {
        nodes: Some(4),
        files: Some(6),
        functions: Some(4),
        r: Some(2),
        s: Some(1),
        value_bits: Some(t),
        workload: WorkloadConfig {
            kind: Some("paper-wordcount".into()),
            ..Default::default()
        },
        ..Default::default()
    };
    Ok(match name {
        "paper-wordcount" => wordcount(6),
        "general-s" => JobConfig {
            nodes: Some(4),
            files: Some(6),
            functions: Some(6),
            r: Some(2),
            s: Some(2),
            value_bits: Some(8),
            workload: WorkloadConfig {
                kind: Some("synthetic".into()),
                seed: Some(1),
                ..Default::default()
            },
            ..Default::default()
        },
        "fig2" => JobConfig {
            nodes: Some(16),
            files: Some(128),
            functions: Some(16),
            m: Some(2048),
            field_size: Some(2),
            ..Default::default()
        },
        "fig3" => JobConfig {
            rho: Some("2".into()),
            t_min: Some(1),
            t_max: Some(64),
            ..wordcount(6)
        },
        "fig4" => JobConfig {
            nodes: Some(10),
            files: Some(2520),
            functions: Some(360),
            s: Some(1),
            value_bits: Some(64),
            rho: Some("2".into()),
            workload: WorkloadConfig {
                kind: Some("synthetic".into()),
                ..Default::default()
            },
            ..Default::default()
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown preset {other:?} (known: {})",
                PRESETS.join(", ")
            )))
        }
    })
}

/// Flags shared by all subcommands.
#[derive(Clone, Debug, Default, Args)]
pub struct JobFlags {
    /// JSON job file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    /// uncoded, cdc, cdc-ld or all.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long = "K")]
    pub nodes: Option<usize>,
    #[arg(long = "N")]
    pub files: Option<usize>,
    #[arg(long = "Q")]
    pub functions: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long = "T")]
    pub value_bits: Option<usize>,
    /// paper-wordcount, wordcount-random, text, lintrans-random,
    /// lintrans-coded or synthetic.
    #[arg(long)]
    pub workload: Option<String>,
    /// Text corpus or linear-transform file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Average rank for sweeps: integer, p/q, `full` or `measured`.
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl JobFlags {
    fn as_config(&self) -> JobConfig {
        JobConfig {
            nodes: self.nodes,
            files: self.files,
            functions: self.functions,
            r: self.r,
            s: self.s,
            value_bits: self.value_bits,
            scheme: self.scheme.clone(),
            workload: WorkloadConfig {
                kind: self.workload.clone(),
                input: self.input.clone(),
                seed: self.seed,
                ..Default::default()
            },
            rho: self.rho.clone(),
            out_dir: self.out_dir.clone(),
            ..Default::default()
        }
    }

    /// Preset, then config file, then flags.
    pub fn resolve(&self) -> Result<JobConfig, CliError> {
        let mut cfg = JobConfig::default();
        let file = self.config.as_deref().map(JobConfig::from_file).transpose()?;
        if let Some(name) = self.preset.as_deref() {
            cfg.overlay(&preset(name)?);
        }
        if let Some(file) = file {
            cfg.overlay(&file);
        }
        cfg.overlay(&self.as_config());
        Ok(cfg)
    }
}

/// A workload ready to map, plus what ingesting its input reported.
pub struct BuiltWorkload {
    pub workload: Workload,
    pub ingest: Option<IngestReport>,
}

pub fn build_workload(cfg: &WorkloadConfig, spec: &JobSpec) -> Result<BuiltWorkload, CliError> {
    let seed = cfg.seed.unwrap_or(0);
    let cfg_err = |e: cdc_core::Error| CliError::Config(e.to_string());
    let read_input = || -> Result<String, CliError> {
        let path = cfg
            .input
            .as_ref()
            .ok_or_else(|| CliError::Config("this workload needs --input".into()))?;
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    };
    let lintrans = |rows: usize| -> Result<LinearTransformWorkload, CliError> {
        if cfg.input.is_some() {
            LinearTransformWorkload::from_text(&read_input()?).map_err(cfg_err)
        } else {
            LinearTransformWorkload::random(
                seed,
                rows,
                cfg.cols.unwrap_or(64),
                spec.files,
                cfg.density.unwrap_or(0.5),
            )
            .map_err(cfg_err)
        }
    };
    let mut ingest = None;
    let workload = match cfg.kind.as_deref().unwrap_or("synthetic") {
        "paper-wordcount" => Workload::WordCount(WordCountWorkload::example()),
        "wordcount-random" => Workload::WordCount(
            WordCountWorkload::random(
                seed,
                spec.functions,
                spec.files,
                cfg.block_len.unwrap_or(64),
                cfg.exponent.unwrap_or(1.0),
            )
            .map_err(cfg_err)?,
        ),
        "text" => {
            let tokenizer = match cfg.tokenizer.as_deref().unwrap_or("whitespace") {
                "whitespace" => Tokenizer::Whitespace,
                "chars" => Tokenizer::Chars,
                other => return Err(CliError::Config(format!("unknown tokenizer {other:?}"))),
            };
            let text = read_input()?;
            let (w, report) = ingest_text(text.as_bytes(), spec.functions, spec.files, tokenizer).map_err(cfg_err)?;
            if report.dropped_tokens > 0 {
                log::warn!(
                    "{} of {} tokens fall outside the {}-word vocabulary and were dropped",
                    report.dropped_tokens,
                    report.total_tokens,
                    spec.functions
                );
            }
            ingest = Some(report);
            Workload::WordCount(w)
        }
        "lintrans-random" => Workload::LinearTransform(lintrans(spec.functions * spec.value_bits)?),
        "lintrans-coded" => Workload::CodedLinearTransform(
            lintrans(spec.nodes.saturating_sub(1) * spec.value_bits)?,
            Redundancy::Parity,
        ),
        "synthetic" => Workload::Synthetic(
            SyntheticRankWorkload::new(seed, cfg.duplicate_prob.unwrap_or(0.5)).map_err(cfg_err)?,
        ),
        other => return Err(CliError::Config(format!("unknown workload {other:?}"))),
    };
    Ok(BuiltWorkload { workload, ingest })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file_over_preset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("job.json");
        fs::write(&path, r#"{"T": 30, "r": 1, "workload": {"seed": 9}}"#).unwrap();
        let flags = JobFlags {
            config: Some(path),
            preset: Some("paper-wordcount".into()),
            r: Some(2),
            ..Default::default()
        };
        let cfg = flags.resolve().unwrap();
        assert_eq!(cfg.value_bits, Some(30));
        assert_eq!(cfg.r, Some(2));
        assert_eq!(cfg.nodes, Some(4));
        assert_eq!(cfg.workload.seed, Some(9));
        assert_eq!(cfg.workload.kind.as_deref(), Some("paper-wordcount"));
    }

    #[test]
    fn unknown_fields_and_presets_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("job.json");
        fs::write(&path, r#"{"K": 4, "bogus": 1}"#).unwrap();
        assert!(matches!(JobConfig::from_file(&path), Err(CliError::Config(_))));
        assert!(matches!(preset("nope"), Err(CliError::Config(_))));
    }

    #[test]
    fn missing_and_invalid_fields_are_named() {
        let cfg = JobConfig {
            nodes: Some(4),
            ..Default::default()
        };
        let CliError::Config(msg) = cfg.spec().unwrap_err() else { panic!() };
        assert!(msg.contains("N"));
        let mut cfg = preset("paper-wordcount").unwrap();
        cfg.files = Some(7);
        let CliError::Config(msg) = cfg.spec().unwrap_err() else { panic!() };
        assert!(msg.contains("C(K,r)"));
    }

    #[test]
    fn all_schemes_drop_uncoded_for_s2() {
        let cfg = preset("general-s").unwrap();
        let spec = cfg.spec().unwrap();
        assert_eq!(cfg.schemes(&spec).unwrap(), vec![Scheme::Cdc, Scheme::CdcLd]);
    }
}
