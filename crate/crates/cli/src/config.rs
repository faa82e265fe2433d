//! Effective run configuration. Flags build a base document; a JSON config
//! file, when given, is merged over it key by key.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use prefix_reorder::cache::CacheConfig;
use prefix_reorder::cost::{OutputTokens, PricingModel};
use prefix_reorder::solver::{GgrConfig, OphrLimits};
use prefix_reorder::InputFormat;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Rows and fields in input order.
    Original,
    /// One statistics-derived field order, rows sorted under it.
    FixedStats,
    #[default]
    Ggr,
    Ophr,
    Brute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OphrSettings {
    pub max_rows: usize,
    pub max_fields: usize,
    pub time_budget_ms: Option<u64>,
    pub force: bool,
}

impl Default for OphrSettings {
    fn default() -> Self {
        let d = OphrLimits::default();
        OphrSettings { max_rows: d.max_rows, max_fields: d.max_fields, time_budget_ms: None, force: false }
    }
}

impl OphrSettings {
    pub fn limits(&self) -> OphrLimits {
        OphrLimits {
            max_rows: self.max_rows,
            max_fields: self.max_fields,
            time_budget: self.time_budget_ms.map(Duration::from_millis),
            force: self.force,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: PathBuf,
    /// Inferred from the extension when absent.
    pub format: Option<InputFormat>,
    pub fds: Option<PathBuf>,
    pub discover_fds: bool,
    pub solver: SolverKind,
    pub ggr: GgrConfig,
    pub ophr: OphrSettings,
    pub cache: CacheConfig,
    pub pricing: String,
    pub pricing_file: Option<PathBuf>,
    pub output_tokens: OutputTokens,
    pub system_prompt: String,
    pub question: String,
    pub schedule_out: Option<PathBuf>,
    pub report_out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: PathBuf::new(),
            format: None,
            fds: None,
            discover_fds: false,
            solver: SolverKind::default(),
            ggr: GgrConfig::default(),
            ophr: OphrSettings::default(),
            cache: CacheConfig::default(),
            pricing: "gpt-4o-mini".into(),
            pricing_file: None,
            output_tokens: OutputTokens::none(),
            system_prompt: String::new(),
            question: String::new(),
            schedule_out: None,
            report_out: None,
        }
    }
}

pub fn infer_format(path: &Path, explicit: Option<InputFormat>) -> InputFormat {
    explicit.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl" | "ndjson") => InputFormat::Jsonl,
        _ => InputFormat::Csv,
    })
}

pub fn load_pricing(name: &str, file: Option<&Path>) -> Result<PricingModel> {
    match file {
        Some(path) => {
            let f = File::open(path).with_context(|| format!("opening pricing file {}", path.display()))?;
            Ok(PricingModel::from_json_reader(f)?)
        }
        None => Ok(PricingModel::builtin(name)?),
    }
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                merge(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Serializes the flag-derived config, overlays the config file and reads
/// the result back.
pub fn apply_config_file<T: Serialize + DeserializeOwned>(from_flags: T, path: Option<&Path>) -> Result<T> {
    let Some(path) = path else { return Ok(from_flags) };
    let file = File::open(path).with_context(|| format!("opening config {}", path.display()))?;
    let overlay: Value =
        serde_json::from_reader(file).with_context(|| format!("parsing config {}", path.display()))?;
    let mut doc = serde_json::to_value(from_flags)?;
    merge(&mut doc, overlay);
    serde_json::from_value(doc).with_context(|| format!("applying config {}", path.display()))
}
