use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use prefix_reorder::baseline::{fixed_order_by_stats, sort_rows_fixed_order};
use prefix_reorder::cache::{simulate_with_tokenizer, CacheConfig, SimReport};
use prefix_reorder::cost::{dedup, estimate_cost, savings, CostReport, OutputTokens, PricingModel};
use prefix_reorder::fd::{discover_fds, validate_fds, DEFAULT_DISCOVERY_MAX_ROWS};
use prefix_reorder::objective::phc;
use prefix_reorder::render::render_row;
use prefix_reorder::schedule::{read_schedule_jsonl, schedule_from_records, write_schedule_jsonl, ScheduleRecord};
use prefix_reorder::solver::{brute_force_max, ggr_with_tokenizer, ophr, SolveResult, SolveStats};
use prefix_reorder::stats::compute_stats;
use prefix_reorder::{load_table, Error, FunctionalDependencySet, InputFormat, RequestSchedule, Table};
use serde::{Deserialize, Serialize};

use crate::config::{infer_format, load_pricing, RunConfig, SolverKind};

/// Set when a command finished its output but must still exit non-zero.
#[derive(Debug)]
pub struct Deferred {
    pub code: u8,
    pub message: String,
}

impl std::fmt::Display for Deferred {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Deferred {}

pub fn read_table(path: &Path, format: Option<InputFormat>) -> Result<Table> {
    let f = File::open(path).with_context(|| format!("opening table {}", path.display()))?;
    load_table(f, infer_format(path, format)).with_context(|| format!("loading table {}", path.display()))
}

fn read_fds(path: &Path) -> Result<FunctionalDependencySet> {
    let f = File::open(path).with_context(|| format!("opening FD file {}", path.display()))?;
    FunctionalDependencySet::from_json_reader(f).with_context(|| format!("parsing FD file {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

/// Pretty JSON to `path`, or stdout when absent.
pub fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(std::io::BufReader::new(f)).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Serialize)]
pub struct DedupCounts {
    pub requests: usize,
    pub unique_prompts: usize,
    pub calls_saved: usize,
}

#[derive(Debug, Serialize)]
pub struct SimSummary {
    pub input_tokens: u64,
    pub hit_tokens: u64,
    pub miss_tokens: u64,
    pub written_tokens: u64,
    pub evicted_tokens: u64,
    pub phr: f64,
}

impl From<&SimReport> for SimSummary {
    fn from(r: &SimReport) -> Self {
        SimSummary {
            input_tokens: r.total_input_tokens,
            hit_tokens: r.total_hit_tokens,
            miss_tokens: r.total_miss_tokens,
            written_tokens: r.total_written_tokens,
            evicted_tokens: r.evicted_tokens,
            phr: r.phr,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub rows: usize,
    pub fields: usize,
    pub table_hash: String,
    pub solver: SolverKind,
    /// Recomputed on the emitted schedule.
    pub phc: u64,
    pub optimal: bool,
    pub solver_wall_time_ms: f64,
    pub solver_stats: Option<SolveStats>,
    pub fd_groups_used: Vec<Vec<String>>,
    pub fd_warnings: Vec<String>,
    pub phr: f64,
    pub simulation: SimSummary,
    pub original_order: SimSummary,
    /// Includes savings relative to the original order.
    pub cost: CostReport,
    pub dedup: DedupCounts,
    pub config: RunConfig,
}

fn effective_fds(cfg: &RunConfig, t: &Table, warnings: &mut Vec<String>) -> Result<FunctionalDependencySet> {
    let declared = match (&cfg.fds, cfg.discover_fds) {
        (Some(path), _) => read_fds(path)?,
        (None, true) => discover_fds(t, DEFAULT_DISCOVERY_MAX_ROWS)?,
        (None, false) => return Ok(FunctionalDependencySet::empty()),
    };
    let report = validate_fds(t, &declared)?;
    for g in report.groups.iter().filter(|g| !g.satisfied) {
        let (i, j) = g.witness.unwrap_or_default();
        let msg = format!("FD group {:?} does not hold (rows {i} and {j}); disabled", g.fields);
        eprintln!("warning: {msg}");
        warnings.push(msg);
    }
    Ok(report.satisfied_subset(&declared))
}

fn run_solver(cfg: &RunConfig, t: &Table, fds: &FunctionalDependencySet) -> Result<(SolveResult, Option<Deferred>)> {
    let tok = cfg.ggr.tokenizer.build();
    let tok = tok.as_ref();
    let start = Instant::now();
    let fixed = |s: RequestSchedule| {
        let score = phc(&s, t, tok);
        let stats = SolveStats { wall_time_ms: start.elapsed().as_secs_f64() * 1e3, ..SolveStats::default() };
        SolveResult { phc_score: score, schedule: s, stats, optimal: false }
    };
    let res = match cfg.solver {
        SolverKind::Original => fixed(RequestSchedule::identity(t)),
        SolverKind::FixedStats => {
            let order = fixed_order_by_stats(&compute_stats(t, tok));
            fixed(sort_rows_fixed_order(t, &order)?)
        }
        SolverKind::Ggr => ggr_with_tokenizer(t, fds, &cfg.ggr, tok)?,
        SolverKind::Ophr => match ophr(t, tok, &cfg.ophr.limits()) {
            Err(Error::TimeBudget(partial)) => {
                let message = format!(
                    "exact solver exceeded its time budget; wrote the best partial schedule (score {})",
                    partial.phc_score
                );
                eprintln!("warning: {message}");
                return Ok((*partial, Some(Deferred { code: 3, message })));
            }
            other => other?,
        },
        SolverKind::Brute => brute_force_max(t, tok)?,
    };
    Ok((res, None))
}

pub fn solve(cfg: RunConfig) -> Result<()> {
    let t = read_table(&cfg.input, cfg.format)?;
    let pricing = load_pricing(&cfg.pricing, cfg.pricing_file.as_deref())?;
    let mut fd_warnings = Vec::new();
    let fds = effective_fds(&cfg, &t, &mut fd_warnings)?;
    let (res, deferred) = run_solver(&cfg, &t, &fds)?;

    let tok = cfg.ggr.tokenizer.build();
    let score = phc(&res.schedule, &t, tok.as_ref());
    if score != res.phc_score {
        bail!("solver reported {} but its schedule scores {score}", res.phc_score);
    }
    res.schedule.validate_complete(&t)?;

    if let Some(path) = &cfg.schedule_out {
        let mut w = create(path)?;
        write_schedule_jsonl(&mut w, &res.schedule, &t, &cfg.system_prompt, &cfg.question)?;
    }

    let cache_tok = cfg.cache.tokenizer.build();
    let prompts = res.schedule.prompts(&t, &cfg.system_prompt, &cfg.question);
    let sim = simulate_with_tokenizer(&prompts, &cfg.cache, cache_tok.as_ref())?;
    let original_prompts = RequestSchedule::identity(&t).prompts(&t, &cfg.system_prompt, &cfg.question);
    let original = simulate_with_tokenizer(&original_prompts, &cfg.cache, cache_tok.as_ref())?;
    let mut cost = estimate_cost(&sim, &cfg.output_tokens, &pricing)?;
    let baseline = estimate_cost(&original, &cfg.output_tokens, &pricing)?;
    cost.savings_vs_baseline = savings(&cost, &baseline).ok();
    let d = dedup(&prompts);

    let report = RunReport {
        rows: t.num_rows(),
        fields: t.num_fields(),
        table_hash: t.content_hash(),
        solver: cfg.solver,
        phc: score,
        optimal: res.optimal,
        solver_wall_time_ms: res.stats.wall_time_ms,
        solver_stats: matches!(cfg.solver, SolverKind::Ggr | SolverKind::Ophr | SolverKind::Brute).then_some(res.stats),
        fd_groups_used: fds.groups.clone(),
        fd_warnings,
        phr: sim.phr,
        simulation: SimSummary::from(&sim),
        original_order: SimSummary::from(&original),
        cost,
        dedup: DedupCounts { requests: prompts.len(), unique_prompts: d.uniques.len(), calls_saved: d.calls_saved() },
        config: cfg.clone(),
    };
    emit_json(&report, cfg.report_out.as_deref())?;
    match deferred {
        Some(d) => Err(d.into()),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub input: PathBuf,
    pub format: Option<InputFormat>,
    pub schedule: PathBuf,
    pub cache: CacheConfig,
    pub trace_out: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            input: PathBuf::new(),
            format: None,
            schedule: PathBuf::new(),
            cache: CacheConfig::default(),
            trace_out: None,
            out: None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SimulateOutput {
    pub table_hash: String,
    #[serde(flatten)]
    pub report: SimReport,
}

fn read_records(path: &Path) -> Result<Vec<ScheduleRecord>> {
    let f = File::open(path).with_context(|| format!("opening schedule {}", path.display()))?;
    read_schedule_jsonl(f).with_context(|| format!("reading schedule {}", path.display()))
}

pub fn simulate(cfg: SimulateConfig) -> Result<()> {
    let t = read_table(&cfg.input, cfg.format)?;
    let records = read_records(&cfg.schedule)?;
    let schedule = schedule_from_records(&records, &t)?;
    for (pos, (entry, record)) in schedule.entries.iter().zip(&records).enumerate() {
        if !record.prompt.ends_with(&render_row(entry, &t)) {
            return Err(Error::Schema(format!("entry {pos}: stored prompt does not render row {}", entry.row_id)).into());
        }
    }
    let prompts: Vec<&str> = records.iter().map(|r| r.prompt.as_str()).collect();
    let report = simulate_with_tokenizer(&prompts, &cfg.cache, cfg.cache.tokenizer.build().as_ref())?;
    if let Some(path) = &cfg.trace_out {
        report.write_trace_csv(create(path)?)?;
    }
    emit_json(&SimulateOutput { table_hash: t.content_hash(), report }, cfg.out.as_deref())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    pub report: PathBuf,
    pub baseline: Option<PathBuf>,
    pub pricing: String,
    pub pricing_file: Option<PathBuf>,
    pub output_tokens: OutputTokens,
    pub out: Option<PathBuf>,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig {
            report: PathBuf::new(),
            baseline: None,
            pricing: "gpt-4o-mini".into(),
            pricing_file: None,
            output_tokens: OutputTokens::none(),
            out: None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CostOutput {
    pub table_hash: String,
    pub pricing_model: PricingModel,
    pub output_tokens_spec: OutputTokens,
    #[serde(flatten)]
    pub cost: CostReport,
}

pub fn cost(cfg: CostConfig) -> Result<()> {
    let pricing = load_pricing(&cfg.pricing, cfg.pricing_file.as_deref())?;
    let sim: SimulateOutput = read_json(&cfg.report)?;
    let mut cost = estimate_cost(&sim.report, &cfg.output_tokens, &pricing)?;
    if let Some(path) = &cfg.baseline {
        let base: SimulateOutput = read_json(path)?;
        if base.table_hash != sim.table_hash {
            return Err(Error::Schema(format!(
                "baseline was simulated on table {}, report on {}",
                base.table_hash, sim.table_hash
            ))
            .into());
        }
        let base_cost = estimate_cost(&base.report, &cfg.output_tokens, &pricing)?;
        cost.savings_vs_baseline = Some(savings(&cost, &base_cost)?);
    }
    let out = CostOutput {
        table_hash: sim.table_hash,
        pricing_model: pricing,
        output_tokens_spec: cfg.output_tokens.clone(),
        cost,
    };
    emit_json(&out, cfg.out.as_deref())
}

#[derive(Debug, Serialize)]
pub struct DedupOutput {
    pub requests: usize,
    pub unique_prompts: usize,
    pub calls_saved: usize,
    /// Index of the unique prompt serving each request.
    pub map: Vec<usize>,
}

pub fn dedup_cmd(schedule: &Path, uniques_out: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let records = read_records(schedule)?;
    let prompts: Vec<&str> = records.iter().map(|r| r.prompt.as_str()).collect();
    let d = dedup(&prompts);
    if let Some(path) = uniques_out {
        let mut w = create(path)?;
        for u in &d.uniques {
            serde_json::to_writer(&mut w, u)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    let calls_saved = d.calls_saved();
    emit_json(
        &DedupOutput { requests: d.map.len(), unique_prompts: d.uniques.len(), calls_saved, map: d.map },
        out,
    )
}

pub fn stats_cmd(t: &Table, tokenizer: prefix_reorder::TokenizerKind, out: Option<&Path>) -> Result<()> {
    emit_json(&compute_stats(t, tokenizer.build().as_ref()), out)
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FdCheckOutput {
    Validated(prefix_reorder::fd::FdReport),
    Discovered(FunctionalDependencySet),
}

pub fn fd_check(t: &Table, fds: Option<&Path>, max_rows: usize, out: Option<&Path>) -> Result<()> {
    match fds {
        Some(path) => {
            let declared = read_fds(path)?;
            let report = validate_fds(t, &declared)?;
            let ok = report.all_satisfied();
            let violated = report.groups.iter().filter(|g| !g.satisfied).count();
            emit_json(&FdCheckOutput::Validated(report), out)?;
            if !ok {
                return Err(Deferred { code: 2, message: format!("{violated} FD group(s) violated") }.into());
            }
            Ok(())
        }
        None => emit_json(&FdCheckOutput::Discovered(discover_fds(t, max_rows)?), out),
    }
}
