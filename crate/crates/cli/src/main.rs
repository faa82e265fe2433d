//! Command-line front end: solve, replay, price and inspect request
//! schedules over CSV / JSONL tables.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use prefix_reorder::cache::{CacheConfig, Eviction};
use prefix_reorder::fd::DEFAULT_DISCOVERY_MAX_ROWS;
use prefix_reorder::{InputFormat, TokenizerKind};

use commands::{CostConfig, Deferred, SimulateConfig};
use config::{apply_config_file, RunConfig, SolverKind};

#[derive(Parser)]
#[command(name = "prefix-reorder", version, about = "Reorder table rows and fields for prompt-cache reuse")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a request schedule and report its score, hit rate and cost.
    Solve(SolveArgs),
    /// Replay an exported schedule through the cache simulator.
    Simulate(SimulateArgs),
    /// Price a simulation report.
    Cost(CostArgs),
    /// Count duplicate prompts in an exported schedule.
    Dedup(DedupArgs),
    /// Per-field cardinality and mean fragment length.
    Stats(TableArgs),
    /// Validate declared FD groups, or discover them.
    FdCheck(FdCheckArgs),
}

#[derive(Args)]
struct TableArgs {
    /// CSV or JSONL table.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    format: Option<InputFormat>,
    #[arg(long, default_value_t = TokenizerKind::Char)]
    tokenizer: TokenizerKind,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CacheArgs {
    /// Cache size in tokens; 0 is unbounded.
    #[arg(long, default_value_t = 0)]
    capacity: usize,
    #[arg(long, default_value = "none")]
    eviction: Eviction,
    /// Shorter matches earn no hit credit.
    #[arg(long, default_value_t = 0)]
    min_prefix: usize,
}

impl CacheArgs {
    fn build(&self, tokenizer: TokenizerKind) -> CacheConfig {
        // a bounded cache without an explicit policy evicts LRU
        let eviction = if self.capacity > 0 && self.eviction == Eviction::None { Eviction::Lru } else { self.eviction };
        CacheConfig { capacity_tokens: self.capacity, eviction, min_cacheable_prefix_tokens: self.min_prefix, tokenizer }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    format: Option<InputFormat>,
    #[arg(long, value_enum, default_value_t = SolverKind::Ggr)]
    solver: SolverKind,
    /// JSON file `{"groups": [["a", "b"], ...]}`.
    #[arg(long)]
    fds: Option<PathBuf>,
    /// Discover bidirectional FDs when no FD file is given.
    #[arg(long)]
    discover_fds: bool,
    #[arg(long)]
    no_fds: bool,
    #[arg(long, default_value_t = TokenizerKind::Char)]
    tokenizer: TokenizerKind,
    #[arg(long, default_value_t = 4)]
    row_depth: usize,
    #[arg(long, default_value_t = 2)]
    column_depth: usize,
    #[arg(long, default_value_t = 100_000.0)]
    threshold: f64,
    /// Remove the depth limits and threshold.
    #[arg(long)]
    unlimited: bool,
    /// Let the exact solvers run past their size caps.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    time_budget_ms: Option<u64>,
    #[command(flatten)]
    cache: CacheArgs,
    #[arg(long, default_value = "gpt-4o-mini")]
    pricing: String,
    #[arg(long)]
    pricing_file: Option<PathBuf>,
    /// Output tokens per request.
    #[arg(long, default_value_t = 0.0)]
    output_tokens: f64,
    #[arg(long, default_value = "")]
    system_prompt: String,
    #[arg(long, default_value = "")]
    question: String,
    #[arg(long)]
    schedule_out: Option<PathBuf>,
    #[arg(long)]
    report_out: Option<PathBuf>,
    /// JSON config merged over these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl SolveArgs {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = RunConfig {
            input: self.input,
            format: self.format,
            fds: self.fds,
            discover_fds: self.discover_fds,
            solver: self.solver,
            cache: self.cache.build(self.tokenizer),
            pricing: self.pricing,
            pricing_file: self.pricing_file,
            output_tokens: prefix_reorder::cost::OutputTokens::Uniform(self.output_tokens),
            system_prompt: self.system_prompt,
            question: self.question,
            schedule_out: self.schedule_out,
            report_out: self.report_out,
            ..RunConfig::default()
        };
        if self.unlimited {
            cfg.ggr = prefix_reorder::solver::GgrConfig::unlimited();
        } else {
            cfg.ggr.row_recursion_depth = Some(self.row_depth);
            cfg.ggr.column_recursion_depth = Some(self.column_depth);
            cfg.ggr.hitcount_stop_threshold = self.threshold;
        }
        cfg.ggr.use_fds = !self.no_fds;
        cfg.ggr.tokenizer = self.tokenizer;
        cfg.ophr.force = self.force;
        cfg.ophr.time_budget_ms = self.time_budget_ms;
        apply_config_file(cfg, self.config.as_deref())
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    format: Option<InputFormat>,
    /// Schedule JSONL written by `solve`.
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long, default_value_t = TokenizerKind::Char)]
    tokenizer: TokenizerKind,
    #[command(flatten)]
    cache: CacheArgs,
    /// Per-request CSV trace.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    /// Report written by `simulate`.
    #[arg(long)]
    report: PathBuf,
    /// Second `simulate` report to compute savings against.
    #[arg(long)]
    baseline: Option<PathBuf>,
    #[arg(long, default_value = "gpt-4o-mini")]
    pricing: String,
    #[arg(long)]
    pricing_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    output_tokens: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct DedupArgs {
    #[arg(long)]
    schedule: PathBuf,
    /// Unique prompts as JSONL strings.
    #[arg(long)]
    uniques_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FdCheckArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    format: Option<InputFormat>,
    /// Groups to validate; discovery runs when absent.
    #[arg(long)]
    fds: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_DISCOVERY_MAX_ROWS)]
    max_rows: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(args) => commands::solve(args.into_config()?),
        Command::Simulate(a) => {
            let cfg = SimulateConfig {
                input: a.input,
                format: a.format,
                schedule: a.schedule,
                cache: a.cache.build(a.tokenizer),
                trace_out: a.trace_out,
                out: a.out,
            };
            commands::simulate(apply_config_file(cfg, a.config.as_deref())?)
        }
        Command::Cost(a) => {
            let cfg = CostConfig {
                report: a.report,
                baseline: a.baseline,
                pricing: a.pricing,
                pricing_file: a.pricing_file,
                output_tokens: prefix_reorder::cost::OutputTokens::Uniform(a.output_tokens),
                out: a.out,
            };
            commands::cost(apply_config_file(cfg, a.config.as_deref())?)
        }
        Command::Dedup(a) => commands::dedup_cmd(&a.schedule, a.uniques_out.as_deref(), a.out.as_deref()),
        Command::Stats(a) => {
            let t = commands::read_table(&a.input, a.format)?;
            commands::stats_cmd(&t, a.tokenizer, a.out.as_deref())
        }
        Command::FdCheck(a) => {
            let t = commands::read_table(&a.input, a.format)?;
            commands::fd_check(&t, a.fds.as_deref(), a.max_rows, a.out.as_deref())
        }
    }
}

/// 2 validation, 3 size refusal, 4 I/O.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(d) = cause.downcast_ref::<Deferred>() {
            return d.code;
        }
        if let Some(e) = cause.downcast_ref::<prefix_reorder::Error>() {
            return match e {
                prefix_reorder::Error::Size(_) | prefix_reorder::Error::TimeBudget(_) => 3,
                prefix_reorder::Error::Io(_) => 4,
                _ => 2,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 4;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
