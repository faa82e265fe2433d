//! Prefix-cache replay and prefix hit rate (PHR).

mod radix;

pub use radix::RadixTree;

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedule::RequestSchedule;
use crate::table::Table;
use crate::tokenizer::{Tokenizer, TokenizerKind};

/// Provider prompt caches only bill prefixes of at least this many tokens.
pub const PROVIDER_MIN_PREFIX_TOKENS: usize = 1024;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Eviction {
    #[default]
    None,
    Lru,
}

impl std::str::FromStr for Eviction {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(Eviction::None),
            "lru" => Ok(Eviction::Lru),
            other => Err(format!("unknown eviction policy `{other}` (expected none or lru)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CacheConfig {
    /// 0 means unbounded.
    pub capacity_tokens: usize,
    pub eviction: Eviction,
    /// Matches shorter than this are not credited as hits.
    pub min_cacheable_prefix_tokens: usize,
    pub tokenizer: TokenizerKind,
}

impl Default for CacheConfig {
    fn default() -> Self {
        CacheConfig {
            capacity_tokens: 0,
            eviction: Eviction::None,
            min_cacheable_prefix_tokens: 0,
            tokenizer: TokenizerKind::Char,
        }
    }
}

impl CacheConfig {
    pub fn unbounded() -> Self {
        Self::default()
    }

    pub fn lru(capacity_tokens: usize) -> Self {
        CacheConfig { capacity_tokens, eviction: Eviction::Lru, ..Self::default() }
    }

    pub fn provider() -> Self {
        CacheConfig { min_cacheable_prefix_tokens: PROVIDER_MIN_PREFIX_TOKENS, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.capacity_tokens == 0 && self.eviction != Eviction::None {
            return Err(Error::Domain("an unbounded cache (capacity 0) cannot use eviction".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestStats {
    pub input_tokens: u64,
    pub hit_tokens: u64,
    pub miss_tokens: u64,
    /// Tokens newly stored in the cache for this request.
    pub written_tokens: u64,
    /// Longer than the whole cache; served without hits or caching.
    pub uncacheable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: CacheConfig,
    pub requests: Vec<RequestStats>,
    pub total_input_tokens: u64,
    pub total_hit_tokens: u64,
    pub total_miss_tokens: u64,
    pub total_written_tokens: u64,
    pub evicted_tokens: u64,
    /// `total_hit_tokens / total_input_tokens`
    pub phr: f64,
}

impl SimReport {
    pub fn from_requests(config: CacheConfig, requests: Vec<RequestStats>, evicted_tokens: u64) -> Self {
        let sum = |f: fn(&RequestStats) -> u64| requests.iter().map(f).sum::<u64>();
        let total_input_tokens = sum(|r| r.input_tokens);
        let total_hit_tokens = sum(|r| r.hit_tokens);
        let phr = if total_input_tokens == 0 { 0.0 } else { total_hit_tokens as f64 / total_input_tokens as f64 };
        SimReport {
            config,
            total_input_tokens,
            total_hit_tokens,
            total_miss_tokens: sum(|r| r.miss_tokens),
            total_written_tokens: sum(|r| r.written_tokens),
            evicted_tokens,
            phr,
            requests,
        }
    }

    /// Per-request trace: `request_index,input,hit,miss`.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["request_index", "input", "hit", "miss"])?;
        for (i, r) in self.requests.iter().enumerate() {
            w.write_record([
                i.to_string(),
                r.input_tokens.to_string(),
                r.hit_tokens.to_string(),
                r.miss_tokens.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Replays prompts in order through a token radix cache.
pub fn simulate<S: AsRef<str>>(prompts: &[S], cfg: &CacheConfig) -> Result<SimReport> {
    simulate_with_tokenizer(prompts, cfg, cfg.tokenizer.build().as_ref())
}

pub fn simulate_with_tokenizer<S: AsRef<str>>(
    prompts: &[S],
    cfg: &CacheConfig,
    tok: &dyn Tokenizer,
) -> Result<SimReport> {
    cfg.validate()?;
    if prompts.is_empty() {
        return Err(Error::Domain("nothing to simulate: no prompts".into()));
    }
    let capacity = (cfg.capacity_tokens > 0).then_some(cfg.capacity_tokens);
    let evict = cfg.eviction == Eviction::Lru;

    let mut vocab: HashMap<&str, u32> = HashMap::new();
    let mut tree = RadixTree::new();
    let mut requests = Vec::with_capacity(prompts.len());
    for prompt in prompts {
        let tokens: Vec<u32> = tok
            .tokens(prompt.as_ref())
            .into_iter()
            .map(|t| {
                let next = vocab.len() as u32;
                *vocab.entry(t).or_insert(next)
            })
            .collect();
        let input = tokens.len() as u64;
        if capacity.is_some_and(|c| tokens.len() > c) {
            requests.push(RequestStats {
                input_tokens: input,
                hit_tokens: 0,
                miss_tokens: input,
                written_tokens: 0,
                uncacheable: true,
            });
            continue;
        }
        let (matched, written) = tree.insert(&tokens, capacity, evict);
        let hit = if matched >= cfg.min_cacheable_prefix_tokens { matched as u64 } else { 0 };
        requests.push(RequestStats {
            input_tokens: input,
            hit_tokens: hit,
            miss_tokens: input - hit,
            written_tokens: written as u64,
            uncacheable: false,
        });
    }
    Ok(SimReport::from_requests(cfg.clone(), requests, tree.evicted_tokens()))
}

/// Renders every schedule entry and replays the prompts.
pub fn phr_for_schedule(
    schedule: &RequestSchedule,
    t: &Table,
    system_prompt: &str,
    question: &str,
    cfg: &CacheConfig,
) -> Result<SimReport> {
    phr_for_schedule_with_tokenizer(schedule, t, system_prompt, question, cfg, cfg.tokenizer.build().as_ref())
}

pub fn phr_for_schedule_with_tokenizer(
    schedule: &RequestSchedule,
    t: &Table,
    system_prompt: &str,
    question: &str,
    cfg: &CacheConfig,
    tok: &dyn Tokenizer,
) -> Result<SimReport> {
    schedule.validate(t)?;
    let prompts = schedule.prompts(t, system_prompt, question);
    simulate_with_tokenizer(&prompts, cfg, tok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::CharTokenizer;

    #[test]
    fn duplicates_hit_fully() {
        let prompts = vec!["the same prompt"; 4];
        let r = simulate(&prompts, &CacheConfig::unbounded()).unwrap();
        assert_eq!(r.requests[0].hit_tokens, 0);
        assert!(r.requests[1..].iter().all(|q| q.hit_tokens == q.input_tokens));
        assert_eq!(r.phr, 0.75);
    }

    #[test]
    fn min_prefix_gates_credit_not_insertion() {
        let shared = "x".repeat(100);
        let prompts = [format!("{shared}a"), format!("{shared}b"), format!("{shared}b")];
        let r = simulate(&prompts, &CacheConfig::provider()).unwrap();
        assert_eq!(r.total_hit_tokens, 0);
        assert_eq!(r.phr, 0.0);
        assert_eq!(r.requests[2].written_tokens, 0);
    }

    #[test]
    fn oversized_prompt_is_uncacheable() {
        let r = simulate(&["abcdef", "abcdef", "abc"], &CacheConfig::lru(4)).unwrap();
        assert!(r.requests[0].uncacheable && r.requests[1].uncacheable);
        assert_eq!(r.requests[1].hit_tokens, 0);
        assert!(!r.requests[2].uncacheable);
        assert_eq!(r.total_written_tokens, 3);
    }

    #[test]
    fn unbounded_with_eviction_rejected() {
        let cfg = CacheConfig { eviction: Eviction::Lru, ..CacheConfig::default() };
        assert!(matches!(simulate(&["a"], &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn empty_input_rejected() {
        let none: [&str; 0] = [];
        assert!(simulate(&none, &CacheConfig::default()).is_err());
    }

    #[test]
    fn conservation_and_trace() {
        let r = simulate_with_tokenizer(&["abc", "abd", "xyz"], &CacheConfig::unbounded(), &CharTokenizer).unwrap();
        assert_eq!(r.total_hit_tokens + r.total_miss_tokens, r.total_input_tokens);
        let mut buf = Vec::new();
        r.write_trace_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "request_index,input,hit,miss\n0,3,0,3\n1,3,2,1\n2,3,0,3\n");
    }
}
