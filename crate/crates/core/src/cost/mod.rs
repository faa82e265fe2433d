//! Dollar estimates under prompt-caching prices, deduplication and
//! LLM-aware filter ordering.

mod dedup;
mod filter;
mod pricing;

pub use dedup::{dedup, Dedup};
pub use filter::{expected_cost, plan_filter_order, Predicate};
pub use pricing::{PricingModel, WritePolicy};

use serde::{Deserialize, Serialize};

use crate::cache::SimReport;
use crate::error::{Error, Result};

/// Output tokens generated per request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OutputTokens {
    /// The same (possibly fractional, e.g. a dataset average) count for
    /// every request.
    Uniform(f64),
    PerRequest(Vec<f64>),
}

impl OutputTokens {
    pub fn none() -> Self {
        OutputTokens::Uniform(0.0)
    }

    fn total(&self, requests: usize) -> Result<f64> {
        let check = |x: f64| {
            if x.is_finite() && x >= 0.0 {
                Ok(x)
            } else {
                Err(Error::Domain(format!("output token count {x} must be finite and >= 0")))
            }
        };
        match self {
            OutputTokens::Uniform(x) => Ok(check(*x)? * requests as f64),
            OutputTokens::PerRequest(v) => {
                if v.len() != requests {
                    return Err(Error::Domain(format!(
                        "{} output counts for {requests} requests",
                        v.len()
                    )));
                }
                v.iter().try_fold(0.0, |acc, &x| Ok(acc + check(x)?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub pricing: String,
    pub input_tokens: u64,
    pub output_tokens: f64,
    pub hit_tokens: u64,
    pub miss_tokens: u64,
    pub write_tokens: u64,
    pub dollars: f64,
    /// Cost of the same workload with no cache hits at all.
    pub uncached_dollars: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub savings_vs_baseline: Option<f64>,
}

fn write_tokens(sim: &SimReport, p: &PricingModel) -> u64 {
    match p.write_policy {
        WritePolicy::None => 0,
        WritePolicy::FirstMissWritesAllMisses => {
            sim.requests.iter().filter(|r| !r.uncacheable).map(|r| r.miss_tokens).sum()
        }
        WritePolicy::FirstPrefixOnly => sim
            .requests
            .iter()
            .filter(|r| !r.uncacheable)
            .map(|r| r.input_tokens.min(p.min_cacheable_prefix_tokens as u64).saturating_sub(r.hit_tokens))
            .sum(),
    }
}

/// `[miss × uncached + hit × cached_read + writes × write_premium + out × output] / 10⁶`
pub fn estimate_cost(sim: &SimReport, output: &OutputTokens, p: &PricingModel) -> Result<CostReport> {
    p.validate()?;
    let out = output.total(sim.requests.len())?;
    let hits = sim.total_hit_tokens;
    let misses = sim.total_miss_tokens;
    let writes = write_tokens(sim, p);
    let dollars = (misses as f64 * p.uncached_input
        + hits as f64 * p.cached_read
        + writes as f64 * p.write_premium()
        + out * p.output)
        / 1e6;
    let uncached_dollars = (sim.total_input_tokens as f64 * p.uncached_input + out * p.output) / 1e6;
    Ok(CostReport {
        pricing: p.name.clone(),
        input_tokens: sim.total_input_tokens,
        output_tokens: out,
        hit_tokens: hits,
        miss_tokens: misses,
        write_tokens: writes,
        dollars,
        uncached_dollars,
        savings_vs_baseline: None,
    })
}

/// Fractional saving of `candidate` relative to `baseline`.
pub fn savings(candidate: &CostReport, baseline: &CostReport) -> Result<f64> {
    if candidate.pricing != baseline.pricing {
        return Err(Error::Domain(format!(
            "cannot compare costs under `{}` and `{}`",
            candidate.pricing, baseline.pricing
        )));
    }
    if baseline.dollars == 0.0 {
        return Err(Error::Domain("baseline cost is zero; savings ratio is undefined".into()));
    }
    Ok((baseline.dollars - candidate.dollars) / baseline.dollars)
}
