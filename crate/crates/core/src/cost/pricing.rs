use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How many input tokens are billed as cache writes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WritePolicy {
    /// Every missed token of a cacheable request is written.
    #[default]
    FirstMissWritesAllMisses,
    /// Only the uncached part of the first `min_cacheable_prefix_tokens`
    /// tokens of each request is written.
    #[serde(rename = "first-1024-only", alias = "first-prefix-only")]
    FirstPrefixOnly,
    None,
}

impl std::str::FromStr for WritePolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "first-miss-writes-all-misses" | "all-misses" => Ok(WritePolicy::FirstMissWritesAllMisses),
            "first-1024-only" | "first-prefix-only" => Ok(WritePolicy::FirstPrefixOnly),
            "none" => Ok(WritePolicy::None),
            other => Err(format!("unknown write policy `{other}`")),
        }
    }
}

/// Prices in dollars per million tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingModel {
    pub name: String,
    pub uncached_input: f64,
    pub cached_read: f64,
    /// Price of writing a token into the cache. Only the premium over
    /// `uncached_input` is charged on top of the miss.
    #[serde(default)]
    pub cache_write: Option<f64>,
    #[serde(default)]
    pub output: f64,
    #[serde(default, alias = "min_prefix")]
    pub min_cacheable_prefix_tokens: usize,
    #[serde(default)]
    pub write_policy: WritePolicy,
}

impl PricingModel {
    pub fn gpt_4o_mini() -> Self {
        PricingModel {
            name: "gpt-4o-mini".into(),
            uncached_input: 0.15,
            cached_read: 0.075,
            cache_write: None,
            output: 0.60,
            min_cacheable_prefix_tokens: 1024,
            write_policy: WritePolicy::FirstMissWritesAllMisses,
        }
    }

    pub fn claude_3_5_sonnet() -> Self {
        PricingModel {
            name: "claude-3.5-sonnet".into(),
            uncached_input: 3.00,
            cached_read: 0.30,
            cache_write: Some(3.75),
            output: 15.00,
            min_cacheable_prefix_tokens: 1024,
            write_policy: WritePolicy::FirstMissWritesAllMisses,
        }
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["gpt-4o-mini", "claude-3.5-sonnet"]
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "gpt-4o-mini" | "openai" => Ok(Self::gpt_4o_mini()),
            "claude-3.5-sonnet" | "anthropic" => Ok(Self::claude_3_5_sonnet()),
            other => Err(Error::Domain(format!(
                "unknown pricing model `{other}` (built-ins: {})",
                Self::builtin_names().join(", ")
            ))),
        }
    }

    pub fn from_json_reader<R: Read>(r: R) -> Result<Self> {
        let p: PricingModel = serde_json::from_reader(r)?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let prices = [self.uncached_input, self.cached_read, self.cache_write.unwrap_or(0.0), self.output];
        if prices.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Domain(format!("pricing `{}` has a negative or non-finite price", self.name)));
        }
        if self.cached_read > self.uncached_input {
            return Err(Error::Domain(format!(
                "pricing `{}`: cached read {} exceeds uncached input {}",
                self.name, self.cached_read, self.uncached_input
            )));
        }
        Ok(())
    }

    /// Per-million premium of a cache write over a plain uncached token.
    pub fn write_premium(&self) -> f64 {
        self.cache_write.map_or(0.0, |w| (w - self.uncached_input).max(0.0))
    }
}
