//! Fixed field orderings derived from column statistics, and lexicographic
//! row sorting under a fixed order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::render::fragment;
use crate::schedule::{RequestSchedule, ScheduleEntry};
use crate::stats::{ColumnStats, FieldStats};
use crate::table::Table;

/// How a column is scored when fields are ranked from statistics alone.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatsScore {
    /// `avg_len² × (n / cardinality − 1)`
    #[default]
    SquaredCardinality,
    /// `avg_len²`
    Squared,
    /// `avg_len × n / cardinality`
    LengthOverCardinality,
}

impl StatsScore {
    pub fn score(self, f: &FieldStats, n: usize) -> f64 {
        let card = f.cardinality.max(1) as f64;
        let n = n as f64;
        match self {
            StatsScore::SquaredCardinality => f.avg_len * f.avg_len * (n / card - 1.0),
            StatsScore::Squared => f.avg_len * f.avg_len,
            StatsScore::LengthOverCardinality => f.avg_len * n / card,
        }
    }
}

impl std::str::FromStr for StatsScore {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "squared-cardinality" => Ok(StatsScore::SquaredCardinality),
            "squared" => Ok(StatsScore::Squared),
            "length-over-cardinality" => Ok(StatsScore::LengthOverCardinality),
            other => Err(format!("unknown stats score `{other}`")),
        }
    }
}

/// Field indices sorted by descending score; ties keep schema order.
pub fn order_by_score(stats: &ColumnStats, score: StatsScore) -> Vec<usize> {
    let scores: Vec<f64> = stats.fields.iter().map(|f| score.score(f, stats.total_rows)).collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Ranks fields by `avg_len × n / cardinality`: longer and more frequently
/// repeated values first.
pub fn fixed_order_by_stats(stats: &ColumnStats) -> Vec<usize> {
    order_by_score(stats, StatsScore::LengthOverCardinality)
}

/// Ranks fields by `avg_len² × (n / cardinality − 1)`, the expected PHC
/// contribution of leading with the field.
pub fn fixed_order_by_hitcount_stats(stats: &ColumnStats) -> Vec<usize> {
    order_by_score(stats, StatsScore::SquaredCardinality)
}

/// Applies `field_order` to every row and sorts rows by the byte order of
/// their concatenated fragments. Ties keep row-id order.
pub fn sort_rows_fixed_order(t: &Table, field_order: &[usize]) -> Result<RequestSchedule> {
    let mut seen = vec![false; t.num_fields()];
    for &f in field_order {
        if f >= t.num_fields() || std::mem::replace(&mut seen[f], true) {
            return Err(Error::Schema(format!("{field_order:?} is not a permutation of the table's fields")));
        }
    }
    if field_order.len() != t.num_fields() {
        return Err(Error::Schema(format!(
            "field order covers {} of {} fields",
            field_order.len(),
            t.num_fields()
        )));
    }
    let rows: Vec<usize> = (0..t.num_rows()).collect();
    let sorted = sort_rows_by_fragments(t, &rows, field_order);
    Ok(RequestSchedule::new(
        sorted.into_iter().map(|r| ScheduleEntry::new(r, field_order.to_vec())).collect(),
    ))
}

/// Stable sort of `rows` by their concatenated fragments under `field_order`.
pub(crate) fn sort_rows_by_fragments(t: &Table, rows: &[usize], field_order: &[usize]) -> Vec<usize> {
    let mut keyed: Vec<(String, usize)> = rows
        .iter()
        .map(|&r| {
            let key: String = field_order
                .iter()
                .map(|&f| fragment(t.field_name(f), t.cell(r, f)))
                .collect();
            (key, r)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
    keyed.into_iter().map(|(_, r)| r).collect()
}
