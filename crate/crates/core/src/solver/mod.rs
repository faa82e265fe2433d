//! Reordering solvers: exact recursion, brute-force enumeration and the
//! greedy group recursion.

mod brute;
mod ggr;
mod ophr;

pub use brute::{brute_force_max, BRUTE_MAX_FIELDS, BRUTE_MAX_ROWS};
pub use ggr::{ggr, ggr_with_tokenizer, hitcount, GgrConfig};
pub use ophr::{ophr, OphrLimits};

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::render::fragment;
use crate::schedule::{RequestSchedule, ScheduleEntry};
use crate::table::Table;
use crate::tokenizer::Tokenizer;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub recursive_calls: u64,
    /// (field, value) split candidates evaluated.
    pub candidates_examined: u64,
    /// Deepest nesting of recursive calls below the root.
    pub max_depth: usize,
    /// Deepest chain of row-wise (rows-without-value) recursions.
    pub max_row_depth: usize,
    /// Deepest chain of column-wise (rows-with-value) recursions.
    pub max_column_depth: usize,
    /// Sub-tables ordered by the statistics fallback.
    pub fallbacks: u64,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub phc_score: u64,
    #[serde(skip)]
    pub schedule: RequestSchedule,
    pub stats: SolveStats,
    /// False when the result is known not to be a proven optimum (greedy
    /// solvers, or an exact solver that ran out of time).
    pub optimal: bool,
}

/// Per-column value ids and fragment lengths.
///
/// Ids within a column follow the byte order of the rendered fragments, so
/// comparing rows id-by-id under a field order is the same as comparing
/// their concatenated fragments byte-wise.
pub(crate) struct EncodedTable<'t> {
    pub table: &'t Table,
    /// `ids[field][row]`
    pub ids: Vec<Vec<u32>>,
    /// `value_len[field][id]`: token length of the fragment.
    pub value_len: Vec<Vec<u64>>,
}

impl<'t> EncodedTable<'t> {
    pub fn new(table: &'t Table, tok: &dyn Tokenizer) -> Self {
        let mut ids = Vec::with_capacity(table.num_fields());
        let mut value_len = Vec::with_capacity(table.num_fields());
        for f in 0..table.num_fields() {
            let name = table.field_name(f);
            let mut first: HashMap<&str, usize> = HashMap::new();
            for (r, v) in table.column(f).enumerate() {
                first.entry(v).or_insert(r);
            }
            let mut distinct: Vec<(String, &str)> =
                first.keys().map(|v| (fragment(name, v), *v)).collect();
            distinct.sort_unstable_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
            let index: HashMap<&str, u32> =
                distinct.iter().enumerate().map(|(i, (_, v))| (*v, i as u32)).collect();
            ids.push(table.column(f).map(|v| index[v]).collect());
            value_len.push(distinct.iter().map(|(frag, _)| tok.count(frag) as u64).collect());
        }
        EncodedTable { table, ids, value_len }
    }

    #[inline]
    pub fn id(&self, row: usize, field: usize) -> u32 {
        self.ids[field][row]
    }

    #[inline]
    pub fn len(&self, row: usize, field: usize) -> u64 {
        self.value_len[field][self.ids[field][row] as usize]
    }

    /// Orders `(field, row)` candidates by raw cell bytes.
    pub fn value_cmp(&self, field: usize, a_row: usize, b_row: usize) -> Ordering {
        self.table.cell(a_row, field).as_bytes().cmp(self.table.cell(b_row, field).as_bytes())
    }

    /// Stable sort of rows by value ids under `field_order`.
    pub fn sort_rows(&self, rows: &mut [usize], field_order: &[usize]) {
        rows.sort_by(|&a, &b| {
            field_order
                .iter()
                .map(|&f| self.id(a, f).cmp(&self.id(b, f)))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        });
    }

    /// Single-field base case: rows grouped by value, scoring
    /// `Σ len(v)² × (count(v) − 1)`.
    pub fn single_field(&self, rows: &[usize], field: usize) -> (u64, Vec<ScheduleEntry>) {
        let mut sorted = rows.to_vec();
        self.sort_rows(&mut sorted, &[field]);
        let score = sorted
            .windows(2)
            .filter(|w| self.id(w[0], field) == self.id(w[1], field))
            .map(|w| self.len(w[1], field).pow(2))
            .sum();
        let entries = sorted.into_iter().map(|r| ScheduleEntry::new(r, vec![field])).collect();
        (score, entries)
    }
}
