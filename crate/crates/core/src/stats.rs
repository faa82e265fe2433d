use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::render::fragment_len;
use crate::table::Table;
use crate::tokenizer::Tokenizer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub field: String,
    /// Number of distinct values.
    pub cardinality: usize,
    /// Mean token length of the rendered fragment over all rows.
    pub avg_len: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub total_rows: usize,
    pub fields: Vec<FieldStats>,
}

pub fn compute_stats(t: &Table, tok: &dyn Tokenizer) -> ColumnStats {
    let n = t.num_rows();
    let fields = t
        .field_names()
        .iter()
        .enumerate()
        .map(|(f, name)| {
            let mut distinct = HashSet::new();
            let mut total = 0u64;
            for value in t.column(f) {
                distinct.insert(value);
                total += fragment_len(tok, name, value);
            }
            FieldStats {
                field: name.clone(),
                cardinality: distinct.len(),
                avg_len: if n == 0 { 0.0 } else { total as f64 / n as f64 },
            }
        })
        .collect();
    ColumnStats { total_rows: n, fields }
}
