//! Filter ordering under independent selectivities.
//!
//! Running predicates in order `1..k` costs `Σ cost_i × Π_{j<i} sel_j` per
//! input row. Swapping neighbours shows `i` belongs before `j` exactly when
//! `cost_i × (1 − sel_j) ≤ cost_j × (1 − sel_i)`, so sorting by
//! `cost / (1 − sel)` is optimal. Expensive LLM predicates therefore land
//! after cheap selective ones.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    #[serde(default)]
    pub name: String,
    /// Fraction of rows that pass.
    pub selectivity: f64,
    pub per_row_cost: f64,
}

impl Predicate {
    pub fn new(name: impl Into<String>, selectivity: f64, per_row_cost: f64) -> Self {
        Predicate { name: name.into(), selectivity, per_row_cost }
    }

    fn rank(&self) -> f64 {
        if self.per_row_cost == 0.0 {
            0.0
        } else if self.selectivity >= 1.0 {
            f64::INFINITY
        } else {
            self.per_row_cost / (1.0 - self.selectivity)
        }
    }
}

/// Expected per-row cost of running `preds` in `order`.
pub fn expected_cost(preds: &[Predicate], order: &[usize]) -> f64 {
    let mut pass = 1.0;
    let mut total = 0.0;
    for &i in order {
        total += preds[i].per_row_cost * pass;
        pass *= preds[i].selectivity;
    }
    total
}

/// Cost-minimizing execution order; ties keep input order.
pub fn plan_filter_order(preds: &[Predicate]) -> Result<Vec<usize>> {
    for p in preds {
        if !(0.0..=1.0).contains(&p.selectivity) {
            return Err(Error::Domain(format!("predicate `{}`: selectivity {} outside [0, 1]", p.name, p.selectivity)));
        }
        if !(p.per_row_cost >= 0.0 && p.per_row_cost.is_finite()) {
            return Err(Error::Domain(format!("predicate `{}`: cost {} must be finite and >= 0", p.name, p.per_row_cost)));
        }
    }
    let mut order: Vec<usize> = (0..preds.len()).collect();
    order.sort_by(|&a, &b| preds[a].rank().total_cmp(&preds[b].rank()));
    Ok(order)
}
