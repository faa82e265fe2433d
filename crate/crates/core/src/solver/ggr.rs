//! Greedy group recursion.
//!
//! Each step scores every (field, distinct value) group by its estimated hit
//! count, splits on the best one and recurses on the two sub-tables, just like
//! the exact solver but without backtracking. Fields that are FD-equivalent to
//! the chosen field ride along in the same block. Recursion stops at the
//! configured depths or when the best estimate falls under the threshold; the
//! residual sub-table then gets a fixed field order from column statistics and
//! is sorted row-wise.
//!
//! The hit-count estimate only ranks candidates. The reported score is always
//! the PHC of the emitted schedule.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{EncodedTable, SolveResult, SolveStats};
use crate::baseline::{order_by_score, StatsScore};
use crate::error::{Error, Result};
use crate::fd::{FdIndex, FunctionalDependencySet};
use crate::objective::phc;
use crate::render::fragment_len;
use crate::schedule::{RequestSchedule, ScheduleEntry};
use crate::stats::{ColumnStats, FieldStats};
use crate::table::Table;
use crate::tokenizer::{Tokenizer, TokenizerKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GgrConfig {
    /// Nested rows-without-value recursions before falling back; `None` is
    /// unlimited.
    pub row_recursion_depth: Option<usize>,
    /// Nested rows-with-value recursions before falling back.
    pub column_recursion_depth: Option<usize>,
    /// Fall back once the best group's estimate is below this.
    pub hitcount_stop_threshold: f64,
    pub use_fds: bool,
    pub tokenizer: TokenizerKind,
    /// Column score used by the statistics fallback.
    pub fallback_score: StatsScore,
}

impl Default for GgrConfig {
    fn default() -> Self {
        GgrConfig {
            row_recursion_depth: Some(4),
            column_recursion_depth: Some(2),
            hitcount_stop_threshold: 100_000.0,
            use_fds: true,
            tokenizer: TokenizerKind::Char,
            fallback_score: StatsScore::SquaredCardinality,
        }
    }
}

impl GgrConfig {
    /// The plain algorithm: no depth limits and no threshold.
    pub fn unlimited() -> Self {
        GgrConfig {
            row_recursion_depth: None,
            column_recursion_depth: None,
            hitcount_stop_threshold: 0.0,
            ..GgrConfig::default()
        }
    }
}

/// Estimated hit count of grouping the rows where field `c` equals `v`, and
/// the fields that would lead those rows: `c` followed by its FD-equivalents.
///
/// `(len(v)² + Σ_{c'} mean_{R_v} len(c')) × (|R_v| − 1)`
pub fn hitcount(
    v: &str,
    c: usize,
    t: &Table,
    fds: &FunctionalDependencySet,
    tok: &dyn Tokenizer,
) -> Result<(f64, Vec<usize>)> {
    if c >= t.num_fields() {
        return Err(Error::Bounds { index: c, len: t.num_fields() });
    }
    let rows: Vec<usize> = (0..t.num_rows()).filter(|&r| t.cell(r, c) == v).collect();
    if rows.is_empty() {
        return Err(Error::Domain(format!("value {v:?} does not occur in field `{}`", t.field_name(c))));
    }
    let index = fds.resolve(t)?;
    let inferred: Vec<usize> = index.equivalents(c).collect();
    let lead = fragment_len(tok, t.field_name(c), v) as f64;
    let mut tot_len = lead * lead;
    for &f in &inferred {
        let sum: u64 = rows.iter().map(|&r| fragment_len(tok, t.field_name(f), t.cell(r, f))).sum();
        tot_len += sum as f64 / rows.len() as f64;
    }
    let mut cols = vec![c];
    cols.extend(inferred);
    Ok((tot_len * (rows.len() as f64 - 1.0), cols))
}

struct Candidate {
    score: f64,
    count: usize,
    field: usize,
    value: u32,
    witness: usize,
    cols: Vec<usize>,
}

struct Ggr<'a, 't> {
    enc: &'a EncodedTable<'t>,
    fds: Option<FdIndex>,
    cfg: &'a GgrConfig,
    stats: SolveStats,
}

impl Ggr<'_, '_> {
    fn better(&self, a: &Candidate, b: &Candidate) -> bool {
        use std::cmp::Ordering::*;
        match a.score.total_cmp(&b.score) {
            Greater => return true,
            Less => return false,
            Equal => {}
        }
        match a.count.cmp(&b.count) {
            Greater => return true,
            Less => return false,
            Equal => {}
        }
        match b.field.cmp(&a.field) {
            Greater => return true,
            Less => return false,
            Equal => {}
        }
        self.enc.value_cmp(a.field, a.witness, b.witness) == Less
    }

    /// Active FD-equivalents of `field`, ascending.
    fn active_equivalents(&self, field: usize, active: &[usize]) -> Vec<usize> {
        match &self.fds {
            Some(idx) => idx.equivalents(field).filter(|f| active.contains(f)).collect(),
            None => Vec::new(),
        }
    }

    fn best_candidate(&mut self, rows: &[usize], fields: &[usize]) -> Option<Candidate> {
        let mut best: Option<Candidate> = None;
        for &field in fields {
            let members = self.active_equivalents(field, fields);
            // With FDs, one member scans for the whole equivalence class;
            // every member partitions the rows identically.
            if members.iter().any(|&f| f < field) {
                continue;
            }
            let mut groups: HashMap<u32, Vec<usize>> = HashMap::new();
            for &r in rows {
                groups.entry(self.enc.id(r, field)).or_default().push(r);
            }
            for (value, group) in groups {
                self.stats.candidates_examined += 1;
                let count = group.len();
                let cand = if members.is_empty() {
                    let len = self.enc.len(group[0], field) as f64;
                    Candidate {
                        score: len * len * (count as f64 - 1.0),
                        count,
                        field,
                        value,
                        witness: group[0],
                        cols: vec![field],
                    }
                } else {
                    self.class_candidate(field, value, &members, &group)
                };
                if best.as_ref().is_none_or(|b| self.better(&cand, b)) {
                    best = Some(cand);
                }
            }
        }
        best
    }

    // Scores the class as led by whichever member gives the largest estimate,
    // i.e. the member with the longest mean fragment over the group.
    fn class_candidate(&self, field: usize, value: u32, members: &[usize], group: &[usize]) -> Candidate {
        let count = group.len();
        let mut class: Vec<usize> = Vec::with_capacity(members.len() + 1);
        class.push(field);
        class.extend_from_slice(members);
        class.sort_unstable();
        let means: Vec<f64> = class
            .iter()
            .map(|&f| group.iter().map(|&r| self.enc.len(r, f)).sum::<u64>() as f64 / count as f64)
            .collect();
        let mut lead_pos = 0;
        for (i, m) in means.iter().enumerate() {
            if *m > means[lead_pos] {
                lead_pos = i;
            }
        }
        let lead = class[lead_pos];
        let tot_len = means[lead_pos] * means[lead_pos]
            + means.iter().enumerate().filter(|&(i, _)| i != lead_pos).map(|(_, m)| m).sum::<f64>();
        let mut cols = vec![lead];
        cols.extend(class.iter().copied().filter(|&f| f != lead));
        Candidate {
            score: tot_len * (count as f64 - 1.0),
            count,
            field: lead,
            value: if lead == field { value } else { self.enc.id(group[0], lead) },
            witness: group[0],
            cols,
        }
    }

    fn fallback(&mut self, rows: &[usize], fields: &[usize]) -> Vec<ScheduleEntry> {
        self.stats.fallbacks += 1;
        let n = rows.len();
        let stats = ColumnStats {
            total_rows: n,
            fields: fields
                .iter()
                .map(|&f| {
                    let mut seen: HashMap<u32, ()> = HashMap::new();
                    let mut total = 0u64;
                    for &r in rows {
                        seen.insert(self.enc.id(r, f), ());
                        total += self.enc.len(r, f);
                    }
                    FieldStats {
                        field: self.enc.table.field_name(f).to_owned(),
                        cardinality: seen.len(),
                        avg_len: total as f64 / n.max(1) as f64,
                    }
                })
                .collect(),
        };
        let order: Vec<usize> = order_by_score(&stats, self.cfg.fallback_score)
            .into_iter()
            .map(|i| fields[i])
            .collect();
        let mut sorted = rows.to_vec();
        self.enc.sort_rows(&mut sorted, &order);
        sorted.into_iter().map(|r| ScheduleEntry::new(r, order.clone())).collect()
    }

    fn solve(&mut self, rows: &[usize], fields: &[usize], row_depth: usize, col_depth: usize) -> Vec<ScheduleEntry> {
        self.stats.recursive_calls += 1;
        self.stats.max_depth = self.stats.max_depth.max(row_depth + col_depth);
        self.stats.max_row_depth = self.stats.max_row_depth.max(row_depth);
        self.stats.max_column_depth = self.stats.max_column_depth.max(col_depth);

        match (rows.len(), fields.len()) {
            (0, _) => return Vec::new(),
            (1, _) => return vec![ScheduleEntry::new(rows[0], fields.to_vec())],
            (_, 0) => return rows.iter().map(|&r| ScheduleEntry::new(r, Vec::new())).collect(),
            (_, 1) => return self.enc.single_field(rows, fields[0]).1,
            _ => {}
        }
        let too_deep = self.cfg.row_recursion_depth.is_some_and(|d| row_depth > d)
            || self.cfg.column_recursion_depth.is_some_and(|d| col_depth > d);
        if too_deep {
            return self.fallback(rows, fields);
        }

        let best = self.best_candidate(rows, fields).expect("non-empty sub-table has a candidate");
        // A zero estimate means no value repeats with positive length, so no
        // ordering can score; the fallback is as good and cheaper.
        if best.score <= 0.0 || best.score < self.cfg.hitcount_stop_threshold {
            return self.fallback(rows, fields);
        }

        let (with, without): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| self.enc.id(r, best.field) == best.value);
        let rest: Vec<usize> = fields.iter().copied().filter(|f| !best.cols.contains(f)).collect();

        let mut out: Vec<ScheduleEntry> = self
            .solve(&with, &rest, row_depth, col_depth + 1)
            .into_iter()
            .map(|e| {
                let mut order = best.cols.clone();
                order.extend(e.field_order);
                ScheduleEntry::new(e.row_id, order)
            })
            .collect();
        out.extend(self.solve(&without, fields, row_depth + 1, col_depth));
        out
    }
}

pub fn ggr(t: &Table, fds: &FunctionalDependencySet, cfg: &GgrConfig) -> Result<SolveResult> {
    ggr_with_tokenizer(t, fds, cfg, cfg.tokenizer.build().as_ref())
}

/// Runs the greedy recursion with an explicit tokenizer (ignoring
/// `cfg.tokenizer`). FD groups are trusted as given; validate them first.
pub fn ggr_with_tokenizer(
    t: &Table,
    fds: &FunctionalDependencySet,
    cfg: &GgrConfig,
    tok: &dyn Tokenizer,
) -> Result<SolveResult> {
    let start = Instant::now();
    let fd_index = if cfg.use_fds && !fds.is_empty() { Some(fds.resolve(t)?) } else { None };
    let enc = EncodedTable::new(t, tok);
    let mut solver = Ggr { enc: &enc, fds: fd_index, cfg, stats: SolveStats::default() };
    let rows: Vec<usize> = (0..t.num_rows()).collect();
    let fields: Vec<usize> = (0..t.num_fields()).collect();
    let mut schedule = RequestSchedule::new(solver.solve(&rows, &fields, 0, 0));
    let mut phc_score = phc(&schedule, t, tok);
    // Greedy splits can lose to plain sorting; never return less than the
    // fallback ordering of the whole table.
    let fallbacks = solver.stats.fallbacks;
    let sorted = RequestSchedule::new(solver.fallback(&rows, &fields));
    solver.stats.fallbacks = fallbacks;
    let sorted_score = phc(&sorted, t, tok);
    if sorted_score > phc_score {
        schedule = sorted;
        phc_score = sorted_score;
    }
    let mut stats = solver.stats;
    stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(SolveResult { phc_score, schedule, stats, optimal: false })
}
