//! Exact prefix-hit maximization by exhaustive group splitting.
//!
//! For every field `c` and distinct value `v`, the table splits into the rows
//! holding `v` (with `c` removed) and the remaining rows. The rows holding `v`
//! are emitted as one contiguous block, each led by `v`'s fragment, so the
//! block earns `len(v)² × (|R_v| − 1)` on top of both sub-solutions. The best
//! split over all `(c, v)` is optimal by induction on table size.
//!
//! Sub-tables are memoized on their content (sorted row multiset plus the
//! active field set), which does not change results.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{EncodedTable, SolveResult, SolveStats};
use crate::error::{Error, Result};
use crate::objective::phc;
use crate::schedule::{RequestSchedule, ScheduleEntry};
use crate::table::Table;
use crate::tokenizer::Tokenizer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OphrLimits {
    pub max_rows: usize,
    pub max_fields: usize,
    pub time_budget: Option<Duration>,
    /// Ignore `max_rows` / `max_fields`.
    pub force: bool,
}

impl Default for OphrLimits {
    fn default() -> Self {
        OphrLimits { max_rows: 12, max_fields: 5, time_budget: None, force: false }
    }
}

type Mask = u64;
type MemoKey = (Mask, Vec<Vec<u32>>);

#[derive(Clone, Copy)]
struct Choice {
    field: usize,
    value: u32,
}

struct Ophr<'a, 't> {
    enc: &'a EncodedTable<'t>,
    memo: HashMap<MemoKey, (u64, Option<Choice>)>,
    stats: SolveStats,
    deadline: Option<Instant>,
    timed_out: bool,
}

fn fields_of(mask: Mask) -> impl Iterator<Item = usize> {
    (0..Mask::BITS as usize).filter(move |f| mask & (1 << f) != 0)
}

impl Ophr<'_, '_> {
    fn key(&self, rows: &[usize], mask: Mask) -> MemoKey {
        let fields: Vec<usize> = fields_of(mask).collect();
        let mut content: Vec<Vec<u32>> = rows
            .iter()
            .map(|&r| fields.iter().map(|&f| self.enc.id(r, f)).collect())
            .collect();
        content.sort_unstable();
        (mask, content)
    }

    fn out_of_time(&mut self) -> bool {
        if !self.timed_out && let Some(d) = self.deadline {
            self.timed_out = Instant::now() >= d;
        }
        self.timed_out
    }

    fn solve(&mut self, rows: &[usize], mask: Mask, depth: usize) -> u64 {
        self.stats.recursive_calls += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);
        if rows.len() <= 1 || mask == 0 {
            return 0;
        }
        if mask.count_ones() == 1 {
            return self.enc.single_field(rows, mask.trailing_zeros() as usize).0;
        }
        let key = self.key(rows, mask);
        if let Some(&(score, _)) = self.memo.get(&key) {
            return score;
        }

        let mut best: Option<(u64, Choice, usize)> = None;
        'fields: for field in fields_of(mask) {
            let mut values: Vec<(u32, usize)> = Vec::new();
            for &r in rows {
                let id = self.enc.id(r, field);
                if !values.iter().any(|&(v, _)| v == id) {
                    values.push((id, r));
                }
            }
            // ties resolve to the lexicographically smallest raw value
            values.sort_by(|a, b| self.enc.value_cmp(field, a.1, b.1));
            for (value, witness) in values {
                // After the deadline, settle for the first candidate at
                // every node not yet explored so the result stays complete.
                if best.is_some() && self.out_of_time() {
                    break 'fields;
                }
                self.stats.candidates_examined += 1;
                let (with, without): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&r| self.enc.id(r, field) == value);
                let lead = self.enc.len(witness, field);
                let score = lead * lead * (with.len() as u64 - 1)
                    + self.solve(&with, mask & !(1 << field), depth + 1)
                    + self.solve(&without, mask, depth + 1);
                if best.is_none_or(|(s, _, _)| score > s) {
                    best = Some((score, Choice { field, value }, witness));
                }
            }
        }
        let (score, choice, _) = best.expect("a table with rows and fields has a candidate");
        self.memo.insert(key, (score, Some(choice)));
        score
    }

    fn emit(&self, rows: &[usize], mask: Mask) -> Vec<ScheduleEntry> {
        if rows.is_empty() {
            return Vec::new();
        }
        if rows.len() == 1 {
            return vec![ScheduleEntry::new(rows[0], fields_of(mask).collect())];
        }
        if mask == 0 {
            return rows.iter().map(|&r| ScheduleEntry::new(r, Vec::new())).collect();
        }
        if mask.count_ones() == 1 {
            return self.enc.single_field(rows, mask.trailing_zeros() as usize).1;
        }
        let (_, choice) = self.memo[&self.key(rows, mask)];
        let Choice { field, value } = choice.expect("recursive nodes record their split");
        let (with, without): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| self.enc.id(r, field) == value);
        let mut out: Vec<ScheduleEntry> = self
            .emit(&with, mask & !(1 << field))
            .into_iter()
            .map(|mut e| {
                e.field_order.insert(0, field);
                e
            })
            .collect();
        out.extend(self.emit(&without, mask));
        out
    }
}

/// Exact maximum-PHC schedule. Exponential; refuses tables beyond `limits`
/// unless forced. When the time budget runs out the best complete schedule
/// found is returned inside [`Error::TimeBudget`].
pub fn ophr(t: &Table, tok: &dyn Tokenizer, limits: &OphrLimits) -> Result<SolveResult> {
    let (n, m) = (t.num_rows(), t.num_fields());
    if !limits.force && (n > limits.max_rows || m > limits.max_fields) {
        return Err(Error::Size(format!(
            "exact solver is limited to {} rows x {} fields, table is {n} x {m}; pass force to override",
            limits.max_rows, limits.max_fields
        )));
    }
    if m > Mask::BITS as usize {
        return Err(Error::Size(format!("exact solver supports at most {} fields, table has {m}", Mask::BITS)));
    }

    let start = Instant::now();
    let enc = EncodedTable::new(t, tok);
    let mut solver = Ophr {
        enc: &enc,
        memo: HashMap::new(),
        stats: SolveStats::default(),
        deadline: limits.time_budget.map(|b| start + b),
        timed_out: false,
    };
    let rows: Vec<usize> = (0..n).collect();
    let mask: Mask = if m == 64 { Mask::MAX } else { (1 << m) - 1 };
    let score = solver.solve(&rows, mask, 0);
    let schedule = RequestSchedule::new(solver.emit(&rows, mask));
    debug_assert_eq!(phc(&schedule, t, tok), score);

    let mut stats = solver.stats;
    stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let result = SolveResult { phc_score: score, schedule, stats, optimal: !solver.timed_out };
    if solver.timed_out {
        Err(Error::TimeBudget(Box::new(result)))
    } else {
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::CharTokenizer;

    fn solve(t: &Table) -> SolveResult {
        ophr(t, &CharTokenizer, &OphrLimits::default()).unwrap()
    }

    #[test]
    fn one_row_scores_zero() {
        let t = Table::from_rows(&["a", "b"], &[&["1", "2"]]).unwrap();
        let r = solve(&t);
        assert_eq!(r.phc_score, 0);
        assert_eq!(r.schedule.entries, vec![ScheduleEntry::new(0, vec![0, 1])]);
    }

    #[test]
    fn constants_lead_every_row() {
        let t = Table::from_rows(
            &["id", "k1", "k2"],
            &[&["1", "c", "d"], &["2", "c", "d"], &["3", "c", "d"], &["4", "c", "d"]],
        )
        .unwrap();
        let r = solve(&t);
        // two shared 11-char fragments across three adjacencies
        assert_eq!(r.phc_score, 3 * 2 * 121);
        assert!(r.schedule.entries.iter().all(|e| e.field_order[2] == 0));
        assert_eq!(phc(&r.schedule, &t, &CharTokenizer), r.phc_score);
        assert!(r.optimal);
    }

    #[test]
    fn refuses_large_tables_unless_forced() {
        let rows: Vec<Vec<String>> = (0..20).map(|i| vec![(i % 3).to_string()]).collect();
        let t = Table::new(vec!["a".into()], rows).unwrap();
        assert!(matches!(ophr(&t, &CharTokenizer, &OphrLimits::default()), Err(Error::Size(_))));
        let forced = OphrLimits { force: true, ..OphrLimits::default() };
        let r = ophr(&t, &CharTokenizer, &forced).unwrap();
        assert_eq!(r.phc_score, 17 * 100);
    }

    #[test]
    fn zero_budget_returns_complete_non_optimal_candidate() {
        let rows: Vec<Vec<String>> = (0..10)
            .map(|i| (0..4).map(|f| ((i * (f + 1)) % 3).to_string()).collect())
            .collect();
        let t = Table::new(vec!["a".into(), "b".into(), "c".into(), "d".into()], rows).unwrap();
        let limits = OphrLimits { time_budget: Some(Duration::ZERO), ..OphrLimits::default() };
        match ophr(&t, &CharTokenizer, &limits) {
            Err(Error::TimeBudget(partial)) => {
                assert!(!partial.optimal);
                partial.schedule.validate_complete(&t).unwrap();
                assert_eq!(phc(&partial.schedule, &t, &CharTokenizer), partial.phc_score);
                let exact = solve(&t);
                assert!(partial.phc_score <= exact.phc_score);
            }
            other => panic!("expected a time-budget error, got {other:?}"),
        }
    }
}
