use std::time::Instant;

use super::{SolveResult, SolveStats};
use crate::error::{Error, Result};
use crate::render::fragment_len;
use crate::schedule::{RequestSchedule, ScheduleEntry};
use crate::table::Table;
use crate::tokenizer::Tokenizer;

pub const BRUTE_MAX_ROWS: usize = 5;
pub const BRUTE_MAX_FIELDS: usize = 3;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Enumerates every row order times every per-row field permutation and
/// keeps the first schedule with the highest PHC.
pub fn brute_force_max(t: &Table, tok: &dyn Tokenizer) -> Result<SolveResult> {
    let (n, m) = (t.num_rows(), t.num_fields());
    if n > BRUTE_MAX_ROWS || m > BRUTE_MAX_FIELDS {
        return Err(Error::Size(format!(
            "brute force is limited to {BRUTE_MAX_ROWS} rows x {BRUTE_MAX_FIELDS} fields, table is {n} x {m}"
        )));
    }
    let start = Instant::now();
    let lens: Vec<Vec<u64>> = (0..n)
        .map(|r| (0..m).map(|f| fragment_len(tok, t.field_name(f), t.cell(r, f))).collect())
        .collect();
    let row_perms = permutations(n);
    let field_perms = permutations(m);

    let score_of = |rows: &[usize], choice: &[usize]| -> u64 {
        let mut total = 0;
        for i in 1..rows.len() {
            let (a, b) = (rows[i - 1], rows[i]);
            let (pa, pb) = (&field_perms[choice[i - 1]], &field_perms[choice[i]]);
            for (&fa, &fb) in pa.iter().zip(pb) {
                if fa != fb || t.cell(a, fa) != t.cell(b, fb) {
                    break;
                }
                total += lens[b][fb] * lens[b][fb];
            }
        }
        total
    };

    let mut stats = SolveStats::default();
    let mut best: Option<(u64, Vec<usize>, Vec<usize>)> = None;
    for rows in &row_perms {
        let mut choice = vec![0usize; n];
        loop {
            stats.candidates_examined += 1;
            let s = score_of(rows, &choice);
            if best.as_ref().is_none_or(|(b, _, _)| s > *b) {
                best = Some((s, rows.clone(), choice.clone()));
            }
            // odometer over per-row permutation indices
            let mut i = 0;
            while i < n {
                choice[i] += 1;
                if choice[i] < field_perms.len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }

    let (score, rows, choice) = best.expect("there is always at least one schedule");
    let schedule = RequestSchedule::new(
        rows.iter()
            .zip(&choice)
            .map(|(&r, &c)| ScheduleEntry::new(r, field_perms[c].clone()))
            .collect(),
    );
    stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(SolveResult { phc_score: score, schedule, stats, optimal: true })
}
