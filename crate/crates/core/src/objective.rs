//! Prefix hit count (PHC).
//!
//! A row scores the squared fragment lengths of the leading run of positions
//! at which it agrees exactly with the previous row on both field and value.
//! The schedule's PHC is the sum over rows; the first row scores 0.

use crate::error::{Error, Result};
use crate::render::fragment_len;
use crate::schedule::{RequestSchedule, ScheduleEntry};
use crate::table::Table;
use crate::tokenizer::Tokenizer;

/// Fragment lengths of the leading positions shared by `prev` and `cur`.
fn shared_prefix_lens<'a>(
    prev: &'a ScheduleEntry,
    cur: &'a ScheduleEntry,
    t: &'a Table,
    tok: &'a dyn Tokenizer,
) -> impl Iterator<Item = u64> + 'a {
    prev.field_order
        .iter()
        .zip(&cur.field_order)
        .take_while(move |&(&fp, &fc)| fp == fc && t.cell(prev.row_id, fp) == t.cell(cur.row_id, fc))
        .map(move |(_, &f)| fragment_len(tok, t.field_name(f), t.cell(cur.row_id, f)))
}

pub fn hit(schedule: &RequestSchedule, r: usize, t: &Table, tok: &dyn Tokenizer) -> Result<u64> {
    if r >= schedule.len() {
        return Err(Error::Bounds { index: r, len: schedule.len() });
    }
    if r == 0 {
        return Ok(0);
    }
    let (prev, cur) = (&schedule.entries[r - 1], &schedule.entries[r]);
    Ok(shared_prefix_lens(prev, cur, t, tok).map(|l| l * l).sum())
}

pub fn phc(schedule: &RequestSchedule, t: &Table, tok: &dyn Tokenizer) -> u64 {
    schedule
        .entries
        .windows(2)
        .map(|w| shared_prefix_lens(&w[0], &w[1], t, tok).map(|l| l * l).sum::<u64>())
        .sum()
}

/// Unsquared variant: tokens in the shared leading fragments of each row,
/// summed over rows.
pub fn adjacent_hit_tokens(schedule: &RequestSchedule, t: &Table, tok: &dyn Tokenizer) -> Vec<u64> {
    let mut out = Vec::with_capacity(schedule.len());
    if !schedule.is_empty() {
        out.push(0);
    }
    out.extend(
        schedule
            .entries
            .windows(2)
            .map(|w| shared_prefix_lens(&w[0], &w[1], t, tok).sum::<u64>()),
    );
    out
}
