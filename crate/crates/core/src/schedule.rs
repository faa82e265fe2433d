//! Request schedules: the ordered list of rows, each with its own field order.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::render::render_prompt;
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScheduleEntry {
    pub row_id: usize,
    /// Field indices in emission order.
    pub field_order: Vec<usize>,
}

impl ScheduleEntry {
    pub fn new(row_id: usize, field_order: Vec<usize>) -> Self {
        ScheduleEntry { row_id, field_order }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RequestSchedule {
    pub entries: Vec<ScheduleEntry>,
}

impl RequestSchedule {
    pub fn new(entries: Vec<ScheduleEntry>) -> Self {
        RequestSchedule { entries }
    }

    /// Rows in ingestion order, fields in schema order.
    pub fn identity(t: &Table) -> Self {
        let order: Vec<usize> = (0..t.num_fields()).collect();
        RequestSchedule {
            entries: (0..t.num_rows())
                .map(|r| ScheduleEntry::new(r, order.clone()))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Checks that row ids are in range and unique and that every field
    /// order is a repeat-free selection of the table's fields.
    pub fn validate(&self, t: &Table) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.entries.len());
        for (pos, e) in self.entries.iter().enumerate() {
            if e.row_id >= t.num_rows() {
                return Err(Error::Schema(format!(
                    "entry {pos}: row id {} but table has {} rows",
                    e.row_id,
                    t.num_rows()
                )));
            }
            if !seen.insert(e.row_id) {
                return Err(Error::Schema(format!("entry {pos}: row id {} repeated", e.row_id)));
            }
            let mut fields = HashSet::with_capacity(e.field_order.len());
            for &f in &e.field_order {
                if f >= t.num_fields() || !fields.insert(f) {
                    return Err(Error::Schema(format!(
                        "entry {pos}: field order {:?} is not a permutation of table fields",
                        e.field_order
                    )));
                }
            }
        }
        Ok(())
    }

    /// Like [`validate`](Self::validate), and additionally requires every row
    /// to appear with a full field permutation.
    pub fn validate_complete(&self, t: &Table) -> Result<()> {
        self.validate(t)?;
        if self.entries.len() != t.num_rows() {
            return Err(Error::Schema(format!(
                "schedule has {} entries for {} rows",
                self.entries.len(),
                t.num_rows()
            )));
        }
        if let Some(e) = self.entries.iter().find(|e| e.field_order.len() != t.num_fields()) {
            return Err(Error::Schema(format!(
                "row {} orders {} of {} fields",
                e.row_id,
                e.field_order.len(),
                t.num_fields()
            )));
        }
        Ok(())
    }

    pub fn prompts(&self, t: &Table, system_prompt: &str, question: &str) -> Vec<String> {
        self.entries
            .iter()
            .map(|e| render_prompt(e, t, system_prompt, question))
            .collect()
    }
}

/// One line of an exported schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleRecord {
    pub row_id: usize,
    pub field_order: Vec<String>,
    pub prompt: String,
    /// Content hash of the table the schedule was computed for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_hash: Option<String>,
}

pub fn write_schedule_jsonl<W: Write>(
    mut out: W,
    schedule: &RequestSchedule,
    t: &Table,
    system_prompt: &str,
    question: &str,
) -> Result<()> {
    let hash = t.content_hash();
    for e in &schedule.entries {
        let record = ScheduleRecord {
            row_id: e.row_id,
            field_order: e.field_order.iter().map(|&f| t.field_name(f).to_owned()).collect(),
            prompt: render_prompt(e, t, system_prompt, question),
            table_hash: Some(hash.clone()),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_schedule_jsonl<R: Read>(source: R) -> Result<Vec<ScheduleRecord>> {
    let mut records = Vec::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Structural {
            line: i as u64 + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Rebuilds a schedule from exported records, checking the table hash and
/// field names against `t`.
pub fn schedule_from_records(records: &[ScheduleRecord], t: &Table) -> Result<RequestSchedule> {
    let hash = t.content_hash();
    let mut entries = Vec::with_capacity(records.len());
    for (pos, r) in records.iter().enumerate() {
        if let Some(h) = r.table_hash.as_ref().filter(|h| **h != hash) {
            return Err(Error::Schema(format!(
                "entry {pos}: schedule was computed for table {h}, got {hash}"
            )));
        }
        let order = r
            .field_order
            .iter()
            .map(|name| {
                t.field_index(name)
                    .ok_or_else(|| Error::Schema(format!("entry {pos}: unknown field `{name}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        entries.push(ScheduleEntry::new(r.row_id, order));
    }
    let schedule = RequestSchedule::new(entries);
    schedule.validate(t)?;
    Ok(schedule)
}
