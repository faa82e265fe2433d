//! Prompt rendering.
//!
//! A row is encoded as a JSON object whose keys follow the entry's field
//! order. Each field contributes the canonical fragment `"<field>": "<value>", `
//! and this fragment is what scores and statistics measure. In the emitted
//! prompt the last fragment's trailing `, ` is replaced by the closing brace,
//! so two prompts that agree on their first k fields share a byte prefix that
//! covers those k fragments.

use crate::schedule::ScheduleEntry;
use crate::table::Table;
use crate::tokenizer::Tokenizer;

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// The canonical fragment for one cell, including its trailing separator.
pub fn fragment(field: &str, value: &str) -> String {
    format!("{}: {}, ", json_string(field), json_string(value))
}

pub fn fragment_len(tok: &dyn Tokenizer, field: &str, value: &str) -> u64 {
    tok.count(&fragment(field, value)) as u64
}

/// The instruction prefix shared by every request: system prompt and question,
/// one per line, each omitted when empty.
pub fn instruction_prefix(system_prompt: &str, question: &str) -> String {
    let mut out = String::new();
    for part in [system_prompt, question] {
        if !part.is_empty() {
            out.push_str(part);
            out.push('\n');
        }
    }
    out
}

pub fn render_row(entry: &ScheduleEntry, t: &Table) -> String {
    let mut body = String::from("{");
    for (i, &field) in entry.field_order.iter().enumerate() {
        if i > 0 {
            body.push_str(", ");
        }
        body.push_str(&json_string(t.field_name(field)));
        body.push_str(": ");
        body.push_str(&json_string(t.cell(entry.row_id, field)));
    }
    body.push('}');
    body
}

pub fn render_prompt(entry: &ScheduleEntry, t: &Table, system_prompt: &str, question: &str) -> String {
    let mut out = instruction_prefix(system_prompt, question);
    out.push_str(&render_row(entry, t));
    out
}
