//! The immutable input table and its CSV / JSONL codecs.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Csv,
    Jsonl,
}

impl std::str::FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(InputFormat::Csv),
            "jsonl" | "ndjson" => Ok(InputFormat::Jsonl),
            other => Err(format!("unknown input format `{other}` (expected csv or jsonl)")),
        }
    }
}

/// A grid of text cells with named fields.
///
/// Row ids are the ingestion positions `0..n`, so `row(i)` is the row with id
/// `i`. Cells are opaque strings; nothing is coerced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    field_names: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(field_names: Vec<String>, rows: Vec<Vec<String>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for name in &field_names {
            if name.is_empty() {
                return Err(Error::Schema("field names must be non-empty".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("duplicate field name `{name}`")));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != field_names.len() {
                return Err(Error::Structural {
                    line: i as u64 + 1,
                    message: format!(
                        "row {i} has {} cells, expected {}",
                        row.len(),
                        field_names.len()
                    ),
                });
            }
        }
        Ok(Table { field_names, rows })
    }

    /// Convenience constructor for literals in tests and examples.
    pub fn from_rows<S: AsRef<str>>(fields: &[S], rows: &[&[S]]) -> Result<Self> {
        Table::new(
            fields.iter().map(|s| s.as_ref().to_owned()).collect(),
            rows.iter()
                .map(|r| r.iter().map(|s| s.as_ref().to_owned()).collect())
                .collect(),
        )
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_fields(&self) -> usize {
        self.field_names.len()
    }

    pub fn field_names(&self) -> &[String] {
        &self.field_names
    }

    pub fn field_name(&self, field: usize) -> &str {
        &self.field_names[field]
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.field_names.iter().position(|f| f == name)
    }

    pub fn row(&self, row_id: usize) -> &[String] {
        &self.rows[row_id]
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn cell(&self, row_id: usize, field: usize) -> &str {
        &self.rows[row_id][field]
    }

    pub fn column(&self, field: usize) -> impl Iterator<Item = &str> + '_ {
        self.rows.iter().map(move |r| r[field].as_str())
    }

    /// Hex SHA-256 over the canonical CSV encoding.
    pub fn content_hash(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        let digest = Sha256::digest(&buf);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(out);
        w.write_record(&self.field_names)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn load_table<R: Read>(source: R, format: InputFormat) -> Result<Table> {
    match format {
        InputFormat::Csv => load_csv(source),
        InputFormat::Jsonl => load_jsonl(source),
    }
}

fn load_csv<R: Read>(source: R) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if header.is_empty() {
        return Err(Error::Schema("CSV input has no header row".into()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != header.len() {
            let line = record.position().map_or(0, |p| p.line());
            return Err(Error::Structural {
                line,
                message: format!(
                    "row has {} cells but the header has {} fields",
                    record.len(),
                    header.len()
                ),
            });
        }
        rows.push(record.iter().map(str::to_owned).collect());
    }
    Table::new(header, rows)
}

/// JSONL rows may disagree on keys; the schema is the union in
/// first-appearance order and absent keys read as "".
fn load_jsonl<R: Read>(source: R) -> Result<Table> {
    let mut fields: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut objects: Vec<Vec<(usize, String)>> = Vec::new();

    for (lineno, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        let line_no = lineno as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::Structural {
                line: line_no,
                message: e.to_string(),
            })?;
        let serde_json::Value::Object(map) = value else {
            return Err(Error::Structural {
                line: line_no,
                message: "expected a JSON object".into(),
            });
        };
        let mut cells = Vec::with_capacity(map.len());
        for (key, v) in map {
            let text = match v {
                serde_json::Value::String(s) => s,
                serde_json::Value::Null => String::new(),
                other => other.to_string(),
            };
            let idx = match index.get(&key) {
                Some(&i) => i,
                None => {
                    fields.push(key.clone());
                    index.insert(key, fields.len() - 1);
                    fields.len() - 1
                }
            };
            cells.push((idx, text));
        }
        objects.push(cells);
    }

    let rows = objects
        .into_iter()
        .map(|cells| {
            let mut row = vec![String::new(); fields.len()];
            for (idx, text) in cells {
                row[idx] = text;
            }
            row
        })
        .collect();
    Table::new(fields, rows)
}
