//! Row and field reordering for LLM prompt-cache reuse over relational tables.
//!
//! A table's rows are sent to a model one request at a time. Choosing the row
//! order and a per-row field order so that consecutive requests share long
//! leading runs of identical fields lets a prefix (KV) cache skip most of the
//! prompt. This crate provides the objective ([`objective::phc`]), an exact
//! solver ([`solver::ophr`]), a greedy scalable one ([`solver::ggr`]), a token
//! radix-cache simulator ([`cache`]) and prompt-caching cost estimates
//! ([`cost`]).

pub mod baseline;
pub mod cache;
pub mod cost;
pub mod error;
pub mod fd;
pub mod objective;
pub mod render;
pub mod schedule;
pub mod solver;
pub mod stats;
pub mod table;
pub mod tokenizer;

pub use error::{Error, Result};
pub use fd::FunctionalDependencySet;
pub use schedule::{RequestSchedule, ScheduleEntry};
pub use table::{load_table, InputFormat, Table};
pub use tokenizer::{CharTokenizer, FragmentTokenizer, Tokenizer, TokenizerKind, WordTokenizer};
