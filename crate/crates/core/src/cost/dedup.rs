use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Unique prompts in first-occurrence order and, for every original
/// position, the index of its unique prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dedup {
    pub uniques: Vec<String>,
    pub map: Vec<usize>,
}

impl Dedup {
    /// Replicates one result per unique prompt back to every original request.
    pub fn expand<T: Clone>(&self, results: &[T]) -> Vec<T> {
        self.map.iter().map(|&i| results[i].clone()).collect()
    }

    pub fn calls_saved(&self) -> usize {
        self.map.len() - self.uniques.len()
    }
}

pub fn dedup<S: AsRef<str>>(prompts: &[S]) -> Dedup {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut uniques = Vec::new();
    let map = prompts
        .iter()
        .map(|p| {
            let p = p.as_ref();
            *index.entry(p).or_insert_with(|| {
                uniques.push(p.to_owned());
                uniques.len() - 1
            })
        })
        .collect();
    Dedup { uniques, map }
}
