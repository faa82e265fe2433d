//! Bidirectional functional dependencies.
//!
//! A group `{X, Y, ...}` asserts that equality on any one member implies
//! equality on every other member, for every pair of rows. Groups are
//! equivalence classes and must be pairwise disjoint.

use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::Table;

pub const DEFAULT_DISCOVERY_MAX_ROWS: usize = 10_000;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalDependencySet {
    pub groups: Vec<Vec<String>>,
    /// Set once every group has been checked against a concrete table.
    #[serde(default)]
    pub validated: bool,
}

impl FunctionalDependencySet {
    pub fn new(groups: Vec<Vec<String>>) -> Self {
        FunctionalDependencySet { groups, validated: false }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.iter().all(|g| g.len() < 2)
    }

    /// Reads the `{"groups": [[...], ...]}` document.
    pub fn from_json_reader<R: Read>(r: R) -> Result<Self> {
        let mut fds: FunctionalDependencySet = serde_json::from_reader(r)?;
        fds.validated = false;
        Ok(fds)
    }

    /// Maps every field to the indices of its FD-equivalent fields (itself
    /// excluded). Fails on unknown names or overlapping groups.
    pub fn resolve(&self, t: &Table) -> Result<FdIndex> {
        let mut group_of = vec![None; t.num_fields()];
        let mut groups = Vec::with_capacity(self.groups.len());
        for (g, names) in self.groups.iter().enumerate() {
            let mut members = Vec::with_capacity(names.len());
            for name in names {
                let idx = t
                    .field_index(name)
                    .ok_or_else(|| Error::Schema(format!("FD group {g} names unknown field `{name}`")))?;
                if members.contains(&idx) {
                    continue;
                }
                if let Some(other) = group_of[idx] {
                    return Err(Error::Schema(format!(
                        "field `{name}` appears in FD groups {other} and {g}"
                    )));
                }
                group_of[idx] = Some(g);
                members.push(idx);
            }
            members.sort_unstable();
            groups.push(members);
        }
        Ok(FdIndex { group_of, groups })
    }

    /// Keeps only the groups at the given positions.
    pub fn retain_groups(&self, keep: &[bool]) -> Self {
        FunctionalDependencySet {
            groups: self
                .groups
                .iter()
                .zip(keep)
                .filter(|(_, k)| **k)
                .map(|(g, _)| g.clone())
                .collect(),
            validated: self.validated,
        }
    }
}

/// Field-index view of an FD set for one table.
#[derive(Debug, Clone, Default)]
pub struct FdIndex {
    group_of: Vec<Option<usize>>,
    groups: Vec<Vec<usize>>,
}

impl FdIndex {
    pub fn none(num_fields: usize) -> Self {
        FdIndex { group_of: vec![None; num_fields], groups: Vec::new() }
    }

    /// Fields equivalent to `field`, ascending, excluding `field` itself.
    pub fn equivalents(&self, field: usize) -> impl Iterator<Item = usize> + '_ {
        self.group_of[field]
            .map(|g| self.groups[g].as_slice())
            .unwrap_or(&[])
            .iter()
            .copied()
            .filter(move |&f| f != field)
    }

    pub fn group_of(&self, field: usize) -> Option<usize> {
        self.group_of[field]
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupReport {
    pub fields: Vec<String>,
    pub satisfied: bool,
    /// Two row ids that agree on some member but disagree on another.
    pub witness: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FdReport {
    pub groups: Vec<GroupReport>,
}

impl FdReport {
    pub fn all_satisfied(&self) -> bool {
        self.groups.iter().all(|g| g.satisfied)
    }

    /// The input set restricted to satisfied groups, marked validated.
    pub fn satisfied_subset(&self, fds: &FunctionalDependencySet) -> FunctionalDependencySet {
        let keep: Vec<bool> = self.groups.iter().map(|g| g.satisfied).collect();
        let mut out = fds.retain_groups(&keep);
        out.validated = true;
        out
    }
}

pub fn validate_fds(t: &Table, fds: &FunctionalDependencySet) -> Result<FdReport> {
    let index = fds.resolve(t)?;
    let groups = index
        .groups()
        .iter()
        .zip(&fds.groups)
        .map(|(members, names)| {
            let witness = find_violation(t, members);
            GroupReport { fields: names.clone(), satisfied: witness.is_none(), witness }
        })
        .collect();
    Ok(FdReport { groups })
}

// For each member field, every row must agree on the whole group with the
// first row carrying the same value. Any violating pair implies one of its
// rows disagrees with that first row, so this scan is complete.
fn find_violation(t: &Table, members: &[usize]) -> Option<(usize, usize)> {
    for &f in members {
        let mut first: HashMap<&str, usize> = HashMap::new();
        for i in 0..t.num_rows() {
            let j = *first.entry(t.cell(i, f)).or_insert(i);
            if j != i && members.iter().any(|&g| t.cell(i, g) != t.cell(j, g)) {
                return Some((j, i));
            }
        }
    }
    None
}

/// Groups fields whose row partitions coincide, i.e. pairwise bidirectional
/// FDs. Only single-field determinants are considered.
pub fn discover_fds(t: &Table, max_rows: usize) -> Result<FunctionalDependencySet> {
    if t.num_rows() > max_rows {
        return Err(Error::Size(format!(
            "FD discovery limited to {max_rows} rows, table has {}",
            t.num_rows()
        )));
    }
    let signatures: Vec<Vec<usize>> = (0..t.num_fields())
        .map(|f| {
            let mut first: HashMap<&str, usize> = HashMap::new();
            (0..t.num_rows())
                .map(|i| *first.entry(t.cell(i, f)).or_insert(i))
                .collect()
        })
        .collect();

    let mut assigned = vec![false; t.num_fields()];
    let mut groups = Vec::new();
    for a in 0..t.num_fields() {
        if assigned[a] {
            continue;
        }
        let mut group = vec![a];
        for b in a + 1..t.num_fields() {
            if !assigned[b] && signatures[a] == signatures[b] {
                assigned[b] = true;
                group.push(b);
            }
        }
        if group.len() > 1 {
            groups.push(group.into_iter().map(|f| t.field_name(f).to_owned()).collect());
        }
    }
    Ok(FunctionalDependencySet { groups, validated: true })
}
