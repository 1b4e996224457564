//! Name-keyed registries for interchangeable strategies (LLM backends,
//! embedders, demonstration-query modes). Selection happens at runtime from
//! config or CLI flags.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("unknown {kind} `{name}` (available: {})", available.join(", "))]
pub struct UnknownEntry {
    pub kind: &'static str,
    pub name: String,
    pub available: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Registry<T> {
    kind: &'static str,
    entries: BTreeMap<String, T>,
}

impl<T> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry { kind, entries: BTreeMap::new() }
    }

    /// Registers `entry` under `name`, replacing any previous entry.
    pub fn register(&mut self, name: impl Into<String>, entry: T) -> &mut Self {
        self.entries.insert(name.into(), entry);
        self
    }

    pub fn get(&self, name: &str) -> Result<&T, UnknownEntry> {
        self.entries.get(name).ok_or_else(|| UnknownEntry {
            kind: self.kind,
            name: name.to_string(),
            available: self.names().into_iter().map(str::to_string).collect(),
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}
