//! Built-in problems, shipped as spec files.

use crate::cli::ProblemSpec;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub source: &'static str,
}

macro_rules! entry {
    ($name:literal) => {
        CatalogEntry {
            name: $name,
            source: include_str!(concat!("../specs/", $name, ".spec")),
        }
    };
}

const ENTRIES: &[CatalogEntry] = &[
    entry!("wave"),
    entry!("wave-forced"),
    entry!("mixed-derivative"),
    entry!("variable-speed"),
    entry!("parabolic"),
    entry!("wrong-characteristics"),
    entry!("goursat-wave"),
    entry!("mixed-wave"),
    entry!("darboux"),
    entry!("darboux-nonlinear"),
    entry!("goursat-linear"),
    entry!("goursat-linear-free"),
    entry!("traced-wave"),
];

pub fn entries() -> &'static [CatalogEntry] {
    ENTRIES
}

pub fn find(name: &str) -> Option<&'static CatalogEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

impl CatalogEntry {
    pub fn load(&self) -> Result<ProblemSpec> {
        ProblemSpec::parse(self.source)
    }
}

/// Parses the named built-in problem.
pub fn load(name: &str) -> Result<ProblemSpec> {
    find(name)
        .ok_or_else(|| {
            let names: Vec<_> = ENTRIES.iter().map(|e| e.name).collect();
            Error::invalid(format!("unknown example `{name}`; available: {}", names.join(", ")))
        })?
        .load()
}
