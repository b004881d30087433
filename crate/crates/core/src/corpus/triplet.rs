//! Forced-choice triplet manifest entries and their constraint checker.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::meta::MetaIndex;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("manifest line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// A text query with one semantically relevant, one culturally relevant and
/// one non-relevant image candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletEntry {
    pub query_id: String,
    pub query_text: String,
    pub query_language: String,
    pub query_country: String,
    pub concept: String,
    pub sem_id: String,
    pub cul_id: String,
    pub non_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Sem,
    Cul,
    Non,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Sem, Slot::Cul, Slot::Non];

    pub fn as_str(self) -> &'static str {
        match self {
            Slot::Sem => "sem",
            Slot::Cul => "cul",
            Slot::Non => "non",
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl TripletEntry {
    pub fn candidate(&self, slot: Slot) -> &str {
        match slot {
            Slot::Sem => &self.sem_id,
            Slot::Cul => &self.cul_id,
            Slot::Non => &self.non_id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownCandidate { slot: Slot, id: String },
    SemMissingConcept,
    SemSameCountry,
    CulDifferentCountry,
    CulSharesConcept,
    NonSameCountry,
    NonSharesConcept,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownCandidate { slot, id } => write!(f, "{slot} candidate {id:?} not in pool"),
            Violation::SemMissingConcept => f.write_str("sem candidate lacks the query concept"),
            Violation::SemSameCountry => f.write_str("sem candidate shares the query country"),
            Violation::CulDifferentCountry => f.write_str("cul candidate is from another country"),
            Violation::CulSharesConcept => f.write_str("cul candidate carries the query concept"),
            Violation::NonSameCountry => f.write_str("non candidate shares the query country"),
            Violation::NonSharesConcept => f.write_str("non candidate carries the query concept"),
        }
    }
}

/// Checks an entry against the pool metadata. Empty result means valid.
///
/// Concept exclusion looks at every concept label on the candidate, not
/// only its primary one.
pub fn check_triplet(entry: &TripletEntry, pool: &MetaIndex) -> Vec<Violation> {
    let mut out = Vec::new();
    let lookup = |slot: Slot, out: &mut Vec<Violation>| {
        let id = entry.candidate(slot);
        let m = pool.get(id);
        if m.is_none() {
            out.push(Violation::UnknownCandidate {
                slot,
                id: id.to_owned(),
            });
        }
        m
    };
    if let Some(sem) = lookup(Slot::Sem, &mut out) {
        if !sem.concepts.contains(&entry.concept) {
            out.push(Violation::SemMissingConcept);
        }
        if sem.country == entry.query_country {
            out.push(Violation::SemSameCountry);
        }
    }
    if let Some(cul) = lookup(Slot::Cul, &mut out) {
        if cul.country != entry.query_country {
            out.push(Violation::CulDifferentCountry);
        }
        if cul.concepts.contains(&entry.concept) {
            out.push(Violation::CulSharesConcept);
        }
    }
    if let Some(non) = lookup(Slot::Non, &mut out) {
        if non.country == entry.query_country {
            out.push(Violation::NonSameCountry);
        }
        if non.concepts.contains(&entry.concept) {
            out.push(Violation::NonSharesConcept);
        }
    }
    out
}

pub fn parse_manifest(text: &str) -> Result<Vec<TripletEntry>, ManifestError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|source| ManifestError::Parse {
                line: i + 1,
                source,
            })
        })
        .collect()
}

pub fn encode_manifest(entries: &[TripletEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&serde_json::to_string(e).expect("entry serializes"));
        out.push('\n');
    }
    out
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<TripletEntry>, ManifestError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_manifest(&text)
}
