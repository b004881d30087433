//! Metadata sidecar (one JSON object per line) and the embedding/metadata join.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::embedding::EmbeddingSet;

#[derive(Debug, Error)]
pub enum MetaError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("duplicate metadata id {0:?}")]
    DuplicateMetaId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Text,
    Image,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemMeta {
    pub id: String,
    #[serde(default)]
    pub language: String,
    #[serde(default)]
    pub country: String,
    /// Highest-priority concept first.
    #[serde(default)]
    pub concepts: Vec<String>,
    pub modality: Modality,
    #[serde(default)]
    pub source_uri: Option<String>,
}

impl ItemMeta {
    pub fn text(
        id: impl Into<String>,
        language: impl Into<String>,
        country: impl Into<String>,
        concepts: Vec<String>,
    ) -> Self {
        Self {
            id: id.into(),
            language: language.into().to_lowercase(),
            country: country.into(),
            concepts,
            modality: Modality::Text,
            source_uri: None,
        }
    }

    pub fn image(id: impl Into<String>, country: impl Into<String>, concepts: Vec<String>) -> Self {
        Self {
            id: id.into(),
            language: String::new(),
            country: country.into(),
            concepts,
            modality: Modality::Image,
            source_uri: None,
        }
    }

    pub fn has_concept(&self, concept: &str) -> bool {
        self.concepts.iter().any(|c| c == concept)
    }

    pub fn primary_concept(&self) -> Option<&str> {
        self.concepts.first().map(String::as_str)
    }

    /// Sidecar-level invariant findings for this item (empty when valid).
    pub fn findings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.id.is_empty() {
            out.push("empty id".to_owned());
        }
        if self.modality == Modality::Text && self.language.is_empty() {
            out.push(format!("text item {:?} has no language tag", self.id));
        }
        out
    }
}

/// Metadata keyed by item id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetaIndex {
    items: BTreeMap<String, ItemMeta>,
}

impl MetaIndex {
    pub fn from_items(items: impl IntoIterator<Item = ItemMeta>) -> Result<Self, MetaError> {
        let mut map = BTreeMap::new();
        for mut item in items {
            item.language = item.language.to_lowercase();
            if map.contains_key(&item.id) {
                return Err(MetaError::DuplicateMetaId(item.id));
            }
            map.insert(item.id.clone(), item);
        }
        Ok(Self { items: map })
    }

    pub fn get(&self, id: &str) -> Option<&ItemMeta> {
        self.items.get(id)
    }

    pub fn language(&self, id: &str) -> Option<&str> {
        self.items
            .get(id)
            .map(|m| m.language.as_str())
            .filter(|l| !l.is_empty())
    }

    pub fn contains(&self, id: &str) -> bool {
        self.items.contains_key(id)
    }

    /// Items in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &ItemMeta> {
        self.items.values()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn languages(&self) -> BTreeSet<String> {
        self.items
            .values()
            .filter(|m| !m.language.is_empty())
            .map(|m| m.language.clone())
            .collect()
    }
}

pub fn parse_meta(text: &str) -> Result<Vec<ItemMeta>, MetaError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<ItemMeta>(l).map_err(|source| MetaError::Parse {
                line: i + 1,
                source,
            })
        })
        .collect()
}

pub fn load_meta(path: impl AsRef<Path>) -> Result<Vec<ItemMeta>, MetaError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| MetaError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_meta(&text)
}

pub fn encode_meta<'a>(items: impl IntoIterator<Item = &'a ItemMeta>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("metadata serializes"));
        out.push('\n');
    }
    out
}

pub fn write_meta<'a>(
    items: impl IntoIterator<Item = &'a ItemMeta>,
    path: impl AsRef<Path>,
) -> Result<(), MetaError> {
    let path = path.as_ref();
    fs::write(path, encode_meta(items)).map_err(|source| MetaError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Embeddings joined with their metadata, plus what failed to join.
#[derive(Debug, Clone)]
pub struct AnnotatedSet {
    pub embeddings: EmbeddingSet,
    pub meta: MetaIndex,
    /// Embedding ids without metadata, ascending.
    pub missing_meta: Vec<String>,
    /// Metadata ids without an embedding, ascending.
    pub missing_embedding: Vec<String>,
}

impl AnnotatedSet {
    pub fn is_complete(&self) -> bool {
        self.missing_meta.is_empty() && self.missing_embedding.is_empty()
    }

    /// Records that have metadata, in embedding-file order.
    pub fn annotated(&self) -> impl Iterator<Item = (&super::EmbeddingRecord, &ItemMeta)> {
        self.embeddings
            .records()
            .iter()
            .filter_map(|r| self.meta.get(&r.id).map(|m| (r, m)))
    }
}

pub fn join_meta(set: EmbeddingSet, meta: impl IntoIterator<Item = ItemMeta>) -> Result<AnnotatedSet, MetaError> {
    let meta = MetaIndex::from_items(meta)?;
    let mut missing_meta: Vec<String> = set
        .ids()
        .filter(|id| !meta.contains(id))
        .map(str::to_owned)
        .collect();
    missing_meta.sort();
    let missing_embedding = meta
        .iter()
        .filter(|m| set.get(&m.id).is_none())
        .map(|m| m.id.clone())
        .collect();
    Ok(AnnotatedSet {
        embeddings: set,
        meta,
        missing_meta,
        missing_embedding,
    })
}
