//! Data model shared by every pipeline stage: embeddings, item metadata,
//! the language catalog and triplet manifests.

mod catalog;
mod embedding;
mod meta;
mod triplet;

pub use catalog::{load_catalog, Catalog, CatalogEntry, CatalogError, Tier};
pub use embedding::{
    load_embeddings, write_embeddings, EmbeddingError, EmbeddingRecord, EmbeddingSet, FORMAT_VERSION,
    MAGIC,
};
pub use meta::{
    encode_meta, join_meta, load_meta, parse_meta, write_meta, AnnotatedSet, ItemMeta, MetaError,
    MetaIndex, Modality,
};
pub use triplet::{
    check_triplet, encode_manifest, load_manifest, parse_manifest, ManifestError, Slot, TripletEntry,
    Violation,
};

/// Country codes in the column order of the per-country result tables.
pub const TABLE_COUNTRIES: [&str; 16] = [
    "USA", "UK", "AUS", "GER", "CHN", "JPN", "FRA", "ESP", "ARG", "PRT", "BRA", "SAU", "THA", "IND",
    "KEN", "NGA",
];
