//! Seeded synthetic inputs: ranked lists with prescribed language placement,
//! and Gaussian embedding worlds with tunable cross-lingual alignment.

mod placement;
mod rng;
mod world;

use thiserror::Error;

pub use placement::{gen_ranked_lists, Pattern, PlacementSpec};
pub use rng::{entity_rng, fnv1a64, splitmix64};
pub use world::{concept_name, gen_embedding_world, ClusterSpec, EmbeddingWorld};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("language counts sum to {total}, list length is {k}")]
    CountMismatch { k: usize, total: usize },
    #[error("degenerate cluster spec: {0}")]
    DegenerateSpec(String),
}
