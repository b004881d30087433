//! Retrieval-quality and language-bias metrics over run files.

mod histogram;
mod language;
mod relevance;
mod weights;

use thiserror::Error;

pub use histogram::{tier_histogram, TierHistogram};
pub use language::{
    bias_report, dlbkl, kl_divergence, lbkl, list_bias, observed_proportions, observed_with_weights,
    BiasReport, LanguageDistribution, ObservedDistribution, QueryBias, SmoothingConfig,
};
pub use relevance::{
    accuracy_at_k, hit_at_k, ndcg_at_k, ndcg_for_list, parse_qrels, qrels_by_primary_concept, Qrels,
};
pub use weights::{rank_weights, RankWeights, Weighting};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("no language metadata for doc {0:?}")]
    MissingLanguageMeta(String),
    #[error("language {0:?} is not in the catalog")]
    UnknownLanguage(String),
    #[error("expected language {0:?} has zero observed mass; enable smoothing")]
    UnsmoothedZero(String),
    #[error("no relevance judgments for query {0:?}")]
    MissingRelevance(String),
    #[error("ranked list for query {0:?} is empty")]
    EmptyList(String),
    #[error("run has no queries")]
    EmptyRun,
    #[error("cutoff k must be at least 1")]
    InvalidCutoff,
    #[error("invalid language distribution: {0}")]
    InvalidDistribution(String),
    #[error("qrels line {line}: malformed {text:?}")]
    MalformedQrels { line: usize, text: String },
}
