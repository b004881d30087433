//! Measuring language and cultural bias in multilingual embedding retrieval.
//!
//! The crate covers the whole offline pipeline: embedding and metadata
//! formats ([`corpus`]), exact retrieval ([`retrieval`]), rank-aware
//! language-bias and relevance metrics ([`metrics`]), forced-choice triplet
//! evaluation ([`triplet_eval`]), cluster analytics ([`analytics`]),
//! synthetic data ([`synth`]), manifest assembly ([`dataset`]) and CSV
//! reports ([`report`]).

pub mod analytics;
pub mod corpus;
pub mod dataset;
pub mod metrics;
pub mod report;
pub mod retrieval;
pub mod synth;
pub mod triplet_eval;
