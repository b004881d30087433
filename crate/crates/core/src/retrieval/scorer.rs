//! Pairwise similarity: cosine, dot product, and late-interaction MaxSim.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::EmbeddingRecord;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("dimension mismatch: {query:?} has dim {query_dim}, {doc:?} has dim {doc_dim}")]
    DimMismatch {
        query: String,
        query_dim: usize,
        doc: String,
        doc_dim: usize,
    },
    #[error("zero vector in {0:?} cannot be scored with cosine similarity")]
    ZeroVectorWithCosine(String),
    #[error("record {0:?} has several vectors; only maxsim scores token matrices")]
    NotSingleVector(String),
    #[error("candidate set is empty")]
    EmptyCandidateSet,
    #[error("cutoff k must be at least 1")]
    InvalidCutoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Similarity {
    Cosine,
    Dot,
    #[serde(rename = "maxsim")]
    MaxSim,
}

impl std::str::FromStr for Similarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" => Ok(Self::Cosine),
            "dot" => Ok(Self::Dot),
            "maxsim" => Ok(Self::MaxSim),
            other => Err(format!("unknown scorer {other:?} (cosine, dot, maxsim)")),
        }
    }
}

/// Token-level similarity inside MaxSim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenSimilarity {
    Dot,
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScorerConfig {
    pub similarity: Similarity,
    pub l2_normalize_inputs: bool,
    #[serde(default = "default_token_similarity")]
    pub maxsim_token: TokenSimilarity,
}

fn default_token_similarity() -> TokenSimilarity {
    TokenSimilarity::Dot
}

impl Default for ScorerConfig {
    fn default() -> Self {
        Self::cosine()
    }
}

impl ScorerConfig {
    pub fn cosine() -> Self {
        Self {
            similarity: Similarity::Cosine,
            l2_normalize_inputs: false,
            maxsim_token: TokenSimilarity::Dot,
        }
    }

    pub fn dot() -> Self {
        Self {
            similarity: Similarity::Dot,
            ..Self::cosine()
        }
    }

    /// ColBERT convention: dot products between l2-normalized token vectors.
    pub fn maxsim() -> Self {
        Self {
            similarity: Similarity::MaxSim,
            l2_normalize_inputs: true,
            maxsim_token: TokenSimilarity::Dot,
        }
    }

    /// Defaults for a named similarity.
    pub fn for_similarity(similarity: Similarity) -> Self {
        match similarity {
            Similarity::Cosine => Self::cosine(),
            Similarity::Dot => Self::dot(),
            Similarity::MaxSim => Self::maxsim(),
        }
    }
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| f64::from(x) * f64::from(y)).sum()
}

fn norm(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

fn cosine(a: &[f32], b: &[f32], a_id: &str, b_id: &str) -> Result<f64, ScoreError> {
    let na = norm(a);
    if na == 0.0 {
        return Err(ScoreError::ZeroVectorWithCosine(a_id.to_owned()));
    }
    let nb = norm(b);
    if nb == 0.0 {
        return Err(ScoreError::ZeroVectorWithCosine(b_id.to_owned()));
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Vector similarity after optional input normalization.
fn pair(
    a: &[f32],
    b: &[f32],
    a_id: &str,
    b_id: &str,
    use_cosine: bool,
    normalize: bool,
) -> Result<f64, ScoreError> {
    if use_cosine || normalize {
        // Normalizing both inputs and taking the dot product is cosine.
        cosine(a, b, a_id, b_id)
    } else {
        Ok(dot(a, b))
    }
}

fn single(r: &EmbeddingRecord) -> Result<&[f32], ScoreError> {
    match r.vectors.as_slice() {
        [v] => Ok(v),
        _ => Err(ScoreError::NotSingleVector(r.id.clone())),
    }
}

pub fn score(query: &EmbeddingRecord, doc: &EmbeddingRecord, cfg: &ScorerConfig) -> Result<f64, ScoreError> {
    if query.dim() != doc.dim() {
        return Err(ScoreError::DimMismatch {
            query: query.id.clone(),
            query_dim: query.dim(),
            doc: doc.id.clone(),
            doc_dim: doc.dim(),
        });
    }
    match cfg.similarity {
        Similarity::Cosine => pair(single(query)?, single(doc)?, &query.id, &doc.id, true, true),
        Similarity::Dot => pair(
            single(query)?,
            single(doc)?,
            &query.id,
            &doc.id,
            false,
            cfg.l2_normalize_inputs,
        ),
        Similarity::MaxSim => {
            let token_cosine = cfg.maxsim_token == TokenSimilarity::Cosine;
            let mut total = 0.0;
            for q in &query.vectors {
                let mut best = f64::NEG_INFINITY;
                for d in &doc.vectors {
                    let s = pair(q, d, &query.id, &doc.id, token_cosine, cfg.l2_normalize_inputs)?;
                    best = best.max(s);
                }
                total += best;
            }
            Ok(total)
        }
    }
}
