//! Exact brute-force retrieval: scoring, top-k ranking, run files and
//! forced-choice triplet scoring.

mod rank;
mod scorer;
mod trec;

pub use rank::{build_run, score_triplet, top_k, RankedEntry, RankedList, RunFile, TripletScores};
pub use scorer::{score, ScoreError, ScorerConfig, Similarity, TokenSimilarity};
pub use trec::{encode_run, load_run, parse_run, write_run, RunError};
