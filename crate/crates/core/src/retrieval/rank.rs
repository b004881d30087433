use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scorer::{score, ScoreError, ScorerConfig};
use crate::corpus::{EmbeddingRecord, EmbeddingSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub doc_id: String,
    pub score: f64,
}

/// One query's ranking. Rank `i` (1-based) is `entries[i - 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub query_id: String,
    pub entries: Vec<RankedEntry>,
}

impl RankedList {
    pub fn new(query_id: impl Into<String>, entries: Vec<RankedEntry>) -> Self {
        Self {
            query_id: query_id.into(),
            entries,
        }
    }

    /// Builds a list from ids already in rank order, with descending scores.
    pub fn from_ids<S: AsRef<str>>(query_id: impl Into<String>, ids: &[S]) -> Self {
        let n = ids.len();
        let entries = ids
            .iter()
            .enumerate()
            .map(|(i, id)| RankedEntry {
                doc_id: id.as_ref().to_owned(),
                score: (n - i) as f64,
            })
            .collect();
        Self::new(query_id, entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Doc ids of the first `min(k, len)` ranks.
    pub fn top(&self, k: usize) -> impl Iterator<Item = &str> {
        self.entries.iter().take(k).map(|e| e.doc_id.as_str())
    }

    pub fn truncated(&self, k: usize) -> Self {
        Self::new(self.query_id.clone(), self.entries.iter().take(k).cloned().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFile {
    pub lists: Vec<RankedList>,
    /// Cutoff the run was generated with; every list has at most `k` entries.
    pub k: usize,
}

impl RunFile {
    pub fn new(lists: Vec<RankedList>, k: usize) -> Self {
        Self { lists, k }
    }

    pub fn get(&self, query_id: &str) -> Option<&RankedList> {
        self.lists.iter().find(|l| l.query_id == query_id)
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }
}

/// Descending score, then ascending doc id.
fn rank_order(a: &RankedEntry, b: &RankedEntry) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.doc_id.cmp(&b.doc_id))
}

pub fn top_k(
    query: &EmbeddingRecord,
    candidates: &EmbeddingSet,
    k: usize,
    cfg: &ScorerConfig,
) -> Result<RankedList, ScoreError> {
    if k == 0 {
        return Err(ScoreError::InvalidCutoff);
    }
    if candidates.is_empty() {
        return Err(ScoreError::EmptyCandidateSet);
    }
    let mut scored = candidates
        .records()
        .iter()
        .map(|doc| {
            score(query, doc, cfg).map(|score| RankedEntry {
                doc_id: doc.id.clone(),
                score,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, rank_order);
        scored.truncate(k);
    }
    scored.sort_unstable_by(rank_order);
    Ok(RankedList::new(query.id.clone(), scored))
}

/// One ranked list per query, in query-file order.
///
/// Queries are scored in parallel on the current rayon pool; the output does
/// not depend on the number of threads.
pub fn build_run(
    queries: &EmbeddingSet,
    candidates: &EmbeddingSet,
    k: usize,
    cfg: &ScorerConfig,
) -> Result<RunFile, ScoreError> {
    let lists = queries
        .records()
        .par_iter()
        .map(|q| top_k(q, candidates, k, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RunFile::new(lists, k))
}

/// The three similarity scores for one forced-choice trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletScores {
    pub query_id: String,
    pub s_sem: f64,
    pub s_cul: f64,
    pub s_non: f64,
}

pub fn score_triplet(
    query: &EmbeddingRecord,
    sem: &EmbeddingRecord,
    cul: &EmbeddingRecord,
    non: &EmbeddingRecord,
    cfg: &ScorerConfig,
) -> Result<TripletScores, ScoreError> {
    Ok(TripletScores {
        query_id: query.id.clone(),
        s_sem: score(query, sem, cfg)?,
        s_cul: score(query, cul, cfg)?,
        s_non: score(query, non, cfg)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(rows: &[(&str, &[f32])]) -> EmbeddingSet {
        EmbeddingSet::new(
            rows[0].1.len(),
            false,
            rows.iter()
                .map(|(id, v)| EmbeddingRecord::single(*id, v.to_vec()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn k_beyond_pool_returns_everything_sorted() {
        let c = set(&[("a", &[0.0, 1.0]), ("b", &[1.0, 0.0]), ("c", &[1.0, 1.0])]);
        let q = EmbeddingRecord::single("q", vec![1.0, 0.0]);
        let l = top_k(&q, &c, 10, &ScorerConfig::cosine()).unwrap();
        let ids: Vec<_> = l.top(10).collect();
        assert_eq!(ids, ["b", "c", "a"]);
    }

    #[test]
    fn ties_break_by_doc_id() {
        let c = set(&[("zeta", &[1.0, 0.0]), ("alpha", &[2.0, 0.0])]);
        let q = EmbeddingRecord::single("q", vec![1.0, 0.0]);
        let l = top_k(&q, &c, 2, &ScorerConfig::cosine()).unwrap();
        assert_eq!(l.top(2).collect::<Vec<_>>(), ["alpha", "zeta"]);
        assert_eq!(l.entries[0].score, l.entries[1].score);
    }

    #[test]
    fn rejects_empty_pool_and_zero_k() {
        let q = EmbeddingRecord::single("q", vec![1.0]);
        let empty = EmbeddingSet::new(1, false, vec![]).unwrap();
        assert_eq!(
            top_k(&q, &empty, 1, &ScorerConfig::dot()),
            Err(ScoreError::EmptyCandidateSet)
        );
        let c = set(&[("a", &[1.0])]);
        assert_eq!(top_k(&q, &c, 0, &ScorerConfig::dot()), Err(ScoreError::InvalidCutoff));
    }

    #[test]
    fn single_query_single_candidate_run() {
        let q = set(&[("q", &[1.0, 0.0])]);
        let c = set(&[("a", &[0.5, 0.5])]);
        let run = build_run(&q, &c, 5, &ScorerConfig::cosine()).unwrap();
        assert_eq!(run.lists.len(), 1);
        assert_eq!(run.lists[0].len(), 1);
    }

    #[test]
    fn triplet_scores() {
        let q = EmbeddingRecord::single("q", vec![1.0, 0.0]);
        let sem = EmbeddingRecord::single("s", vec![1.0, 0.0]);
        let cul = EmbeddingRecord::single("c", vec![0.0, 1.0]);
        let non = EmbeddingRecord::single("n", vec![-1.0, 0.0]);
        let t = score_triplet(&q, &sem, &cul, &non, &ScorerConfig::cosine()).unwrap();
        assert_eq!((t.s_sem, t.s_cul, t.s_non), (1.0, 0.0, -1.0));
        let t = score_triplet(&q, &sem, &sem, &sem, &ScorerConfig::cosine()).unwrap();
        assert!(t.s_sem == t.s_cul && t.s_cul == t.s_non);
    }
}
