//! Binary-relevance Accuracy@k and NDCG@k.

use std::collections::{BTreeMap, BTreeSet};

use super::weights::discount;
use super::MetricError;
use crate::corpus::MetaIndex;
use crate::retrieval::{RankedList, RunFile};

/// Relevant doc ids per query.
pub type Qrels = BTreeMap<String, BTreeSet<String>>;

fn relevant_for<'a>(qrels: &'a Qrels, query_id: &str) -> Result<&'a BTreeSet<String>, MetricError> {
    qrels
        .get(query_id)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| MetricError::MissingRelevance(query_id.to_owned()))
}

/// Whether any of the first `k` docs is relevant.
pub fn hit_at_k(list: &RankedList, relevant: &BTreeSet<String>, k: usize) -> bool {
    list.top(k).any(|d| relevant.contains(d))
}

pub fn ndcg_for_list(list: &RankedList, relevant: &BTreeSet<String>, k: usize) -> f64 {
    let dcg: f64 = list
        .top(k)
        .enumerate()
        .filter(|(_, d)| relevant.contains(*d))
        .map(|(i, _)| discount(i + 1))
        .sum();
    let ideal: f64 = (1..=k.min(relevant.len())).map(discount).sum();
    if ideal == 0.0 {
        0.0
    } else {
        dcg / ideal
    }
}

fn mean_over_queries(
    run: &RunFile,
    qrels: &Qrels,
    k: usize,
    per_query: impl Fn(&RankedList, &BTreeSet<String>) -> f64,
) -> Result<f64, MetricError> {
    if k == 0 {
        return Err(MetricError::InvalidCutoff);
    }
    if run.lists.is_empty() {
        return Err(MetricError::EmptyRun);
    }
    let mut total = 0.0;
    for list in &run.lists {
        total += per_query(list, relevant_for(qrels, &list.query_id)?);
    }
    Ok(total / run.lists.len() as f64)
}

/// Fraction of queries with at least one relevant doc in the top `k`.
pub fn accuracy_at_k(run: &RunFile, qrels: &Qrels, k: usize) -> Result<f64, MetricError> {
    mean_over_queries(run, qrels, k, |l, r| if hit_at_k(l, r, k) { 1.0 } else { 0.0 })
}

/// Mean NDCG@k with binary gains.
pub fn ndcg_at_k(run: &RunFile, qrels: &Qrels, k: usize) -> Result<f64, MetricError> {
    mean_over_queries(run, qrels, k, |l, r| ndcg_for_list(l, r, k))
}

/// Relevance from shared primary concept: a candidate is relevant to a
/// query when their first concept labels are equal.
pub fn qrels_by_primary_concept(queries: &MetaIndex, candidates: &MetaIndex) -> Qrels {
    let mut by_concept: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for c in candidates.iter() {
        if let Some(concept) = c.primary_concept() {
            by_concept.entry(concept).or_default().insert(c.id.clone());
        }
    }
    queries
        .iter()
        .filter_map(|q| {
            let rel = by_concept.get(q.primary_concept()?)?;
            Some((q.id.clone(), rel.clone()))
        })
        .collect()
}

/// Parses TREC qrels (`query_id iter doc_id relevance`); positive relevance counts.
pub fn parse_qrels(text: &str) -> Result<Qrels, MetricError> {
    let mut out = Qrels::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        let rel: Option<i64> = cols.get(3).and_then(|s| s.parse().ok());
        match (cols.len(), rel) {
            (4, Some(rel)) => {
                if rel > 0 {
                    out.entry(cols[0].to_owned())
                        .or_default()
                        .insert(cols[2].to_owned());
                }
            }
            _ => {
                return Err(MetricError::MalformedQrels {
                    line: i + 1,
                    text: line.to_owned(),
                })
            }
        }
    }
    Ok(out)
}
