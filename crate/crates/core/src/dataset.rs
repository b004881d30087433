//! Triplet manifest assembly from a tagged pool, and similarity de-duplication.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{EmbeddingSet, ItemMeta, TripletEntry};
use crate::synth::entity_rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("dedup threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("triplets_per_query must be at least 1")]
    NoTripletsRequested,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DedupStrategy {
    KeepFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DedupConfig {
    pub threshold: f64,
    pub strategy: DedupStrategy,
}

impl Default for DedupConfig {
    fn default() -> Self {
        Self {
            threshold: 0.92,
            strategy: DedupStrategy::KeepFirst,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedItem {
    pub id: String,
    pub duplicate_of: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DedupOutcome {
    pub kept: Vec<String>,
    pub dropped: Vec<DroppedItem>,
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        v
    } else {
        v.into_iter().map(|x| x / n).collect()
    }
}

/// Greedy keep-first scan in ascending id order. An item is dropped when its
/// cosine similarity to some already kept item reaches the threshold; the
/// most similar kept item is recorded as the witness. Multi-vector records
/// are mean-pooled; zero vectors are never duplicates.
pub fn dedup(set: &EmbeddingSet, cfg: &DedupConfig) -> Result<DedupOutcome, DatasetError> {
    if !(cfg.threshold > 0.0 && cfg.threshold <= 1.0) {
        return Err(DatasetError::InvalidThreshold(cfg.threshold));
    }
    let mut items: Vec<(&str, Vec<f64>)> = set
        .records()
        .iter()
        .map(|r| (r.id.as_str(), unit(r.mean_pooled())))
        .collect();
    items.sort_by(|a, b| a.0.cmp(b.0));

    let mut kept: Vec<usize> = Vec::new();
    let mut out = DedupOutcome::default();
    for (i, (id, v)) in items.iter().enumerate() {
        let best = kept
            .par_iter()
            .map(|&j| {
                let sim: f64 = v.iter().zip(&items[j].1).map(|(a, b)| a * b).sum();
                (sim, j)
            })
            .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
        match best {
            Some((sim, j)) if sim >= cfg.threshold => out.dropped.push(DroppedItem {
                id: id.to_string(),
                duplicate_of: items[j].0.to_owned(),
                similarity: sim,
            }),
            _ => {
                kept.push(i);
                out.kept.push(id.to_string());
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssemblyConfig {
    pub seed: u64,
    pub triplets_per_query: usize,
    /// Also require the non candidate's country to differ from the sem candidate's.
    pub require_distinct_countries: bool,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            triplets_per_query: 1,
            require_distinct_countries: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub id: String,
    pub text: String,
    pub language: String,
    pub country: String,
    pub concept: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    SemEmpty,
    CulEmpty,
    NonEmpty,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::SemEmpty => "sem_empty",
            SkipReason::CulEmpty => "cul_empty",
            SkipReason::NonEmpty => "non_empty",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedQuery {
    pub query_id: String,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Assembly {
    pub entries: Vec<TripletEntry>,
    pub skipped: Vec<SkippedQuery>,
}

/// Draws `triplets_per_query` triplets for every query, in query order.
///
/// The pool is sorted by id before sampling and each query draws from its
/// own seeded stream. The result does not depend on pool order.
pub fn assemble_triplets(
    pool: &[ItemMeta],
    queries: &[QuerySpec],
    cfg: &AssemblyConfig,
) -> Result<Assembly, DatasetError> {
    if cfg.triplets_per_query == 0 {
        return Err(DatasetError::NoTripletsRequested);
    }
    let mut sorted: Vec<&ItemMeta> = pool.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));

    let mut out = Assembly::default();
    for q in queries {
        let sem: Vec<&ItemMeta> = sorted
            .iter()
            .copied()
            .filter(|m| m.has_concept(&q.concept) && m.country != q.country)
            .collect();
        let cul: Vec<&ItemMeta> = sorted
            .iter()
            .copied()
            .filter(|m| m.country == q.country && !m.has_concept(&q.concept))
            .collect();
        let non: Vec<&ItemMeta> = sorted
            .iter()
            .copied()
            .filter(|m| m.country != q.country && !m.has_concept(&q.concept))
            .collect();
        let reason = if sem.is_empty() {
            Some(SkipReason::SemEmpty)
        } else if cul.is_empty() {
            Some(SkipReason::CulEmpty)
        } else if non.is_empty() {
            Some(SkipReason::NonEmpty)
        } else {
            None
        };
        if let Some(reason) = reason {
            out.skipped.push(SkippedQuery {
                query_id: q.id.clone(),
                reason,
            });
            continue;
        }

        let mut rng = entity_rng(cfg.seed, &q.id);
        let mut drawn = Vec::with_capacity(cfg.triplets_per_query);
        for _ in 0..cfg.triplets_per_query {
            let s = sem[rng.gen_range(0..sem.len())];
            let c = cul[rng.gen_range(0..cul.len())];
            let non_pool: Vec<&ItemMeta> = if cfg.require_distinct_countries {
                non.iter().copied().filter(|m| m.country != s.country).collect()
            } else {
                non.clone()
            };
            if non_pool.is_empty() {
                break;
            }
            let n = non_pool[rng.gen_range(0..non_pool.len())];
            drawn.push(TripletEntry {
                query_id: q.id.clone(),
                query_text: q.text.clone(),
                query_language: q.language.clone(),
                query_country: q.country.clone(),
                concept: q.concept.clone(),
                sem_id: s.id.clone(),
                cul_id: c.id.clone(),
                non_id: n.id.clone(),
            });
        }
        if drawn.is_empty() {
            out.skipped.push(SkippedQuery {
                query_id: q.id.clone(),
                reason: SkipReason::NonEmpty,
            });
        }
        out.entries.extend(drawn);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ManifestStats {
    pub total: usize,
    pub by_country: BTreeMap<String, usize>,
    pub by_concept: BTreeMap<String, usize>,
    pub by_language: BTreeMap<String, usize>,
}

pub fn manifest_stats(manifest: &[TripletEntry]) -> ManifestStats {
    let mut s = ManifestStats {
        total: manifest.len(),
        ..Default::default()
    };
    for e in manifest {
        *s.by_country.entry(e.query_country.clone()).or_insert(0) += 1;
        *s.by_concept.entry(e.concept.clone()).or_insert(0) += 1;
        *s.by_language.entry(e.query_language.clone()).or_insert(0) += 1;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{check_triplet, EmbeddingRecord, MetaIndex};

    fn img(id: &str, country: &str, concepts: &[&str]) -> ItemMeta {
        ItemMeta::image(id, country, concepts.iter().map(|c| c.to_string()).collect())
    }

    fn query(id: &str, country: &str, concept: &str) -> QuerySpec {
        QuerySpec {
            id: id.into(),
            text: format!("a photo of {concept}"),
            language: "en".into(),
            country: country.into(),
            concept: concept.into(),
        }
    }

    fn set(vectors: &[(&str, Vec<f32>)]) -> EmbeddingSet {
        let dim = vectors[0].1.len();
        EmbeddingSet::from_records(
            dim,
            vectors.iter().map(|(id, v)| EmbeddingRecord::single(*id, v.clone())).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_vectors_drop_the_second() {
        let out = dedup(&set(&[("b", vec![1.0, 2.0]), ("a", vec![1.0, 2.0])]), &DedupConfig::default()).unwrap();
        assert_eq!(out.kept, ["a"]);
        assert_eq!(out.dropped.len(), 1);
        assert_eq!(out.dropped[0].id, "b");
        assert_eq!(out.dropped[0].duplicate_of, "a");
        assert!((out.dropped[0].similarity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_one_keeps_near_duplicates() {
        let cfg = DedupConfig {
            threshold: 1.0,
            ..Default::default()
        };
        let out = dedup(&set(&[("a", vec![1.0, 0.0]), ("b", vec![1.0, 1e-3])]), &cfg).unwrap();
        assert_eq!(out.kept, ["a", "b"]);
    }

    #[test]
    fn threshold_is_validated() {
        let cfg = DedupConfig {
            threshold: 0.0,
            ..Default::default()
        };
        assert!(dedup(&set(&[("a", vec![1.0])]), &cfg).is_err());
    }

    #[test]
    fn unique_candidates_force_the_triplet() {
        let pool = [
            img("sem", "JPN", &["rice"]),
            img("cul", "USA", &["car"]),
            img("non", "FRA", &["bread"]),
            img("own", "USA", &["rice"]),
        ];
        let out = assemble_triplets(&pool, &[query("q", "USA", "rice")], &AssemblyConfig::default()).unwrap();
        assert_eq!(out.entries.len(), 1);
        let e = &out.entries[0];
        assert_eq!((e.sem_id.as_str(), e.cul_id.as_str(), e.non_id.as_str()), ("sem", "cul", "non"));
    }

    #[test]
    fn concept_only_at_home_is_skipped() {
        let pool = [img("a", "USA", &["rice"]), img("b", "USA", &["car"]), img("c", "FRA", &["bread"])];
        let out = assemble_triplets(&pool, &[query("q", "USA", "rice")], &AssemblyConfig::default()).unwrap();
        assert!(out.entries.is_empty());
        assert_eq!(out.skipped[0].reason, SkipReason::SemEmpty);
        assert_eq!(out.skipped[0].reason.as_str(), "sem_empty");
    }

    #[test]
    fn secondary_concepts_are_excluded_from_cul() {
        let pool = [
            img("sem", "JPN", &["rice"]),
            img("cul_leaky", "USA", &["car", "rice"]),
            img("non", "FRA", &["bread"]),
        ];
        let out = assemble_triplets(&pool, &[query("q", "USA", "rice")], &AssemblyConfig::default()).unwrap();
        assert_eq!(out.skipped[0].reason, SkipReason::CulEmpty);
    }

    #[test]
    fn pool_order_does_not_matter_and_entries_are_valid() {
        let countries = ["USA", "JPN", "FRA", "IND"];
        let concepts = ["rice", "car", "bread", "tea", "kite"];
        let mut pool = Vec::new();
        for (i, c) in countries.iter().enumerate() {
            for (j, k) in concepts.iter().enumerate() {
                pool.push(img(&format!("img{i}{j}"), c, &[k]));
            }
        }
        let queries: Vec<QuerySpec> = countries
            .iter()
            .flat_map(|c| concepts.iter().map(move |k| query(&format!("{c}-{k}"), c, k)))
            .collect();
        let cfg = AssemblyConfig {
            seed: 5,
            triplets_per_query: 3,
            require_distinct_countries: true,
        };
        let a = assemble_triplets(&pool, &queries, &cfg).unwrap();
        pool.reverse();
        let b = assemble_triplets(&pool, &queries, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.entries.len(), 60);
        let index = MetaIndex::from_items(pool).unwrap();
        for e in &a.entries {
            assert!(check_triplet(e, &index).is_empty(), "{e:?}");
            assert_ne!(index.get(&e.non_id).unwrap().country, index.get(&e.sem_id).unwrap().country);
        }
    }

    #[test]
    fn stats_by_hand() {
        assert_eq!(manifest_stats(&[]), ManifestStats::default());
        let e = |country: &str, concept: &str| TripletEntry {
            query_id: "q".into(),
            query_text: String::new(),
            query_language: "en".into(),
            query_country: country.into(),
            concept: concept.into(),
            sem_id: "s".into(),
            cul_id: "c".into(),
            non_id: "n".into(),
        };
        let m = [e("USA", "rice"), e("USA", "car"), e("JPN", "rice"), e("FRA", "rice"), e("USA", "rice")];
        let s = manifest_stats(&m);
        assert_eq!(s.total, 5);
        assert_eq!(s.by_country["USA"], 3);
        assert_eq!(s.by_country["JPN"], 1);
        assert_eq!(s.by_concept["rice"], 4);
        assert_eq!(s.by_concept["car"], 1);
        assert_eq!(s.by_language["en"], 5);
    }
}
