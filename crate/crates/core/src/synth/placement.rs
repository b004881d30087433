use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{entity_rng, SynthError};
use crate::corpus::{ItemMeta, MetaIndex};
use crate::retrieval::{RankedList, RunFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    /// Language blocks in listed order, first language at the top.
    TopLoaded,
    /// Language blocks in reverse listed order.
    BottomLoaded,
    /// Round robin over languages that still have docs left.
    Alternating,
    /// Seeded shuffle of the language multiset, drawn per query.
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementSpec {
    pub k: usize,
    pub pattern: Pattern,
    /// (language, number of docs in each list)
    pub languages: Vec<(String, usize)>,
    pub seed: u64,
}

fn blocks<'a>(order: impl Iterator<Item = &'a (String, usize)>) -> Vec<&'a str> {
    order
        .flat_map(|(l, n)| std::iter::repeat_n(l.as_str(), *n))
        .collect()
}

impl PlacementSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let total: usize = self.languages.iter().map(|(_, n)| n).sum();
        if total != self.k || self.k == 0 {
            return Err(SynthError::CountMismatch {
                k: self.k,
                total,
            });
        }
        Ok(())
    }

    fn layout(&self, query_id: &str) -> Vec<&str> {
        match self.pattern {
            Pattern::TopLoaded => blocks(self.languages.iter()),
            Pattern::BottomLoaded => blocks(self.languages.iter().rev()),
            Pattern::Alternating => {
                let mut left: Vec<usize> = self.languages.iter().map(|(_, n)| *n).collect();
                let mut out = Vec::with_capacity(self.k);
                while out.len() < self.k {
                    for (i, (l, _)) in self.languages.iter().enumerate() {
                        if left[i] > 0 {
                            left[i] -= 1;
                            out.push(l.as_str());
                        }
                    }
                }
                out
            }
            Pattern::UniformRandom => {
                let mut out = blocks(self.languages.iter());
                out.shuffle(&mut entity_rng(self.seed, query_id));
                out
            }
        }
    }
}

/// `n_queries` ranked lists laid out by `spec`, with metadata naming each
/// doc's language. Doc ids are unique per query (`q0003-d07`).
pub fn gen_ranked_lists(spec: &PlacementSpec, n_queries: usize) -> Result<(RunFile, MetaIndex), SynthError> {
    spec.validate()?;
    let mut lists = Vec::with_capacity(n_queries);
    let mut meta = Vec::with_capacity(n_queries * spec.k);
    for q in 0..n_queries {
        let qid = format!("q{q:04}");
        let langs = spec.layout(&qid);
        let ids: Vec<String> = (1..=spec.k).map(|r| format!("{qid}-d{r:02}")).collect();
        for (id, lang) in ids.iter().zip(&langs) {
            meta.push(ItemMeta::text(id.clone(), *lang, "", vec![]));
        }
        lists.push(RankedList::from_ids(qid, &ids));
    }
    let meta = MetaIndex::from_items(meta).expect("generated ids are unique");
    Ok((RunFile::new(lists, spec.k), meta))
}
