use std::collections::BTreeMap;

use serde::Serialize;

use super::MetricError;
use crate::corpus::{Catalog, MetaIndex, Tier};
use crate::retrieval::RunFile;

/// Resource-tier counts per rank position, summed over queries.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TierHistogram {
    pub k: usize,
    /// rank (1-based) -> tier -> count.
    pub by_rank: BTreeMap<usize, BTreeMap<Tier, usize>>,
    /// tier -> count over all ranks.
    pub totals: BTreeMap<Tier, usize>,
}

impl TierHistogram {
    pub fn count(&self, rank: usize, tier: Tier) -> usize {
        self.by_rank
            .get(&rank)
            .and_then(|m| m.get(&tier))
            .copied()
            .unwrap_or(0)
    }
}

pub fn tier_histogram(
    run: &RunFile,
    meta: &MetaIndex,
    catalog: &Catalog,
    k: usize,
) -> Result<TierHistogram, MetricError> {
    let mut h = TierHistogram {
        k,
        ..Default::default()
    };
    for list in &run.lists {
        for (i, doc) in list.top(k).enumerate() {
            let lang = meta
                .language(doc)
                .ok_or_else(|| MetricError::MissingLanguageMeta(doc.to_owned()))?;
            let tier = catalog
                .tier(lang)
                .ok_or_else(|| MetricError::UnknownLanguage(lang.to_owned()))?;
            *h.by_rank.entry(i + 1).or_default().entry(tier).or_insert(0) += 1;
            *h.totals.entry(tier).or_insert(0) += 1;
        }
    }
    Ok(h)
}
