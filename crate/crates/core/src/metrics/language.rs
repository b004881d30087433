//! Language-share distributions and the KL-based bias scores.
//!
//! Logs are natural (nats). The expected distribution may cover any number
//! of languages; KL sums `p * ln(p / q)` over its support.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::weights::{RankWeights, Weighting};
use super::MetricError;
use crate::corpus::MetaIndex;
use crate::retrieval::{RankedList, RunFile};

const SUM_TOLERANCE: f64 = 1e-9;

/// Expected language proportions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageDistribution {
    p: BTreeMap<String, f64>,
}

impl LanguageDistribution {
    pub fn new(p: BTreeMap<String, f64>) -> Result<Self, MetricError> {
        if p.values().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(MetricError::InvalidDistribution("negative or non-finite probability".into()));
        }
        let total: f64 = p.values().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(MetricError::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(Self { p })
    }

    pub fn uniform<I, S>(languages: I) -> Result<Self, MetricError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let langs: std::collections::BTreeSet<String> = languages.into_iter().map(Into::into).collect();
        if langs.is_empty() {
            return Err(MetricError::InvalidDistribution("no languages".into()));
        }
        let share = 1.0 / langs.len() as f64;
        Ok(Self {
            p: langs.into_iter().map(|l| (l, share)).collect(),
        })
    }

    pub fn get(&self, language: &str) -> f64 {
        self.p.get(language).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.p.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Languages with positive expected mass.
    pub fn support(&self) -> impl Iterator<Item = &str> {
        self.p.iter().filter(|(_, &v)| v > 0.0).map(|(k, _)| k.as_str())
    }
}

/// Additive smoothing applied to the expected distribution's support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    pub epsilon: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self { epsilon: 1e-6 }
    }
}

/// Observed language proportions in the top of one ranked list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedDistribution {
    pub q: BTreeMap<String, f64>,
    pub weighted: bool,
    /// Depth actually used: `min(k, list length)`.
    pub k: usize,
}

impl ObservedDistribution {
    pub fn get(&self, language: &str) -> f64 {
        self.q.get(language).copied().unwrap_or(0.0)
    }

    /// Adds `epsilon` to every language in `expected`'s support and renormalizes.
    ///
    /// With `epsilon == 0` the proportions are returned unchanged.
    pub fn smoothed(&self, expected: &LanguageDistribution, smoothing: SmoothingConfig) -> Self {
        let eps = smoothing.epsilon;
        if eps == 0.0 {
            return self.clone();
        }
        let mut q = self.q.clone();
        for lang in expected.support() {
            *q.entry(lang.to_owned()).or_insert(0.0) += eps;
        }
        let total: f64 = q.values().sum();
        q.values_mut().for_each(|v| *v /= total);
        Self {
            q,
            weighted: self.weighted,
            k: self.k,
        }
    }
}

/// Language shares over the first `min(k, len)` ranks of `list`.
///
/// Uniform weighting yields plain count fractions; discounted weighting
/// yields the rank-weighted share `sum w(i)[doc_i is l] / sum w(i)`.
pub fn observed_proportions(
    list: &RankedList,
    meta: &MetaIndex,
    k: usize,
    weighting: Weighting,
) -> Result<ObservedDistribution, MetricError> {
    let depth = k.min(list.len());
    if depth == 0 {
        return Err(MetricError::EmptyList(list.query_id.clone()));
    }
    let weights = RankWeights::new(depth, weighting);
    observed_with_weights(list, meta, &weights, weighting == Weighting::Discounted)
}

/// As [`observed_proportions`] with caller-supplied weights over the first
/// `weights.k()` ranks.
pub fn observed_with_weights(
    list: &RankedList,
    meta: &MetaIndex,
    weights: &RankWeights,
    weighted: bool,
) -> Result<ObservedDistribution, MetricError> {
    let depth = weights.k().min(list.len());
    if depth == 0 {
        return Err(MetricError::EmptyList(list.query_id.clone()));
    }
    let mut mass: BTreeMap<String, f64> = BTreeMap::new();
    let mut total = 0.0;
    for (i, doc) in list.top(depth).enumerate() {
        let lang = meta
            .language(doc)
            .ok_or_else(|| MetricError::MissingLanguageMeta(doc.to_owned()))?;
        let w = weights.weight(i + 1);
        *mass.entry(lang.to_owned()).or_insert(0.0) += w;
        total += w;
    }
    mass.values_mut().for_each(|v| *v /= total);
    Ok(ObservedDistribution {
        q: mass,
        weighted,
        k: depth,
    })
}

/// `sum_l p_l ln(p_l / q_l)` over the support of `p`, in nats.
pub fn kl_divergence(p: &LanguageDistribution, q: &ObservedDistribution) -> Result<f64, MetricError> {
    let mut total = 0.0;
    for (lang, pl) in p.iter() {
        if pl == 0.0 {
            continue;
        }
        let ql = q.get(lang);
        if ql <= 0.0 {
            return Err(MetricError::UnsmoothedZero(lang.to_owned()));
        }
        total += pl * (pl / ql).ln();
    }
    Ok(total.max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryBias {
    pub query_id: String,
    pub lbkl: f64,
    pub dlbkl: f64,
}

/// Per-query LBKL and DLBKL at one cutoff, with their means over queries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub k: usize,
    pub smoothing: SmoothingConfig,
    /// In run order.
    pub per_query: Vec<QueryBias>,
    pub mean_lbkl: f64,
    pub mean_dlbkl: f64,
}

impl BiasReport {
    pub fn get(&self, query_id: &str) -> Option<&QueryBias> {
        self.per_query.iter().find(|q| q.query_id == query_id)
    }
}

/// KL of `expected` against the smoothed observed shares of one list.
pub fn list_bias(
    list: &RankedList,
    meta: &MetaIndex,
    expected: &LanguageDistribution,
    k: usize,
    weighting: Weighting,
    smoothing: SmoothingConfig,
) -> Result<f64, MetricError> {
    let q = observed_proportions(list, meta, k, weighting)?.smoothed(expected, smoothing);
    kl_divergence(expected, &q)
}

/// LBKL (uniform weights) and DLBKL (discounted weights) side by side.
pub fn bias_report(
    run: &RunFile,
    meta: &MetaIndex,
    expected: &LanguageDistribution,
    k: usize,
    smoothing: SmoothingConfig,
) -> Result<BiasReport, MetricError> {
    if k == 0 {
        return Err(MetricError::InvalidCutoff);
    }
    if run.lists.is_empty() {
        return Err(MetricError::EmptyRun);
    }
    let per_query = run
        .lists
        .iter()
        .map(|list| {
            Ok(QueryBias {
                query_id: list.query_id.clone(),
                lbkl: list_bias(list, meta, expected, k, Weighting::Uniform, smoothing)?,
                dlbkl: list_bias(list, meta, expected, k, Weighting::Discounted, smoothing)?,
            })
        })
        .collect::<Result<Vec<_>, MetricError>>()?;
    let n = per_query.len() as f64;
    let mean_lbkl = per_query.iter().map(|q| q.lbkl).sum::<f64>() / n;
    let mean_dlbkl = per_query.iter().map(|q| q.dlbkl).sum::<f64>() / n;
    Ok(BiasReport {
        k,
        smoothing,
        per_query,
        mean_lbkl,
        mean_dlbkl,
    })
}

/// Mean LBKL over the run.
pub fn lbkl(
    run: &RunFile,
    meta: &MetaIndex,
    expected: &LanguageDistribution,
    k: usize,
    smoothing: SmoothingConfig,
) -> Result<f64, MetricError> {
    Ok(bias_report(run, meta, expected, k, smoothing)?.mean_lbkl)
}

/// Mean DLBKL over the run.
pub fn dlbkl(
    run: &RunFile,
    meta: &MetaIndex,
    expected: &LanguageDistribution,
    k: usize,
    smoothing: SmoothingConfig,
) -> Result<f64, MetricError> {
    Ok(bias_report(run, meta, expected, k, smoothing)?.mean_dlbkl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ItemMeta;

    fn meta(pairs: &[(&str, &str)]) -> MetaIndex {
        MetaIndex::from_items(
            pairs
                .iter()
                .map(|(id, lang)| ItemMeta::text(*id, *lang, "X", vec![])),
        )
        .unwrap()
    }

    fn dist(pairs: &[(&str, f64)]) -> LanguageDistribution {
        LanguageDistribution::new(pairs.iter().map(|(l, p)| (l.to_string(), *p)).collect()).unwrap()
    }

    fn observed(pairs: &[(&str, f64)]) -> ObservedDistribution {
        ObservedDistribution {
            q: pairs.iter().map(|(l, p)| (l.to_string(), *p)).collect(),
            weighted: false,
            k: 0,
        }
    }

    #[test]
    fn unweighted_two_languages() {
        let m = meta(&[("d1", "a"), ("d2", "b")]);
        let list = RankedList::from_ids("q", &["d1", "d2"]);
        let q = observed_proportions(&list, &m, 2, Weighting::Uniform).unwrap();
        assert_eq!(q.get("a"), 0.5);
        assert_eq!(q.get("b"), 0.5);
    }

    #[test]
    fn weighted_two_languages() {
        let m = meta(&[("d1", "a"), ("d2", "b")]);
        let list = RankedList::from_ids("q", &["d1", "d2"]);
        let q = observed_proportions(&list, &m, 2, Weighting::Discounted).unwrap();
        assert!((q.get("a") - 0.61315).abs() < 1e-4);
        assert!((q.get("b") - 0.38685).abs() < 1e-4);
        assert!(q.weighted);
    }

    #[test]
    fn single_language_top() {
        let m = meta(&[("d1", "a"), ("d2", "a"), ("d3", "a")]);
        let list = RankedList::from_ids("q", &["d1", "d2", "d3"]);
        let q = observed_proportions(&list, &m, 3, Weighting::Uniform).unwrap();
        assert_eq!(q.q.len(), 1);
        assert_eq!(q.get("a"), 1.0);
    }

    #[test]
    fn missing_language() {
        let m = meta(&[("d1", "a")]);
        let list = RankedList::from_ids("q", &["d1", "d9"]);
        assert_eq!(
            observed_proportions(&list, &m, 2, Weighting::Uniform),
            Err(MetricError::MissingLanguageMeta("d9".into()))
        );
    }

    #[test]
    fn kl_identity_and_closed_forms() {
        let p = dist(&[("a", 0.5), ("b", 0.5)]);
        assert_eq!(kl_divergence(&p, &observed(&[("a", 0.5), ("b", 0.5)])).unwrap(), 0.0);

        let a = 1.0 / (1.0 + 1.0 / 3f64.log2());
        let kl = kl_divergence(&p, &observed(&[("a", a), ("b", 1.0 - a)])).unwrap();
        assert!((kl - 0.02629).abs() < 1e-4, "{kl}");

        let p = dist(&[("a", 1.0)]);
        let kl = kl_divergence(&p, &observed(&[("a", 0.5), ("b", 0.5)])).unwrap();
        assert!((kl - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn unsmoothed_zero_is_an_error() {
        let p = dist(&[("a", 0.5), ("b", 0.5)]);
        assert_eq!(
            kl_divergence(&p, &observed(&[("a", 1.0)])),
            Err(MetricError::UnsmoothedZero("b".into()))
        );
    }

    #[test]
    fn perfectly_proportional_run_has_zero_bias() {
        let m = meta(&[("d1", "a"), ("d2", "b"), ("d3", "a"), ("d4", "b")]);
        let run = RunFile::new(
            vec![
                RankedList::from_ids("q1", &["d1", "d2"]),
                RankedList::from_ids("q2", &["d4", "d3"]),
            ],
            2,
        );
        let p = dist(&[("a", 0.5), ("b", 0.5)]);
        let r = bias_report(&run, &m, &p, 2, SmoothingConfig { epsilon: 0.0 }).unwrap();
        assert_eq!(r.mean_lbkl, 0.0);
    }

    #[test]
    fn all_one_language_with_epsilon() {
        let ids: Vec<String> = (0..10).map(|i| format!("d{i}")).collect();
        let m = MetaIndex::from_items(ids.iter().map(|id| ItemMeta::text(id.as_str(), "a", "X", vec![]))).unwrap();
        let run = RunFile::new(vec![RankedList::from_ids("q", &ids)], 10);
        let p = dist(&[("a", 0.5), ("b", 0.5)]);
        let eps = 1e-6;
        // Smoothed shares: a = (1 + eps) / (1 + 2 eps), b = eps / (1 + 2 eps).
        let qa: f64 = (1.0 + eps) / (1.0 + 2.0 * eps);
        let qb: f64 = eps / (1.0 + 2.0 * eps);
        let oracle = 0.5 * (0.5 / qa).ln() + 0.5 * (0.5 / qb).ln();
        let r = bias_report(&run, &m, &p, 10, SmoothingConfig { epsilon: eps }).unwrap();
        assert!((r.mean_lbkl - oracle).abs() < 1e-12);
        assert!((r.mean_lbkl - 6.2146).abs() < 0.01, "{}", r.mean_lbkl);
        // No rank structure to exploit: one language everywhere.
        assert_eq!(r.mean_lbkl, r.mean_dlbkl);
    }

    #[test]
    fn mean_is_per_query_average() {
        let m = meta(&[("d1", "a"), ("d2", "b"), ("d3", "a")]);
        let run = RunFile::new(
            vec![
                RankedList::from_ids("q1", &["d1", "d2"]),
                RankedList::from_ids("q2", &["d1", "d3"]),
            ],
            2,
        );
        let p = dist(&[("a", 0.5), ("b", 0.5)]);
        let r = bias_report(&run, &m, &p, 2, SmoothingConfig::default()).unwrap();
        let (x, y) = (r.per_query[0].lbkl, r.per_query[1].lbkl);
        assert_eq!(r.mean_lbkl, (x + y) / 2.0);
    }

    #[test]
    fn swapping_ranks_moves_only_the_discounted_score() {
        let m = meta(&[("d1", "a"), ("d2", "b")]);
        let p = dist(&[("a", 0.7), ("b", 0.3)]);
        let s = SmoothingConfig::default();
        let ab = RunFile::new(vec![RankedList::from_ids("q", &["d1", "d2"])], 2);
        let ba = RunFile::new(vec![RankedList::from_ids("q", &["d2", "d1"])], 2);
        let (x, y) = (bias_report(&ab, &m, &p, 2, s).unwrap(), bias_report(&ba, &m, &p, 2, s).unwrap());
        assert_eq!(x.mean_lbkl, y.mean_lbkl);
        assert_ne!(x.mean_dlbkl, y.mean_dlbkl);
    }

    #[test]
    fn short_lists_use_their_own_length() {
        let m = meta(&[("d1", "a"), ("d2", "b")]);
        let list = RankedList::from_ids("q", &["d1", "d2"]);
        let q = observed_proportions(&list, &m, 10, Weighting::Discounted).unwrap();
        assert_eq!(q.k, 2);
        assert!((q.q.values().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distribution_validation() {
        assert!(LanguageDistribution::new([("a".to_string(), 0.7)].into()).is_err());
        assert!(LanguageDistribution::new([("a".to_string(), -0.5), ("b".to_string(), 1.5)].into()).is_err());
        let u = LanguageDistribution::uniform(["b", "a", "a"]).unwrap();
        assert_eq!(u.get("a"), 0.5);
    }
}
