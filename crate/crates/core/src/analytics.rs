//! Cluster structure of unimodal embeddings (silhouette per label) and its
//! correlation with per-group self-preference scores.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AnnotatedSet, ItemMeta};
use crate::triplet_eval::SpValue;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticsError {
    #[error("silhouette needs at least two distinct labels")]
    SingleLabelOnly,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least two pairs, got {0}")]
    TooFewPairs(usize),
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("item {0:?} has a zero vector and cannot be normalized")]
    ZeroVector(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKey {
    Language,
    Country,
}

impl LabelKey {
    pub fn of<'a>(&self, m: &'a ItemMeta) -> &'a str {
        match self {
            LabelKey::Language => &m.language,
            LabelKey::Country => &m.country,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Euclidean,
    CosineDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SilhouetteConfig {
    pub distance: Distance,
    /// Scale every (mean-pooled) vector to unit length first.
    pub l2_normalize: bool,
}

impl Default for SilhouetteConfig {
    fn default() -> Self {
        Self {
            distance: Distance::Euclidean,
            l2_normalize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelSilhouette {
    pub mean: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SilhouetteReport {
    pub per_item: BTreeMap<String, f64>,
    pub per_label: BTreeMap<String, LabelSilhouette>,
}

fn distance(a: &[f64], b: &[f64], d: Distance) -> f64 {
    match d {
        Distance::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        Distance::CosineDistance => {
            let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
            for (x, y) in a.iter().zip(b) {
                ab += x * y;
                aa += x * x;
                bb += y * y;
            }
            let denom = (aa * bb).sqrt();
            if denom == 0.0 {
                1.0
            } else {
                1.0 - ab / denom
            }
        }
    }
}

/// Silhouette value of every point.
///
/// Points alone in their label, and points with `a = b = 0`, score 0.
pub fn silhouette_scores<L: Ord + Sync>(
    points: &[Vec<f64>],
    labels: &[L],
    metric: Distance,
) -> Result<Vec<f64>, AnalyticsError> {
    if points.len() != labels.len() {
        return Err(AnalyticsError::LengthMismatch(points.len(), labels.len()));
    }
    let distinct: BTreeSet<&L> = labels.iter().collect();
    if distinct.len() < 2 {
        return Err(AnalyticsError::SingleLabelOnly);
    }
    let group_of: Vec<usize> = labels
        .iter()
        .map(|l| distinct.iter().position(|d| *d == l).expect("label present"))
        .collect();
    let mut sizes = vec![0usize; distinct.len()];
    for &g in &group_of {
        sizes[g] += 1;
    }
    Ok((0..points.len())
        .into_par_iter()
        .map(|i| {
            let own = group_of[i];
            if sizes[own] == 1 {
                return 0.0;
            }
            let mut sums = vec![0.0f64; sizes.len()];
            for (j, p) in points.iter().enumerate() {
                if j != i {
                    sums[group_of[j]] += distance(&points[i], p, metric);
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..sizes.len())
                .filter(|&g| g != own)
                .map(|g| sums[g] / sizes[g] as f64)
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m == 0.0 {
                0.0
            } else {
                (b - a) / m
            }
        })
        .collect())
}

/// Silhouette over the annotated items grouped by `key`. Records are
/// mean-pooled to one vector; items without a label value are skipped.
pub fn silhouette(
    set: &AnnotatedSet,
    key: LabelKey,
    cfg: SilhouetteConfig,
) -> Result<SilhouetteReport, AnalyticsError> {
    let mut ids = Vec::new();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (rec, meta) in set.annotated() {
        let label = key.of(meta);
        if label.is_empty() {
            continue;
        }
        let mut v = rec.mean_pooled();
        if cfg.l2_normalize {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n == 0.0 {
                return Err(AnalyticsError::ZeroVector(rec.id.clone()));
            }
            v.iter_mut().for_each(|x| *x /= n);
        }
        ids.push(rec.id.clone());
        points.push(v);
        labels.push(label.to_owned());
    }
    let scores = silhouette_scores(&points, &labels, cfg.distance)?;
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for (label, s) in labels.iter().zip(&scores) {
        let e = acc.entry(label.clone()).or_insert((0.0, 0));
        e.0 += s;
        e.1 += 1;
    }
    Ok(SilhouetteReport {
        per_item: ids.into_iter().zip(scores).collect(),
        per_label: acc
            .into_iter()
            .map(|(l, (sum, n))| (l, LabelSilhouette { mean: sum / n as f64, n }))
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub n: usize,
}

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<CorrelationResult, AnalyticsError> {
    if xs.len() != ys.len() {
        return Err(AnalyticsError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(AnalyticsError::TooFewPairs(n));
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(AnalyticsError::ZeroVariance("xs"));
    }
    if syy == 0.0 {
        return Err(AnalyticsError::ZeroVariance("ys"));
    }
    Ok(CorrelationResult {
        r: (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0),
        n,
    })
}

/// One group's SP next to its text and (optionally) image silhouette.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpSilhouetteRow {
    pub group: String,
    pub sp: SpValue,
    pub ts: f64,
    pub is: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpSilhouetteCorrelation {
    pub rows: Vec<SpSilhouetteRow>,
    /// SP vs text silhouette, over rows with finite SP.
    pub text: Option<CorrelationResult>,
    /// SP vs image silhouette, over rows with finite SP and an image value.
    pub image: Option<CorrelationResult>,
}

/// Joins per-group SP with per-group silhouette means and correlates them.
/// Groups missing a text silhouette are dropped.
pub fn correlate_sp_silhouette(
    sp: &BTreeMap<String, SpValue>,
    text: &BTreeMap<String, f64>,
    image: Option<&BTreeMap<String, f64>>,
) -> SpSilhouetteCorrelation {
    let rows: Vec<SpSilhouetteRow> = sp
        .iter()
        .filter_map(|(g, &s)| {
            Some(SpSilhouetteRow {
                group: g.clone(),
                sp: s,
                ts: *text.get(g)?,
                is: image.and_then(|m| m.get(g).copied()),
            })
        })
        .collect();
    let finite: Vec<&SpSilhouetteRow> = rows.iter().filter(|r| r.sp.finite().is_some()).collect();
    let sps: Vec<f64> = finite.iter().map(|r| r.sp.as_f64()).collect();
    let ts: Vec<f64> = finite.iter().map(|r| r.ts).collect();
    let text_r = pearson(&sps, &ts).ok();
    let with_image: Vec<(f64, f64)> = finite
        .iter()
        .filter_map(|r| Some((r.sp.as_f64(), r.is?)))
        .collect();
    let (isp, iss): (Vec<f64>, Vec<f64>) = with_image.into_iter().unzip();
    let image_r = pearson(&isp, &iss).ok();
    SpSilhouetteCorrelation {
        rows,
        text: text_r,
        image: image_r,
    }
}
