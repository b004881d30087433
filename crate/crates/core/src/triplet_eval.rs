//! Forced-choice association-bias evaluation.
//!
//! Each trial picks the highest-scoring of the sem/cul/non candidates; the
//! self-preference score is the ratio of cultural wins to semantic wins.
//! Exact score ties go to the first of sem, cul, non and are counted.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::corpus::{EmbeddingSet, Slot, TripletEntry};
use crate::retrieval::{score_triplet, ScoreError, ScorerConfig, TripletScores};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TripletEvalError {
    #[error("id {0:?} does not resolve to an embedding")]
    UnresolvedId(String),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("no triplet outcomes to tally")]
    EmptyOutcomeSet,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripletOutcome {
    pub query_id: String,
    pub winner: Slot,
    pub scores: TripletScores,
    pub tie: bool,
}

pub fn judge(scores: &TripletScores) -> TripletOutcome {
    let by_slot = [
        (Slot::Sem, scores.s_sem),
        (Slot::Cul, scores.s_cul),
        (Slot::Non, scores.s_non),
    ];
    let best = by_slot.iter().map(|(_, s)| *s).fold(f64::NEG_INFINITY, f64::max);
    let winners = by_slot.iter().filter(|(_, s)| *s == best).count();
    let winner = by_slot
        .iter()
        .find(|(_, s)| *s == best)
        .map(|(slot, _)| *slot)
        .expect("one of three finite scores is the max");
    TripletOutcome {
        query_id: scores.query_id.clone(),
        winner,
        scores: scores.clone(),
        tie: winners > 1,
    }
}

/// Win counts and proportions over `n` trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WinTallies {
    pub n: usize,
    pub sem: usize,
    pub cul: usize,
    pub non: usize,
    pub ties: usize,
    pub m_sem: f64,
    pub m_cul: f64,
    pub m_non: f64,
}

impl WinTallies {
    fn from_counts(sem: usize, cul: usize, non: usize, ties: usize) -> Self {
        let n = sem + cul + non;
        let frac = |c: usize| c as f64 / n as f64;
        Self {
            n,
            sem,
            cul,
            non,
            ties,
            m_sem: frac(sem),
            m_cul: frac(cul),
            m_non: frac(non),
        }
    }

    /// Tallies known only as proportions (e.g. published win rates).
    /// Counts are left at zero.
    pub fn from_proportions(m_sem: f64, m_cul: f64, m_non: f64) -> Self {
        Self {
            n: 0,
            sem: 0,
            cul: 0,
            non: 0,
            ties: 0,
            m_sem,
            m_cul,
            m_non,
        }
    }
}

pub fn tally<'a>(outcomes: impl IntoIterator<Item = &'a TripletOutcome>) -> Result<WinTallies, TripletEvalError> {
    let (mut sem, mut cul, mut non, mut ties) = (0, 0, 0, 0);
    for o in outcomes {
        match o.winner {
            Slot::Sem => sem += 1,
            Slot::Cul => cul += 1,
            Slot::Non => non += 1,
        }
        ties += usize::from(o.tie);
    }
    if sem + cul + non == 0 {
        return Err(TripletEvalError::EmptyOutcomeSet);
    }
    Ok(WinTallies::from_counts(sem, cul, non, ties))
}

/// A self-preference score. Unbounded above; the two degenerate cases are
/// explicit values rather than clamped numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpValue {
    Finite(f64),
    /// Cultural wins with no semantic wins.
    Infinite,
    /// Neither cultural nor semantic wins.
    Undefined,
}

impl SpValue {
    pub fn ratio(m_cul: f64, m_sem: f64) -> Self {
        if m_sem > 0.0 {
            SpValue::Finite(m_cul / m_sem)
        } else if m_cul > 0.0 {
            SpValue::Infinite
        } else {
            SpValue::Undefined
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            SpValue::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// Total order for sweeps: finite values, then infinity, then undefined.
    pub fn as_f64(self) -> f64 {
        match self {
            SpValue::Finite(x) => x,
            SpValue::Infinite => f64::INFINITY,
            SpValue::Undefined => f64::NAN,
        }
    }

    pub fn format(self, decimals: usize) -> String {
        match self {
            SpValue::Finite(x) => format!("{x:.decimals$}"),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for SpValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpValue::Finite(x) => write!(f, "{x}"),
            SpValue::Infinite => f.write_str("inf"),
            SpValue::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for SpValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SpValue::Finite(x) => s.serialize_f64(*x),
            SpValue::Infinite => s.serialize_str("inf"),
            SpValue::Undefined => s.serialize_str("undefined"),
        }
    }
}

pub fn sp_score(t: &WinTallies) -> SpValue {
    SpValue::ratio(t.m_cul, t.m_sem)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStats {
    pub tallies: WinTallies,
    pub sp: SpValue,
}

impl GroupStats {
    fn new(tallies: WinTallies) -> Self {
        Self {
            sp: sp_score(&tallies),
            tallies,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpReport {
    pub overall: GroupStats,
    pub by_country: BTreeMap<String, GroupStats>,
    pub by_language: BTreeMap<String, GroupStats>,
    pub tie_count: usize,
}

/// Scores and judges every manifest entry, in manifest order.
pub fn judge_manifest(
    manifest: &[TripletEntry],
    queries: &EmbeddingSet,
    images: &EmbeddingSet,
    cfg: &ScorerConfig,
) -> Result<Vec<TripletOutcome>, TripletEvalError> {
    manifest
        .par_iter()
        .map(|e| {
            let q = queries
                .get(&e.query_id)
                .ok_or_else(|| TripletEvalError::UnresolvedId(e.query_id.clone()))?;
            let img = |id: &str| images.get(id).ok_or_else(|| TripletEvalError::UnresolvedId(id.to_owned()));
            let scores = score_triplet(q, img(&e.sem_id)?, img(&e.cul_id)?, img(&e.non_id)?, cfg)?;
            Ok(judge(&scores))
        })
        .collect()
}

/// Overall, per-country and per-language tallies. `outcomes[i]` belongs to `manifest[i]`.
pub fn summarize(manifest: &[TripletEntry], outcomes: &[TripletOutcome]) -> Result<SpReport, TripletEvalError> {
    let overall = tally(outcomes)?;
    let mut by_country: BTreeMap<&str, Vec<&TripletOutcome>> = BTreeMap::new();
    let mut by_language: BTreeMap<&str, Vec<&TripletOutcome>> = BTreeMap::new();
    for (e, o) in manifest.iter().zip(outcomes) {
        by_country.entry(&e.query_country).or_default().push(o);
        by_language.entry(&e.query_language).or_default().push(o);
    }
    let grouped = |m: BTreeMap<&str, Vec<&TripletOutcome>>| -> Result<BTreeMap<String, GroupStats>, TripletEvalError> {
        m.into_iter()
            .map(|(k, v)| Ok((k.to_owned(), GroupStats::new(tally(v)?))))
            .collect()
    };
    Ok(SpReport {
        tie_count: overall.ties,
        overall: GroupStats::new(overall),
        by_country: grouped(by_country)?,
        by_language: grouped(by_language)?,
    })
}

pub fn evaluate_triplets(
    manifest: &[TripletEntry],
    queries: &EmbeddingSet,
    images: &EmbeddingSet,
    cfg: &ScorerConfig,
) -> Result<SpReport, TripletEvalError> {
    if manifest.is_empty() {
        return Err(TripletEvalError::EmptyOutcomeSet);
    }
    let outcomes = judge_manifest(manifest, queries, images, cfg)?;
    summarize(manifest, &outcomes)
}
