//! Language resource tiers and Common Crawl shares.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("catalog is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("language {language:?}: unknown tier name {tier:?} (expected high, medium or low)")]
    UnknownTierName { language: String, tier: String },
    #[error("language {language:?}: negative percentage {pct}")]
    NegativePercentage { language: String, pct: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    High,
    Medium,
    Low,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::High, Tier::Medium, Tier::Low];

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "high" => Some(Tier::High),
            "medium" => Some(Tier::Medium),
            "low" => Some(Tier::Low),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::High => "high",
            Tier::Medium => "medium",
            Tier::Low => "low",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub tier: Tier,
    pub crawl_pct: f64,
}

/// Common Crawl (CC-MAIN-2025-18) language shares for the 36 caption languages.
const DEFAULT_ROWS: [(&str, Tier, f64); 36] = [
    ("en", Tier::High, 43.9499),
    ("ru", Tier::High, 5.7614),
    ("de", Tier::High, 5.5691),
    ("ja", Tier::Medium, 4.9152),
    ("zh", Tier::Medium, 4.8778),
    ("es", Tier::Medium, 4.5422),
    ("fr", Tier::Medium, 4.3271),
    ("it", Tier::Medium, 2.4060),
    ("pt", Tier::Medium, 2.3369),
    ("pl", Tier::Medium, 1.8744),
    ("nl", Tier::Medium, 1.8083),
    ("id", Tier::Medium, 1.1759),
    ("tr", Tier::Medium, 1.1274),
    ("cs", Tier::Medium, 1.0479),
    ("vi", Tier::Medium, 1.0213),
    ("ko", Tier::Low, 0.7865),
    ("fa", Tier::Low, 0.7087),
    ("sv", Tier::Low, 0.6736),
    ("ar", Tier::Low, 0.6722),
    ("ro", Tier::Low, 0.6374),
    ("uk", Tier::Low, 0.6079),
    ("el", Tier::Low, 0.5651),
    ("hu", Tier::Low, 0.5082),
    ("da", Tier::Low, 0.4792),
    ("th", Tier::Low, 0.4269),
    ("fi", Tier::Low, 0.3649),
    ("no", Tier::Low, 0.3135),
    ("he", Tier::Low, 0.2654),
    ("hr", Tier::Low, 0.2339),
    ("hi", Tier::Low, 0.2004),
    ("bn", Tier::Low, 0.1064),
    ("te", Tier::Low, 0.0213),
    ("sw", Tier::Low, 0.0102),
    ("fil", Tier::Low, 0.0084),
    ("mi", Tier::Low, 0.0014),
    ("quz", Tier::Low, 0.0005),
];

/// Language -> (tier, crawl share). Keyed by lowercase language tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    entries: BTreeMap<String, CatalogEntry>,
}

impl Default for Catalog {
    fn default() -> Self {
        let entries = DEFAULT_ROWS
            .iter()
            .map(|&(lang, tier, crawl_pct)| (lang.to_owned(), CatalogEntry { tier, crawl_pct }))
            .collect();
        Self { entries }
    }
}

#[derive(Deserialize)]
struct RawEntry {
    tier: String,
    crawl_pct: f64,
}

impl Catalog {
    pub fn parse(text: &str) -> Result<Self, CatalogError> {
        let raw: BTreeMap<String, RawEntry> = serde_json::from_str(text)?;
        let mut entries = BTreeMap::new();
        for (lang, e) in raw {
            let language = lang.to_lowercase();
            let tier = Tier::parse(&e.tier).ok_or_else(|| CatalogError::UnknownTierName {
                language: language.clone(),
                tier: e.tier.clone(),
            })?;
            if e.crawl_pct < 0.0 || !e.crawl_pct.is_finite() {
                return Err(CatalogError::NegativePercentage {
                    language,
                    pct: e.crawl_pct,
                });
            }
            entries.insert(
                language,
                CatalogEntry {
                    tier,
                    crawl_pct: e.crawl_pct,
                },
            );
        }
        Ok(Self { entries })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.entries).expect("catalog serializes")
    }

    pub fn tier(&self, language: &str) -> Option<Tier> {
        self.entries.get(language).map(|e| e.tier)
    }

    pub fn crawl_pct(&self, language: &str) -> Option<f64> {
        self.entries.get(language).map(|e| e.crawl_pct)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &CatalogEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Loads a catalog file, or the built-in table when `path` is `None`.
pub fn load_catalog(path: Option<&Path>) -> Result<Catalog, CatalogError> {
    match path {
        None => Ok(Catalog::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| CatalogError::Io {
                path: p.display().to_string(),
                source,
            })?;
            Catalog::parse(&text)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rows() {
        let c = load_catalog(None).unwrap();
        assert_eq!(c.len(), 36);
        assert_eq!(c.tier("en"), Some(Tier::High));
        assert_eq!(c.crawl_pct("en"), Some(43.9499));
        assert_eq!(c.tier("th"), Some(Tier::Low));
        assert_eq!(c.crawl_pct("th"), Some(0.4269));
        assert_eq!(c.tier("quz"), Some(Tier::Low));
        assert_eq!(c.tier("yo"), None);
    }

    #[test]
    fn default_tier_counts_and_total() {
        let c = Catalog::default();
        let count = |t| c.entries().filter(|(_, e)| e.tier == t).count();
        assert_eq!((count(Tier::High), count(Tier::Medium), count(Tier::Low)), (3, 12, 21));
        // Golden total of the shipped shares.
        let total: f64 = c.entries().map(|(_, e)| e.crawl_pct).sum();
        assert!((total - 94.3328).abs() < 1e-9, "{total}");
    }

    #[test]
    fn high_tier_outranks_low_tier() {
        let c = Catalog::default();
        let min_high = c
            .entries()
            .filter(|(_, e)| e.tier == Tier::High)
            .map(|(_, e)| e.crawl_pct)
            .fold(f64::INFINITY, f64::min);
        let max_low = c
            .entries()
            .filter(|(_, e)| e.tier == Tier::Low)
            .map(|(_, e)| e.crawl_pct)
            .fold(0.0, f64::max);
        assert!(min_high > max_low);
    }

    #[test]
    fn unknown_tier() {
        let err = Catalog::parse(r#"{"xx": {"tier": "gigantic", "crawl_pct": 1.0}}"#).unwrap_err();
        assert!(matches!(err, CatalogError::UnknownTierName { ref tier, .. } if tier == "gigantic"));
    }

    #[test]
    fn negative_pct() {
        let err = Catalog::parse(r#"{"xx": {"tier": "low", "crawl_pct": -0.1}}"#).unwrap_err();
        assert!(matches!(err, CatalogError::NegativePercentage { .. }));
    }

    #[test]
    fn json_round_trip() {
        let c = Catalog::default();
        assert_eq!(Catalog::parse(&c.to_json()).unwrap(), c);
    }
}
