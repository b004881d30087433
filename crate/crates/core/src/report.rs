//! CSV report emission. Floats are written with six decimals.

use std::collections::BTreeMap;

use crate::analytics::{SilhouetteReport, SpSilhouetteRow};
use crate::corpus::{Tier, TABLE_COUNTRIES};
use crate::dataset::{DedupOutcome, ManifestStats, SkippedQuery};
use crate::metrics::{BiasReport, TierHistogram};
use crate::triplet_eval::{GroupStats, SpReport, TripletOutcome};

/// Header line identifying how a report was produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn header(&self) -> String {
        format!(
            "# lingbias {} config_sha256={} seed={}\n",
            self.tool_version, self.config_hash, self.seed
        )
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.6}")
}

fn render(prov: Option<&Provenance>, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");
    match prov {
        Some(p) => p.header() + &body,
        None => body,
    }
}

/// Per-query LBKL and DLBKL at each depth, long format.
pub fn bias_per_query_csv(prov: Option<&Provenance>, reports: &[BiasReport]) -> String {
    render(
        prov,
        &["k", "query_id", "lbkl", "dlbkl"],
        reports.iter().flat_map(|r| {
            r.per_query
                .iter()
                .map(move |q| vec![r.k.to_string(), q.query_id.clone(), fmt_f64(q.lbkl), fmt_f64(q.dlbkl)])
        }),
    )
}

/// Mean LBKL and DLBKL per depth: the data behind a depth-curve or bar chart.
pub fn depth_curve_csv(prov: Option<&Provenance>, reports: &[BiasReport]) -> String {
    render(
        prov,
        &["k", "lbkl", "dlbkl"],
        reports
            .iter()
            .map(|r| vec![r.k.to_string(), fmt_f64(r.mean_lbkl), fmt_f64(r.mean_dlbkl)]),
    )
}

pub fn metric_summary_csv(prov: Option<&Provenance>, metrics: &[(String, f64)]) -> String {
    render(
        prov,
        &["metric", "value"],
        metrics.iter().map(|(m, v)| vec![m.clone(), fmt_f64(*v)]),
    )
}

pub fn tier_histogram_csv(prov: Option<&Provenance>, h: &TierHistogram) -> String {
    let mut header = vec!["rank"];
    header.extend(Tier::ALL.iter().map(|t| t.as_str()));
    let rows = (1..=h.k)
        .filter(|r| h.by_rank.contains_key(r))
        .map(|r| {
            std::iter::once(r.to_string())
                .chain(Tier::ALL.iter().map(|&t| h.count(r, t).to_string()))
                .collect()
        });
    render(prov, &header, rows)
}

/// Groups in table country order first, then any others alphabetically.
pub fn table_order<V>(groups: &BTreeMap<String, V>) -> Vec<(&str, &V)> {
    let mut out: Vec<(&str, &V)> = TABLE_COUNTRIES
        .iter()
        .filter_map(|c| groups.get_key_value(*c).map(|(k, v)| (k.as_str(), v)))
        .collect();
    out.extend(
        groups
            .iter()
            .filter(|(k, _)| !TABLE_COUNTRIES.contains(&k.as_str()))
            .map(|(k, v)| (k.as_str(), v)),
    );
    out
}

fn sp_row(group: &str, g: &GroupStats) -> Vec<String> {
    let t = &g.tallies;
    vec![
        group.to_owned(),
        t.n.to_string(),
        fmt_f64(t.m_sem),
        fmt_f64(t.m_cul),
        fmt_f64(t.m_non),
        g.sp.format(6),
        t.ties.to_string(),
    ]
}

const SP_HEADER: [&str; 7] = ["group", "n", "m_sem", "m_cul", "m_non", "sp", "ties"];

/// Per-country SP in table column order, followed by an `overall` row.
pub fn sp_by_country_csv(prov: Option<&Provenance>, report: &SpReport) -> String {
    let rows = table_order(&report.by_country)
        .into_iter()
        .map(|(c, g)| sp_row(c, g))
        .chain(std::iter::once(sp_row("overall", &report.overall)));
    render(prov, &SP_HEADER, rows)
}

pub fn sp_by_language_csv(prov: Option<&Provenance>, report: &SpReport) -> String {
    let rows = report
        .by_language
        .iter()
        .map(|(l, g)| sp_row(l, g))
        .chain(std::iter::once(sp_row("overall", &report.overall)));
    render(prov, &SP_HEADER, rows)
}

pub fn outcomes_csv(prov: Option<&Provenance>, outcomes: &[TripletOutcome]) -> String {
    render(
        prov,
        &["query_id", "winner", "s_sem", "s_cul", "s_non", "tie"],
        outcomes.iter().map(|o| {
            vec![
                o.query_id.clone(),
                o.winner.as_str().to_owned(),
                fmt_f64(o.scores.s_sem),
                fmt_f64(o.scores.s_cul),
                fmt_f64(o.scores.s_non),
                o.tie.to_string(),
            ]
        }),
    )
}

pub fn silhouette_csv(prov: Option<&Provenance>, report: &SilhouetteReport) -> String {
    render(
        prov,
        &["label", "mean_silhouette", "n"],
        report
            .per_label
            .iter()
            .map(|(l, s)| vec![l.clone(), fmt_f64(s.mean), s.n.to_string()]),
    )
}

pub fn paired_csv(prov: Option<&Provenance>, rows: &[SpSilhouetteRow]) -> String {
    render(
        prov,
        &["group", "sp", "ts", "is"],
        rows.iter().map(|r| {
            vec![
                r.group.clone(),
                r.sp.format(6),
                fmt_f64(r.ts),
                r.is.map(fmt_f64).unwrap_or_default(),
            ]
        }),
    )
}

pub fn skip_csv(prov: Option<&Provenance>, skipped: &[SkippedQuery]) -> String {
    render(
        prov,
        &["query_id", "reason"],
        skipped
            .iter()
            .map(|s| vec![s.query_id.clone(), s.reason.as_str().to_owned()]),
    )
}

pub fn dedup_csv(prov: Option<&Provenance>, d: &DedupOutcome) -> String {
    render(
        prov,
        &["id", "duplicate_of", "similarity"],
        d.dropped
            .iter()
            .map(|x| vec![x.id.clone(), x.duplicate_of.clone(), fmt_f64(x.similarity)]),
    )
}

/// Entry counts, one row per (kind, key) plus a total row.
pub fn manifest_stats_csv(prov: Option<&Provenance>, s: &ManifestStats) -> String {
    let mut rows: Vec<Vec<String>> = Vec::new();
    for (kind, m) in [("country", &s.by_country), ("concept", &s.by_concept), ("language", &s.by_language)] {
        rows.extend(m.iter().map(|(k, n)| vec![kind.to_owned(), k.clone(), n.to_string()]));
    }
    rows.push(vec!["total".into(), String::new(), s.total.to_string()]);
    render(prov, &["kind", "key", "count"], rows)
}
