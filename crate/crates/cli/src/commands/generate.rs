use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use lingbias::corpus::{encode_manifest, encode_meta, load_embeddings, load_meta, ItemMeta};
use lingbias::dataset::{assemble_triplets, dedup, manifest_stats, AssemblyConfig, DedupConfig, QuerySpec};
use lingbias::report::{dedup_csv, manifest_stats_csv, skip_csv};
use lingbias::retrieval::encode_run;
use lingbias::synth::{gen_embedding_world, gen_ranked_lists, ClusterSpec, Pattern, PlacementSpec};
use serde_json::json;

use crate::failure::{read_failed, CmdResult, Failure};
use crate::settings::{path_value, pick, require_files, Settings};

#[derive(Args)]
pub struct TripletsArgs {
    /// Tagged image pool (metadata sidecar format)
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// Queries, one JSON object per line: id, text, language, country, concept
    #[arg(long)]
    pub query_specs: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub per_query: usize,
    /// Let the non candidate share the sem candidate's country
    #[arg(long)]
    pub allow_shared_non_country: bool,
    /// Pool embeddings; near-duplicates are removed before assembly
    #[arg(long)]
    pub dedup_embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 0.92)]
    pub dedup_threshold: f64,
}

fn parse_query_specs(path: &std::path::Path) -> CmdResult<Vec<QuerySpec>> {
    let text = std::fs::read_to_string(path).map_err(|e| read_failed(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Failure::Domain(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn triplets(settings: &Settings, args: TripletsArgs) -> CmdResult {
    let pool_path = pick(&args.pool, &settings.paths.pool, "pool")?;
    let specs_path = pick(&args.query_specs, &settings.paths.query_specs, "query-specs")?;
    let dedup_path = args.dedup_embeddings.clone();
    require_files([pool_path.as_path(), specs_path.as_path()].into_iter().chain(dedup_path.as_deref()))?;

    let mut pool: Vec<ItemMeta> = load_meta(&pool_path)?;
    let queries = parse_query_specs(&specs_path)?;
    let mut params = json!({
        "pool": path_value(&pool_path),
        "query_specs": path_value(&specs_path),
        "per_query": args.per_query,
        "distinct_countries": !args.allow_shared_non_country,
    });

    let mut dedup_report = None;
    if let Some(path) = &dedup_path {
        let cfg = DedupConfig {
            threshold: args.dedup_threshold,
            ..Default::default()
        };
        let outcome = dedup(&load_embeddings(path)?, &cfg)?;
        let dropped: BTreeSet<&str> = outcome.dropped.iter().map(|d| d.id.as_str()).collect();
        pool.retain(|m| !dropped.contains(m.id.as_str()));
        params["dedup_embeddings"] = path_value(path);
        params["dedup_threshold"] = json!(args.dedup_threshold);
        dedup_report = Some(outcome);
    }

    let cfg = AssemblyConfig {
        seed: settings.seed,
        triplets_per_query: args.per_query,
        require_distinct_countries: !args.allow_shared_non_country,
    };
    let assembly = assemble_triplets(&pool, &queries, &cfg)?;
    let prov = settings.provenance("triplets", params);
    settings.write("manifest.jsonl", encode_manifest(&assembly.entries))?;
    settings.write("triplet_skips.csv", skip_csv(Some(&prov), &assembly.skipped))?;
    settings.write(
        "manifest_stats.csv",
        manifest_stats_csv(Some(&prov), &manifest_stats(&assembly.entries)),
    )?;
    if let Some(d) = &dedup_report {
        settings.write("dedup.csv", dedup_csv(Some(&prov), d))?;
    }
    println!("{} entries, {} queries skipped", assembly.entries.len(), assembly.skipped.len());
    Ok(())
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PatternArg {
    TopLoaded,
    BottomLoaded,
    Alternating,
    UniformRandom,
}

impl From<PatternArg> for Pattern {
    fn from(p: PatternArg) -> Self {
        match p {
            PatternArg::TopLoaded => Pattern::TopLoaded,
            PatternArg::BottomLoaded => Pattern::BottomLoaded,
            PatternArg::Alternating => Pattern::Alternating,
            PatternArg::UniformRandom => Pattern::UniformRandom,
        }
    }
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected NAME:VALUE, got {s:?}"))?;
    Ok((a.trim().to_owned(), b.trim().to_owned()))
}

fn parse_language_count(s: &str) -> Result<(String, usize), String> {
    let (lang, n) = parse_pair(s)?;
    let n = n.parse().map_err(|_| format!("bad count in {s:?}"))?;
    Ok((lang, n))
}

#[derive(Args)]
pub struct SynthListsArgs {
    #[arg(long, value_enum)]
    pub pattern: PatternArg,
    /// Language counts per list, e.g. en:7,th:3
    #[arg(long, value_delimiter = ',', value_parser = parse_language_count, required = true)]
    pub languages: Vec<(String, usize)>,
    #[arg(long, default_value_t = 100)]
    pub n_queries: usize,
}

pub fn synth_lists(settings: &Settings, args: SynthListsArgs) -> CmdResult {
    let total: usize = args.languages.iter().map(|(_, n)| n).sum();
    let spec = PlacementSpec {
        k: settings.k.unwrap_or(total),
        pattern: args.pattern.into(),
        languages: args.languages,
        seed: settings.seed,
    };
    let (run, meta) = gen_ranked_lists(&spec, args.n_queries)?;
    settings.write("synth_run.trec", encode_run(&run, "synth"))?;
    settings.write("synth_docs.jsonl", encode_meta(meta.iter()))?;
    Ok(())
}

#[derive(Args)]
pub struct SynthWorldArgs {
    /// Labels as language:country, e.g. en:USA,ja:JPN
    #[arg(long, value_delimiter = ',', value_parser = parse_pair, required = true)]
    pub labels: Vec<(String, String)>,
    #[arg(long, default_value_t = 8)]
    pub points_per_label: usize,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.8)]
    pub separation: f64,
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    pub alignment: f64,
}

pub fn synth_world(settings: &Settings, args: SynthWorldArgs) -> CmdResult {
    let spec = ClusterSpec {
        labels: args.labels,
        points_per_label: args.points_per_label,
        dim: args.dim,
        centroid_separation: args.separation,
        noise_sigma: args.sigma,
        alignment: args.alignment,
        seed: settings.seed,
    };
    let world = gen_embedding_world(&spec)?;
    settings.write("world_queries.pemb", world.queries.embeddings.encode())?;
    settings.write("world_queries.jsonl", encode_meta(world.queries.meta.iter()))?;
    settings.write("world_images.pemb", world.images.embeddings.encode())?;
    settings.write("world_images.jsonl", encode_meta(world.images.meta.iter()))?;
    settings.write("world_manifest.jsonl", encode_manifest(&world.manifest))?;
    Ok(())
}
