use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::Args;
use lingbias::corpus::{load_catalog, load_embeddings, load_manifest};
use lingbias::metrics::{
    accuracy_at_k, bias_report, ndcg_at_k, parse_qrels, qrels_by_primary_concept, tier_histogram,
    LanguageDistribution, Qrels, SmoothingConfig,
};
use lingbias::report::{
    bias_per_query_csv, depth_curve_csv, metric_summary_csv, outcomes_csv, sp_by_country_csv,
    sp_by_language_csv, tier_histogram_csv,
};
use lingbias::retrieval::{build_run, encode_run, load_run, RunFile, ScorerConfig};
use lingbias::triplet_eval::{judge_manifest, summarize, TripletEvalError};
use serde_json::{json, Value};

use super::{check_catalog_coverage, load_index};
use crate::failure::{read_failed, CmdResult, Failure};
use crate::settings::{path_value, pick, pick_opt, require_files, Settings};

const RUN_TAG: &str = "lingbias";

#[derive(Args)]
pub struct RetrieveArgs {
    #[arg(long)]
    pub queries: Option<PathBuf>,
    #[arg(long)]
    pub docs: Option<PathBuf>,
    /// Output file name inside the output directory
    #[arg(long, default_value = "run.trec")]
    pub output: String,
}

pub fn retrieve(settings: &Settings, args: RetrieveArgs) -> CmdResult {
    let queries = pick(&args.queries, &settings.paths.queries, "queries")?;
    let docs = pick(&args.docs, &settings.paths.docs, "docs")?;
    require_files([queries.as_path(), docs.as_path()])?;
    let run = build_run(
        &load_embeddings(&queries)?,
        &load_embeddings(&docs)?,
        settings.k_or_default(),
        &ScorerConfig::for_similarity(settings.scorer),
    )?;
    settings.write(&args.output, encode_run(&run, RUN_TAG))?;
    Ok(())
}

#[derive(Args)]
pub struct EvalI2tArgs {
    /// Image query embeddings (not needed with --run)
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Caption pool embeddings (not needed with --run)
    #[arg(long)]
    pub docs: Option<PathBuf>,
    /// Caption pool metadata with language tags
    #[arg(long)]
    pub docs_meta: Option<PathBuf>,
    /// Query metadata; relevance is a shared primary concept when no qrels are given
    #[arg(long)]
    pub queries_meta: Option<PathBuf>,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Existing run file; skips retrieval
    #[arg(long)]
    pub run: Option<PathBuf>,
    /// TREC qrels file
    #[arg(long)]
    pub qrels: Option<PathBuf>,
    /// Bias cutoffs
    #[arg(long, value_delimiter = ',', default_value = "5,10,25,50,99")]
    pub depths: Vec<usize>,
}

pub fn eval_i2t(settings: &Settings, args: EvalI2tArgs) -> CmdResult {
    let p = &settings.paths;
    let docs_meta_path = pick(&args.docs_meta, &p.docs_meta, "docs-meta")?;
    let catalog_path = pick_opt(&args.catalog, &p.catalog);
    let run_path = pick_opt(&args.run, &p.run);
    let qrels_path = pick_opt(&args.qrels, &p.qrels);
    let queries_meta_path = pick_opt(&args.queries_meta, &p.queries_meta);
    let embeddings = match &run_path {
        Some(_) => None,
        None => Some((pick(&args.queries, &p.queries, "queries")?, pick(&args.docs, &p.docs, "docs")?)),
    };
    let mut inputs = vec![docs_meta_path.clone()];
    inputs.extend(catalog_path.iter().chain(&run_path).chain(&qrels_path).chain(&queries_meta_path).cloned());
    if let Some((q, d)) = &embeddings {
        inputs.extend([q.clone(), d.clone()]);
    }
    require_files(inputs.iter().map(PathBuf::as_path))?;
    if args.depths.is_empty() || args.depths.contains(&0) {
        return Err(Failure::domain("depths must be positive"));
    }
    let hist_k = settings.k_or_default();

    let catalog = load_catalog(catalog_path.as_deref())?;
    let docs_meta = load_index(&docs_meta_path)?;
    check_catalog_coverage(&docs_meta, &catalog)?;

    let run: RunFile = match (&run_path, &embeddings) {
        (Some(r), _) => load_run(r)?,
        (None, Some((q, d))) => {
            let depth = args.depths.iter().copied().chain([hist_k]).max().unwrap_or(hist_k);
            let run = build_run(
                &load_embeddings(q)?,
                &load_embeddings(d)?,
                depth,
                &ScorerConfig::for_similarity(settings.scorer),
            )?;
            settings.write("run.trec", encode_run(&run, RUN_TAG))?;
            run
        }
        (None, None) => unreachable!("embeddings are required without a run"),
    };

    let languages: BTreeSet<String> = docs_meta.languages();
    let expected = LanguageDistribution::uniform(languages.iter().map(String::as_str))?;
    let smoothing = SmoothingConfig {
        epsilon: settings.epsilon,
    };
    let reports = args
        .depths
        .iter()
        .map(|&k| bias_report(&run, &docs_meta, &expected, k, smoothing))
        .collect::<Result<Vec<_>, _>>()?;

    let qrels: Option<Qrels> = match (&qrels_path, &queries_meta_path) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| read_failed(path, e))?;
            Some(parse_qrels(&text)?)
        }
        (None, Some(path)) => Some(qrels_by_primary_concept(&load_index(path)?, &docs_meta)),
        (None, None) => None,
    };

    let mut summary: Vec<(String, f64)> = Vec::new();
    match &qrels {
        Some(q) => {
            summary.push(("acc@5".into(), accuracy_at_k(&run, q, 5)?));
            summary.push(("ndcg@10".into(), ndcg_at_k(&run, q, 10)?));
        }
        None => eprintln!("note: no qrels or query metadata given; relevance metrics skipped"),
    }
    for r in &reports {
        summary.push((format!("lbkl@{}", r.k), r.mean_lbkl));
        summary.push((format!("dlbkl@{}", r.k), r.mean_dlbkl));
    }
    let histogram = tier_histogram(&run, &docs_meta, &catalog, hist_k)?;

    let mut params = json!({
        "docs_meta": path_value(&docs_meta_path),
        "depths": args.depths,
        "histogram_k": hist_k,
    });
    for (key, path) in [
        ("catalog", &catalog_path),
        ("run", &run_path),
        ("qrels", &qrels_path),
        ("queries_meta", &queries_meta_path),
    ] {
        if let Some(path) = path {
            params[key] = path_value(path);
        }
    }
    if let Some((q, d)) = &embeddings {
        params["queries"] = path_value(q);
        params["docs"] = path_value(d);
    }
    let prov = settings.provenance("eval-i2t", params);
    settings.write("i2t_summary.csv", metric_summary_csv(Some(&prov), &summary))?;
    settings.write("i2t_depth.csv", depth_curve_csv(Some(&prov), &reports))?;
    settings.write("i2t_per_query.csv", bias_per_query_csv(Some(&prov), &reports))?;
    settings.write("i2t_tiers.csv", tier_histogram_csv(Some(&prov), &histogram))?;
    for (m, v) in &summary {
        println!("{m}\t{v:.6}");
    }
    Ok(())
}

#[derive(Args)]
pub struct EvalT2iArgs {
    /// Text query embeddings
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Image embeddings
    #[arg(long)]
    pub images: Option<PathBuf>,
    /// Triplet manifest (JSONL)
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn eval_t2i(settings: &Settings, args: EvalT2iArgs) -> CmdResult {
    let p = &settings.paths;
    let queries = pick(&args.queries, &p.queries, "queries")?;
    let images = pick(&args.images, &p.images, "images")?;
    let manifest_path = pick(&args.manifest, &p.manifest, "manifest")?;
    require_files([queries.as_path(), images.as_path(), manifest_path.as_path()])?;

    let manifest = load_manifest(&manifest_path)?;
    if manifest.is_empty() {
        return Err(TripletEvalError::EmptyOutcomeSet.into());
    }
    let outcomes = judge_manifest(
        &manifest,
        &load_embeddings(&queries)?,
        &load_embeddings(&images)?,
        &ScorerConfig::for_similarity(settings.scorer),
    )?;
    let report = summarize(&manifest, &outcomes)?;

    let params: Value = json!({
        "queries": path_value(&queries),
        "images": path_value(&images),
        "manifest": path_value(&manifest_path),
    });
    let prov = settings.provenance("eval-t2i", params);
    settings.write("t2i_sp_by_country.csv", sp_by_country_csv(Some(&prov), &report))?;
    settings.write("t2i_sp_by_language.csv", sp_by_language_csv(Some(&prov), &report))?;
    settings.write("t2i_outcomes.csv", outcomes_csv(Some(&prov), &outcomes))?;
    let t = &report.overall.tallies;
    println!(
        "n={} m_sem={:.6} m_cul={:.6} m_non={:.6} sp={} ties={}",
        t.n,
        t.m_sem,
        t.m_cul,
        t.m_non,
        report.overall.sp.format(6),
        report.tie_count
    );
    Ok(())
}
