use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use lingbias::analytics::{correlate_sp_silhouette, silhouette, Distance, LabelKey, SilhouetteConfig};
use lingbias::report::{metric_summary_csv, paired_csv, silhouette_csv};
use lingbias::triplet_eval::SpValue;
use serde_json::json;

use super::load_annotated;
use crate::failure::{read_failed, CmdResult, Failure};
use crate::settings::{path_value, pick, require_files, Settings};
use crate::LabelKeyArg;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DistanceArg {
    Euclidean,
    Cosine,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Text embeddings
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub meta: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "language")]
    pub label_key: LabelKeyArg,
    #[arg(long, value_enum, default_value = "euclidean")]
    pub distance: DistanceArg,
    /// Skip unit-length normalization before distances
    #[arg(long)]
    pub raw: bool,
    /// Image embeddings; their silhouette is grouped by country
    #[arg(long)]
    pub image_embeddings: Option<PathBuf>,
    #[arg(long)]
    pub image_meta: Option<PathBuf>,
    /// Per-group SP CSV (group and sp columns) to correlate against
    #[arg(long)]
    pub sp: Option<PathBuf>,
}

fn read_sp_csv(path: &Path) -> CmdResult<BTreeMap<String, SpValue>> {
    let text = fs::read_to_string(path).map_err(|e| read_failed(path, e))?;
    let bad = |msg: String| Failure::Domain(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(format!("no {name:?} column")))
    };
    let (g, s) = (col("group")?, col("sp")?);
    let mut out = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let group = rec.get(g).unwrap_or_default();
        if group == "overall" {
            continue;
        }
        let sp = match rec.get(s).unwrap_or_default() {
            "inf" => SpValue::Infinite,
            "undefined" => SpValue::Undefined,
            v => SpValue::Finite(v.parse().map_err(|_| bad(format!("bad sp value {v:?}")))?),
        };
        out.insert(group.to_owned(), sp);
    }
    Ok(out)
}

pub fn analyze(settings: &Settings, args: AnalyzeArgs) -> CmdResult {
    let p = &settings.paths;
    let emb = pick(&args.embeddings, &p.queries, "embeddings")?;
    let meta = pick(&args.meta, &p.queries_meta, "meta")?;
    let images = match (&args.image_embeddings, &args.image_meta) {
        (Some(e), Some(m)) => Some((e.clone(), m.clone())),
        (None, None) => None,
        _ => return Err(Failure::domain("--image-embeddings and --image-meta go together")),
    };
    let mut inputs = vec![emb.clone(), meta.clone()];
    inputs.extend(images.iter().flat_map(|(e, m)| [e.clone(), m.clone()]));
    inputs.extend(args.sp.iter().cloned());
    require_files(inputs.iter().map(PathBuf::as_path))?;

    let cfg = SilhouetteConfig {
        distance: match args.distance {
            DistanceArg::Euclidean => Distance::Euclidean,
            DistanceArg::Cosine => Distance::CosineDistance,
        },
        l2_normalize: !args.raw,
    };
    let key = match args.label_key {
        LabelKeyArg::Language => LabelKey::Language,
        LabelKeyArg::Country => LabelKey::Country,
    };
    let text_report = silhouette(&load_annotated(&emb, &meta)?, key, cfg)?;
    let image_report = match &images {
        Some((e, m)) => Some(silhouette(&load_annotated(e, m)?, LabelKey::Country, cfg)?),
        None => None,
    };

    let mut params = json!({
        "embeddings": path_value(&emb),
        "meta": path_value(&meta),
        "label_key": format!("{key:?}").to_lowercase(),
        "distance": format!("{:?}", cfg.distance).to_lowercase(),
        "l2_normalize": cfg.l2_normalize,
    });
    if let Some((e, m)) = &images {
        params["image_embeddings"] = path_value(e);
        params["image_meta"] = path_value(m);
    }
    if let Some(sp) = &args.sp {
        params["sp"] = path_value(sp);
    }
    let prov = settings.provenance("analyze", params);
    settings.write("silhouette.csv", silhouette_csv(Some(&prov), &text_report))?;
    if let Some(r) = &image_report {
        settings.write("silhouette_images.csv", silhouette_csv(Some(&prov), r))?;
    }

    if let Some(sp_path) = &args.sp {
        let sp = read_sp_csv(sp_path)?;
        let means = |r: &lingbias::analytics::SilhouetteReport| -> BTreeMap<String, f64> {
            r.per_label.iter().map(|(l, s)| (l.clone(), s.mean)).collect()
        };
        let ts = means(&text_report);
        let is = image_report.as_ref().map(means);
        let corr = correlate_sp_silhouette(&sp, &ts, is.as_ref());
        settings.write("paired.csv", paired_csv(Some(&prov), &corr.rows))?;
        let mut summary = Vec::new();
        if let Some(c) = corr.text {
            summary.push(("pearson_sp_ts".to_owned(), c.r));
            summary.push(("n_sp_ts".to_owned(), c.n as f64));
        }
        if let Some(c) = corr.image {
            summary.push(("pearson_sp_is".to_owned(), c.r));
            summary.push(("n_sp_is".to_owned(), c.n as f64));
        }
        settings.write("correlation.csv", metric_summary_csv(Some(&prov), &summary))?;
    }
    Ok(())
}

#[derive(Args)]
pub struct ReportArgs {
    /// Directory holding CSV reports (default: the output directory)
    #[arg(long)]
    pub in_dir: Option<PathBuf>,
    #[arg(long, default_value = "report.md")]
    pub output: String,
}

fn markdown_table(text: &str) -> String {
    let mut out = String::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(comment) = line.strip_prefix('#') {
            out.push_str(&format!("`{}`\n\n", comment.trim()));
        } else if !line.is_empty() {
            rows.push(line);
        }
    }
    if let Some((header, body)) = rows.split_first() {
        let cols: Vec<&str> = header.split(',').collect();
        out.push_str(&format!("| {} |\n", cols.join(" | ")));
        out.push_str(&format!("|{}\n", " --- |".repeat(cols.len())));
        for r in body {
            out.push_str(&format!("| {} |\n", r.split(',').collect::<Vec<_>>().join(" | ")));
        }
    }
    out
}

pub fn report(settings: &Settings, args: ReportArgs) -> CmdResult {
    let dir = args.in_dir.clone().unwrap_or_else(|| settings.out_dir.clone());
    let entries = fs::read_dir(&dir).map_err(|e| read_failed(&dir, e))?;
    let mut csvs: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    csvs.sort();
    if csvs.is_empty() {
        return Err(Failure::Domain(format!("no CSV reports in {}", dir.display())));
    }
    let mut doc = String::from("# lingbias report\n");
    for path in &csvs {
        let text = fs::read_to_string(path).map_err(|e| read_failed(path, e))?;
        let name = path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default();
        doc.push_str(&format!("\n## {name}\n\n{}", markdown_table(&text)));
    }
    settings.write(&args.output, doc)?;
    Ok(())
}
