use std::path::PathBuf;

use clap::Args;
use lingbias::corpus::{join_meta, load_catalog, load_embeddings, load_meta, Catalog, EmbeddingError};

use crate::settings::{require_files, Settings};
use crate::failure::{CmdResult, Failure};

#[derive(Args)]
pub struct ValidateArgs {
    /// Embedding file; repeat for several files
    #[arg(long = "embeddings", required = true)]
    pub embeddings: Vec<PathBuf>,
    /// Metadata sidecar for each embedding file, in the same order
    #[arg(long = "meta", required = true)]
    pub meta: Vec<PathBuf>,
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

pub fn validate(settings: &Settings, args: ValidateArgs) -> CmdResult {
    if args.embeddings.len() != args.meta.len() {
        return Err(Failure::Domain(format!(
            "{} embedding files but {} sidecars",
            args.embeddings.len(),
            args.meta.len()
        )));
    }
    let catalog_path = args.catalog.or_else(|| settings.paths.catalog.clone());
    require_files(
        args.embeddings
            .iter()
            .chain(&args.meta)
            .chain(&catalog_path)
            .map(PathBuf::as_path),
    )?;
    let catalog: Catalog = load_catalog(catalog_path.as_deref())?;

    let mut findings: Vec<String> = Vec::new();
    for (emb_path, meta_path) in args.embeddings.iter().zip(&args.meta) {
        let name = emb_path.display();
        let set = match load_embeddings(emb_path) {
            Ok(s) => s,
            Err(e @ EmbeddingError::Io { .. }) => return Err(e.into()),
            Err(e) => {
                findings.push(format!("{name}: {e}"));
                continue;
            }
        };
        let items = load_meta(meta_path)?;
        for item in &items {
            for f in item.findings() {
                findings.push(format!("{}: {f}", meta_path.display()));
            }
        }
        let joined = match join_meta(set, items) {
            Ok(j) => j,
            Err(e) => {
                findings.push(format!("{}: {e}", meta_path.display()));
                continue;
            }
        };
        for id in &joined.missing_meta {
            findings.push(format!("{name}: record {id:?} has no metadata"));
        }
        for id in &joined.missing_embedding {
            findings.push(format!("{}: item {id:?} has no embedding", meta_path.display()));
        }
        for m in joined.meta.iter() {
            if !m.language.is_empty() && catalog.tier(&m.language).is_none() {
                findings.push(format!(
                    "{}: language {:?} of item {:?} is not in the catalog",
                    meta_path.display(),
                    m.language,
                    m.id
                ));
            }
        }
        println!(
            "{name}: {} records, dim {}, {}",
            joined.embeddings.len(),
            joined.embeddings.dim(),
            if joined.embeddings.is_multi_vector() { "multi-vector" } else { "single-vector" }
        );
    }
    if findings.is_empty() {
        println!("valid");
        Ok(())
    } else {
        for f in &findings {
            println!("finding: {f}");
        }
        Err(Failure::Domain(format!("{} validation finding(s)", findings.len())))
    }
}
