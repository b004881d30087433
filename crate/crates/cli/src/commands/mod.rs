mod analyze;
mod evaluate;
mod generate;
mod inspect;

use std::path::Path;

use lingbias::corpus::{join_meta, load_embeddings, load_meta, AnnotatedSet, Catalog, MetaIndex};

use crate::failure::{CmdResult, Failure};

pub use analyze::{analyze, report, AnalyzeArgs, ReportArgs};
pub use evaluate::{eval_i2t, eval_t2i, retrieve, EvalI2tArgs, EvalT2iArgs, RetrieveArgs};
pub use generate::{synth_lists, synth_world, triplets, SynthListsArgs, SynthWorldArgs, TripletsArgs};
pub use inspect::{validate, ValidateArgs};

fn load_annotated(embeddings: &Path, meta: &Path) -> CmdResult<AnnotatedSet> {
    let set = load_embeddings(embeddings)?;
    Ok(join_meta(set, load_meta(meta)?)?)
}

fn load_index(meta: &Path) -> CmdResult<MetaIndex> {
    Ok(MetaIndex::from_items(load_meta(meta)?)?)
}

/// Every text item's language must be in the catalog.
fn check_catalog_coverage(meta: &MetaIndex, catalog: &Catalog) -> CmdResult {
    for m in meta.iter() {
        if !m.language.is_empty() && catalog.tier(&m.language).is_none() {
            return Err(Failure::Domain(format!(
                "language {:?} of item {:?} is not in the catalog",
                m.language, m.id
            )));
        }
    }
    Ok(())
}
