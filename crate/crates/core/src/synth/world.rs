use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{entity_rng, SynthError};
use crate::corpus::{join_meta, AnnotatedSet, EmbeddingRecord, EmbeddingSet, ItemMeta, TripletEntry};
use crate::dataset::{assemble_triplets, AssemblyConfig, QuerySpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    /// (language, country) per label.
    pub labels: Vec<(String, String)>,
    /// Items per label and modality; also the number of concepts.
    pub points_per_label: usize,
    pub dim: usize,
    pub centroid_separation: f64,
    pub noise_sigma: f64,
    /// 1 pulls query embeddings onto a shared language-agnostic centre,
    /// 0 keeps them at full label separation.
    pub alignment: f64,
    pub seed: u64,
}

impl ClusterSpec {
    fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::DegenerateSpec(m));
        if self.labels.len() < 2 {
            return bad(format!("need at least 2 labels, got {}", self.labels.len()));
        }
        let countries: std::collections::BTreeSet<&str> = self.labels.iter().map(|(_, c)| c.as_str()).collect();
        if countries.len() < 2 {
            return bad("labels must span at least 2 countries".into());
        }
        if countries.len() != self.labels.len() {
            return bad("label countries must be distinct".into());
        }
        if self.points_per_label < 2 {
            return bad("need at least 2 points (concepts) per label".into());
        }
        if self.dim < self.points_per_label + self.labels.len() {
            return bad(format!(
                "dim {} is below concepts + labels = {}",
                self.dim,
                self.points_per_label + self.labels.len()
            ));
        }
        if !(self.noise_sigma > 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma must be positive, got {}", self.noise_sigma));
        }
        if !(self.centroid_separation >= 0.0 && self.centroid_separation.is_finite()) {
            return bad(format!("centroid_separation must be >= 0, got {}", self.centroid_separation));
        }
        if !(0.0..=1.0).contains(&self.alignment) {
            return bad(format!("alignment must lie in [0, 1], got {}", self.alignment));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingWorld {
    pub queries: AnnotatedSet,
    pub images: AnnotatedSet,
    pub manifest: Vec<TripletEntry>,
}

pub fn concept_name(j: usize) -> String {
    format!("c{j:03}")
}

/// Text queries and images drawn around an orthonormal layout.
///
/// Concept `j` owns axis `j` and label `l` owns axis `concepts + l`.
/// An image of (label, concept) sits at `e_concept + sep * e_label`; the
/// matching query sits at `e_concept + (1 - alignment) * sep * e_label`.
/// Each gets isotropic Gaussian noise from its own id-keyed stream. The
/// noise does not change when only `alignment` changes.
pub fn gen_embedding_world(spec: &ClusterSpec) -> Result<EmbeddingWorld, SynthError> {
    spec.validate()?;
    let n_concepts = spec.points_per_label;
    let noise = Normal::new(0.0, spec.noise_sigma).expect("validated sigma");

    struct Cell {
        label: usize,
        concept: usize,
        query_id: String,
        image_id: String,
    }
    let cells: Vec<Cell> = (0..spec.labels.len())
        .flat_map(|l| {
            let (lang, country) = &spec.labels[l];
            (0..n_concepts).map(move |c| Cell {
                label: l,
                concept: c,
                query_id: format!("q-{country}-{lang}-{}", concept_name(c)),
                image_id: format!("img-{country}-{}", concept_name(c)),
            })
        })
        .collect();

    let draw = |id: &str, concept: usize, label: usize, label_scale: f64| -> Vec<f32> {
        let mut rng = entity_rng(spec.seed, id);
        let mut v: Vec<f64> = (0..spec.dim).map(|_| noise.sample(&mut rng)).collect();
        v[concept] += 1.0;
        v[n_concepts + label] += label_scale;
        v.into_iter().map(|x| x as f32).collect()
    };
    let query_scale = (1.0 - spec.alignment) * spec.centroid_separation;
    let (query_records, image_records): (Vec<EmbeddingRecord>, Vec<EmbeddingRecord>) = cells
        .par_iter()
        .map(|c| {
            (
                EmbeddingRecord::single(c.query_id.clone(), draw(&c.query_id, c.concept, c.label, query_scale)),
                EmbeddingRecord::single(
                    c.image_id.clone(),
                    draw(&c.image_id, c.concept, c.label, spec.centroid_separation),
                ),
            )
        })
        .unzip();

    let mut query_meta = Vec::with_capacity(cells.len());
    let mut image_meta = Vec::with_capacity(cells.len());
    let mut query_specs = Vec::with_capacity(cells.len());
    for c in &cells {
        let (lang, country) = &spec.labels[c.label];
        let concept = concept_name(c.concept);
        query_meta.push(ItemMeta::text(&c.query_id, lang, country, vec![concept.clone()]));
        image_meta.push(ItemMeta::image(&c.image_id, country, vec![concept.clone()]));
        query_specs.push(QuerySpec {
            id: c.query_id.clone(),
            text: format!("{concept} ({lang})"),
            language: lang.to_lowercase(),
            country: country.clone(),
            concept,
        });
    }

    let assembly = assemble_triplets(
        &image_meta,
        &query_specs,
        &AssemblyConfig {
            seed: spec.seed,
            triplets_per_query: 1,
            require_distinct_countries: true,
        },
    )
    .expect("one triplet per query is a valid request");

    let queries = EmbeddingSet::from_records(spec.dim, query_records).expect("generated records are valid");
    let images = EmbeddingSet::from_records(spec.dim, image_records).expect("generated records are valid");
    Ok(EmbeddingWorld {
        queries: join_meta(queries, query_meta).expect("generated ids are unique"),
        images: join_meta(images, image_meta).expect("generated ids are unique"),
        manifest: assembly.entries,
    })
}
