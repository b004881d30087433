#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lingbias::corpus::{encode_manifest, encode_meta};
use lingbias::synth::{gen_embedding_world, ClusterSpec};

pub fn lingbias(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lingbias"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().unwrap_or(-1)
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

pub fn world_spec(alignment: f64) -> ClusterSpec {
    ClusterSpec {
        labels: [("en", "USA"), ("ja", "JPN"), ("th", "THA"), ("sw", "KEN")]
            .iter()
            .map(|(l, c)| (l.to_string(), c.to_string()))
            .collect(),
        points_per_label: 6,
        dim: 16,
        centroid_separation: 1.2,
        noise_sigma: 0.05,
        alignment,
        seed: 21,
    }
}

pub struct WorldFiles {
    pub queries: PathBuf,
    pub queries_meta: PathBuf,
    pub images: PathBuf,
    pub images_meta: PathBuf,
    pub manifest: PathBuf,
    /// Query specs for triplet assembly, one per text query.
    pub specs: PathBuf,
}

/// Writes a synthetic world into `dir` through the library, not the binary.
pub fn write_world(dir: &Path, alignment: f64) -> WorldFiles {
    let w = gen_embedding_world(&world_spec(alignment)).unwrap();
    let f = WorldFiles {
        queries: dir.join("q.pemb"),
        queries_meta: dir.join("q.jsonl"),
        images: dir.join("i.pemb"),
        images_meta: dir.join("i.jsonl"),
        manifest: dir.join("m.jsonl"),
        specs: dir.join("specs.jsonl"),
    };
    fs::write(&f.queries, w.queries.embeddings.encode()).unwrap();
    fs::write(&f.queries_meta, encode_meta(w.queries.meta.iter())).unwrap();
    fs::write(&f.images, w.images.embeddings.encode()).unwrap();
    fs::write(&f.images_meta, encode_meta(w.images.meta.iter())).unwrap();
    fs::write(&f.manifest, encode_manifest(&w.manifest)).unwrap();
    let specs: String = w
        .queries
        .meta
        .iter()
        .map(|m| {
            serde_json::json!({
                "id": m.id, "text": m.id, "language": m.language,
                "country": m.country, "concept": m.concepts[0],
            })
            .to_string()
                + "\n"
        })
        .collect();
    fs::write(&f.specs, specs).unwrap();
    f
}

/// Every file in `dir`, sorted by name, with contents.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

/// Rows of a CSV report without the provenance line.
pub fn csv_body(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn metric(path: &Path, name: &str) -> f64 {
    csv_body(path)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{name},")))
        .unwrap_or_else(|| panic!("metric {name} missing"))
        .parse()
        .unwrap()
}

/// Runs each pipeline command into `out`, returning the first failure.
pub fn run_all_commands(w: &WorldFiles, out: &Path, threads: &str) -> Result<(), String> {
    let o = s(out);
    let commands: Vec<Vec<&str>> = vec![
        vec!["validate", "--embeddings", s(&w.queries), "--meta", s(&w.queries_meta)],
        vec!["retrieve", "--queries", s(&w.images), "--docs", s(&w.queries)],
        vec![
            "eval-i2t", "--queries", s(&w.images), "--docs", s(&w.queries), "--docs-meta", s(&w.queries_meta),
            "--queries-meta", s(&w.images_meta),
        ],
        vec!["eval-t2i", "--queries", s(&w.queries), "--images", s(&w.images), "--manifest", s(&w.manifest)],
        vec![
            "triplets", "--pool", s(&w.images_meta), "--query-specs", s(&w.specs), "--per-query", "2", "--dedup-embeddings",
            s(&w.images),
        ],
        vec!["synth", "lists", "--pattern", "uniform-random", "--languages", "en:6,th:4", "--n-queries", "20"],
        vec!["synth", "world", "--labels", "en:USA,ja:JPN,th:THA", "--points-per-label", "4", "--dim", "12"],
        vec![
            "analyze", "--embeddings", s(&w.queries), "--meta", s(&w.queries_meta), "--label-key", "country",
            "--image-embeddings", s(&w.images), "--image-meta", s(&w.images_meta),
        ],
        vec!["report"],
    ];
    for mut cmd in commands {
        cmd.extend(["--seed", "5", "--threads", threads, "--out-dir", o]);
        let r = lingbias(&cmd);
        if !r.status.success() {
            return Err(format!("{:?} failed: {}", cmd[0], stderr(&r)));
        }
    }
    Ok(())
}
