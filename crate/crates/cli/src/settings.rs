use std::fs;
use std::path::{Path, PathBuf};

use lingbias::report::Provenance;
use lingbias::retrieval::Similarity;
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::failure::{read_failed, write_failed, CmdResult, Failure};
use crate::GlobalArgs;

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Input locations a config file may provide; subcommand flags take precedence.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathConfig {
    pub queries: Option<PathBuf>,
    pub queries_meta: Option<PathBuf>,
    pub docs: Option<PathBuf>,
    pub docs_meta: Option<PathBuf>,
    pub images: Option<PathBuf>,
    pub images_meta: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub run: Option<PathBuf>,
    pub qrels: Option<PathBuf>,
    pub pool: Option<PathBuf>,
    pub query_specs: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub epsilon: Option<f64>,
    pub scorer: Option<String>,
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub paths: PathConfig,
}

/// Effective job settings after merging the config file with flags.
#[derive(Debug)]
pub struct Settings {
    pub seed: u64,
    pub k: Option<usize>,
    pub epsilon: f64,
    pub scorer: Similarity,
    pub threads: Option<usize>,
    pub out_dir: PathBuf,
    pub paths: PathConfig,
}

impl Settings {
    pub fn resolve(flags: &GlobalArgs) -> CmdResult<Self> {
        let file = match &flags.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| read_failed(p, e))?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| Failure::Domain(format!("config {}: {e}", p.display())))?
            }
            None => FileConfig::default(),
        };
        let scorer = match (&flags.scorer, &file.scorer) {
            (Some(s), _) => *s,
            (None, Some(s)) => s.parse().map_err(Failure::Domain)?,
            (None, None) => Similarity::Cosine,
        };
        let epsilon = flags.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON);
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Failure::Domain(format!("epsilon must be a finite value >= 0, got {epsilon}")));
        }
        let k = flags.k.or(file.k);
        if k == Some(0) {
            return Err(Failure::Domain("k must be at least 1".into()));
        }
        Ok(Self {
            seed: flags.seed.or(file.seed).unwrap_or(0),
            k,
            epsilon,
            scorer,
            threads: flags.threads.or(file.threads),
            out_dir: flags
                .out_dir
                .clone()
                .or(file.out_dir)
                .unwrap_or_else(|| PathBuf::from(".")),
            paths: file.paths,
        })
    }

    pub fn k_or_default(&self) -> usize {
        self.k.unwrap_or(DEFAULT_K)
    }

    /// Provenance for a command. The hash covers everything that can change
    /// report content; thread count and output directory are left out.
    pub fn provenance(&self, command: &str, params: Value) -> Provenance {
        let canonical = json!({
            "command": command,
            "seed": self.seed,
            "k": self.k,
            "epsilon": self.epsilon,
            "scorer": format!("{:?}", self.scorer).to_lowercase(),
            "params": params,
        });
        let digest = Sha256::digest(canonical.to_string().as_bytes());
        Provenance {
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            config_hash: hex::encode(digest),
            seed: self.seed,
        }
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> CmdResult<PathBuf> {
        fs::create_dir_all(&self.out_dir).map_err(|e| write_failed(&self.out_dir, e))?;
        let path = self.out_path(name);
        fs::write(&path, contents).map_err(|e| write_failed(&path, e))?;
        println!("wrote {}", path.display());
        Ok(path)
    }
}

/// Flag value, else config value, else a "missing input" error naming the flag.
pub fn pick(flag: &Option<PathBuf>, config: &Option<PathBuf>, name: &str) -> CmdResult<PathBuf> {
    flag.clone()
        .or_else(|| config.clone())
        .ok_or_else(|| Failure::Domain(format!("missing input: pass --{name} or set paths.{}", name.replace('-', "_"))))
}

pub fn pick_opt(flag: &Option<PathBuf>, config: &Option<PathBuf>) -> Option<PathBuf> {
    flag.clone().or_else(|| config.clone())
}

/// Fails with an I/O error if any input is missing, before work starts.
pub fn require_files<'a>(paths: impl IntoIterator<Item = &'a Path>) -> CmdResult {
    for p in paths {
        if !p.is_file() {
            return Err(Failure::Io(format!("input file not found: {}", p.display())));
        }
    }
    Ok(())
}

pub fn path_value(p: &Path) -> Value {
    Value::String(p.display().to_string())
}
