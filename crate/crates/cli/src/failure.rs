use std::fmt;
use std::path::Path;

use lingbias::analytics::AnalyticsError;
use lingbias::corpus::{CatalogError, EmbeddingError, ManifestError, MetaError};
use lingbias::dataset::DatasetError;
use lingbias::metrics::MetricError;
use lingbias::retrieval::{RunError, ScoreError};
use lingbias::synth::SynthError;
use lingbias::triplet_eval::TripletEvalError;

/// A command failure, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Exit 1: files missing or unreadable, output not writable.
    Io(String),
    /// Exit 2: inputs readable but invalid, or a domain error.
    Domain(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Io(_) => 1,
            Failure::Domain(_) => 2,
        }
    }

    pub fn domain(msg: impl fmt::Display) -> Self {
        Failure::Domain(msg.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Io(m) | Failure::Domain(m) => f.write_str(m),
        }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

pub fn write_failed(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("cannot write {}: {e}", path.display()))
}

pub fn read_failed(path: &Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("cannot read {}: {e}", path.display()))
}

macro_rules! io_or_domain {
    ($($t:ident),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                match e {
                    $t::Io { .. } => Failure::Io(e.to_string()),
                    _ => Failure::Domain(e.to_string()),
                }
            }
        }
    )*};
}

io_or_domain!(EmbeddingError, MetaError, CatalogError, ManifestError, RunError);

macro_rules! domain {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Domain(e.to_string())
            }
        }
    )*};
}

domain!(
    MetricError,
    ScoreError,
    TripletEvalError,
    SynthError,
    AnalyticsError,
    DatasetError
);
