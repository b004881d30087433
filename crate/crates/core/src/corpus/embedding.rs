//! Embedding records and the `PEMB` binary container.
//!
//! Layout (all integers little-endian, no padding):
//!
//! ```text
//! header : "PEMB" | u16 version (=1) | u8 flags (bit0 = multi_vector) | u32 dim | u64 count
//! record : u16 id_len | id (UTF-8) | u32 n_vectors | n_vectors * dim * f32
//! ```
//!
//! Encoding is canonical: a file that loads without error re-encodes to the
//! same bytes.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"PEMB";
pub const FORMAT_VERSION: u16 = 1;
const FLAG_MULTI_VECTOR: u8 = 0b0000_0001;
const HEADER_LEN: usize = 4 + 2 + 1 + 4 + 8;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("bad magic at offset 0: expected \"PEMB\", found {found:02x?}")]
    BadMagic { found: Vec<u8> },
    #[error("unsupported format version {version} at offset 4")]
    VersionUnsupported { version: u16 },
    #[error("unknown flag bits {flags:#010b} at offset 6")]
    UnknownFlags { flags: u8 },
    #[error("truncated payload at offset {offset}: needed {needed} more bytes, {available} available")]
    TruncatedPayload {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("{trailing} trailing bytes after last record at offset {offset}")]
    TrailingBytes { offset: usize, trailing: usize },
    #[error("duplicate id {id:?} at offset {offset}")]
    DuplicateId { id: String, offset: usize },
    #[error("non-finite value in record {id:?} at offset {offset}")]
    NonFiniteValue { id: String, offset: usize },
    #[error("id at offset {offset} is not valid UTF-8")]
    InvalidId { offset: usize },
    #[error("dimension must be positive")]
    ZeroDim,
    #[error("record {id:?} has no vectors")]
    EmptyRecord { id: String },
    #[error("record {id:?} has {n_vectors} vectors but the set is single-vector")]
    NotSingleVector { id: String, n_vectors: usize },
    #[error("record {id:?} has a vector of length {found}, set dim is {dim}")]
    DimMismatch { id: String, dim: usize, found: usize },
    #[error("id {id:?} is {len} bytes, longer than the u16 length prefix allows")]
    IdTooLong { id: String, len: usize },
}

/// One item: a single vector, or a token matrix for late-interaction models.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub id: String,
    pub vectors: Vec<Vec<f32>>,
}

impl EmbeddingRecord {
    pub fn single(id: impl Into<String>, vector: Vec<f32>) -> Self {
        Self {
            id: id.into(),
            vectors: vec![vector],
        }
    }

    pub fn multi(id: impl Into<String>, vectors: Vec<Vec<f32>>) -> Self {
        Self {
            id: id.into(),
            vectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    pub fn is_multi_vector(&self) -> bool {
        self.vectors.len() > 1
    }

    /// Mean of the token vectors, in f64. A single-vector record returns its vector.
    pub fn mean_pooled(&self) -> Vec<f64> {
        let dim = self.dim();
        let mut out = vec![0.0f64; dim];
        for v in &self.vectors {
            for (o, &x) in out.iter_mut().zip(v) {
                *o += f64::from(x);
            }
        }
        let n = self.vectors.len().max(1) as f64;
        out.iter_mut().for_each(|o| *o /= n);
        out
    }

    fn encoded_len(&self, dim: usize) -> usize {
        2 + self.id.len() + 4 + self.vectors.len() * dim * 4
    }

    /// `offset` is where this record would start in the encoded file.
    fn validate(&self, dim: usize, multi_vector: bool, offset: usize) -> Result<(), EmbeddingError> {
        if self.vectors.is_empty() {
            return Err(EmbeddingError::EmptyRecord {
                id: self.id.clone(),
            });
        }
        if !multi_vector && self.vectors.len() != 1 {
            return Err(EmbeddingError::NotSingleVector {
                id: self.id.clone(),
                n_vectors: self.vectors.len(),
            });
        }
        let body = offset + 2 + self.id.len() + 4;
        for (vi, v) in self.vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(EmbeddingError::DimMismatch {
                    id: self.id.clone(),
                    dim,
                    found: v.len(),
                });
            }
            if let Some(ci) = v.iter().position(|x| !x.is_finite()) {
                return Err(EmbeddingError::NonFiniteValue {
                    id: self.id.clone(),
                    offset: body + (vi * dim + ci) * 4,
                });
            }
        }
        Ok(())
    }
}

/// A validated, id-unique collection of records sharing one dimension.
///
/// Immutable after construction; record order is the file order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    dim: usize,
    multi_vector: bool,
    records: Vec<EmbeddingRecord>,
    index: HashMap<String, usize>,
}

impl EmbeddingSet {
    fn assemble(dim: usize, multi_vector: bool, records: Vec<EmbeddingRecord>) -> Self {
        let index = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone(), i))
            .collect();
        Self {
            dim,
            multi_vector,
            records,
            index,
        }
    }

    pub fn new(
        dim: usize,
        multi_vector: bool,
        records: Vec<EmbeddingRecord>,
    ) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDim);
        }
        let mut seen = HashSet::with_capacity(records.len());
        let mut offset = HEADER_LEN;
        for r in &records {
            r.validate(dim, multi_vector, offset)?;
            if r.id.len() > usize::from(u16::MAX) {
                return Err(EmbeddingError::IdTooLong {
                    id: r.id.clone(),
                    len: r.id.len(),
                });
            }
            if !seen.insert(r.id.as_str()) {
                return Err(EmbeddingError::DuplicateId {
                    id: r.id.clone(),
                    offset,
                });
            }
            offset += r.encoded_len(dim);
        }
        Ok(Self::assemble(dim, multi_vector, records))
    }

    /// Builds a set and infers `multi_vector` from the records.
    pub fn from_records(dim: usize, records: Vec<EmbeddingRecord>) -> Result<Self, EmbeddingError> {
        let multi = records.iter().any(EmbeddingRecord::is_multi_vector);
        Self::new(dim, multi, records)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_multi_vector(&self) -> bool {
        self.multi_vector
    }

    pub fn records(&self) -> &[EmbeddingRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&EmbeddingRecord> {
        self.index.get(id).map(|&i| &self.records[i])
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.id.as_str())
    }

    pub fn encode(&self) -> Vec<u8> {
        let payload: usize = self.records.iter().map(|r| r.encoded_len(self.dim)).sum();
        let mut out = Vec::with_capacity(HEADER_LEN + payload);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(if self.multi_vector { FLAG_MULTI_VECTOR } else { 0 });
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.records.len() as u64).to_le_bytes());
        for r in &self.records {
            out.extend_from_slice(&(r.id.len() as u16).to_le_bytes());
            out.extend_from_slice(r.id.as_bytes());
            out.extend_from_slice(&(r.vectors.len() as u32).to_le_bytes());
            for v in &r.vectors {
                for x in v {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, EmbeddingError> {
        let mut cur = Cursor { bytes, pos: 0 };
        let magic = cur.take(4)?;
        if magic != MAGIC {
            return Err(EmbeddingError::BadMagic {
                found: magic.to_vec(),
            });
        }
        let version = cur.u16()?;
        if version != FORMAT_VERSION {
            return Err(EmbeddingError::VersionUnsupported { version });
        }
        let flags = cur.u8()?;
        if flags & !FLAG_MULTI_VECTOR != 0 {
            return Err(EmbeddingError::UnknownFlags { flags });
        }
        let multi_vector = flags & FLAG_MULTI_VECTOR != 0;
        let dim = cur.u32()? as usize;
        if dim == 0 {
            return Err(EmbeddingError::ZeroDim);
        }
        let count = cur.u64()?;

        let mut records = Vec::new();
        let mut seen = HashSet::new();
        for _ in 0..count {
            let id_offset = cur.pos;
            let id_len = usize::from(cur.u16()?);
            let id = std::str::from_utf8(cur.take(id_len)?)
                .map_err(|_| EmbeddingError::InvalidId { offset: id_offset + 2 })?
                .to_owned();
            if !seen.insert(id.clone()) {
                return Err(EmbeddingError::DuplicateId {
                    id,
                    offset: id_offset,
                });
            }
            let n_vectors = cur.u32()? as usize;
            if n_vectors == 0 {
                return Err(EmbeddingError::EmptyRecord { id });
            }
            if !multi_vector && n_vectors != 1 {
                return Err(EmbeddingError::NotSingleVector { id, n_vectors });
            }
            let body_offset = cur.pos;
            let body = cur.take(n_vectors.saturating_mul(dim).saturating_mul(4))?;
            let mut vectors = Vec::with_capacity(n_vectors);
            for (vi, chunk) in body.chunks_exact(dim * 4).enumerate() {
                let mut v = Vec::with_capacity(dim);
                for (ci, b) in chunk.chunks_exact(4).enumerate() {
                    let x = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
                    if !x.is_finite() {
                        return Err(EmbeddingError::NonFiniteValue {
                            id,
                            offset: body_offset + (vi * dim + ci) * 4,
                        });
                    }
                    v.push(x);
                }
                vectors.push(v);
            }
            records.push(EmbeddingRecord { id, vectors });
        }
        if cur.pos != bytes.len() {
            return Err(EmbeddingError::TrailingBytes {
                offset: cur.pos,
                trailing: bytes.len() - cur.pos,
            });
        }
        Ok(Self::assemble(dim, multi_vector, records))
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], EmbeddingError> {
        let available = self.bytes.len() - self.pos;
        if n > available {
            return Err(EmbeddingError::TruncatedPayload {
                offset: self.pos,
                needed: n,
                available,
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, EmbeddingError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, EmbeddingError> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, EmbeddingError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn u64(&mut self) -> Result<u64, EmbeddingError> {
        let b = self.take(8)?;
        let mut a = [0u8; 8];
        a.copy_from_slice(b);
        Ok(u64::from_le_bytes(a))
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingSet, EmbeddingError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    EmbeddingSet::decode(&bytes)
}

pub fn write_embeddings(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<(), EmbeddingError> {
    let path = path.as_ref();
    fs::write(path, set.encode()).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })
}
