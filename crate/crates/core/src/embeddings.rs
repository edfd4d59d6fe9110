//! Frozen document and word vectors.
//!
//! The classifier never trains its encoders. Document vectors come from an
//! [`EmbeddingProvider`]: either a table precomputed by an external language
//! model, or the built-in feature-hashing encoder.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::tokenize;
use crate::error::{Error, Result};
use crate::sparse::DenseMatrix;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over the UTF-8 bytes of `s`, with the offset basis xored by `seed`.
pub fn stable_hash(s: &str, seed: u64) -> u64 {
    let mut h = FNV_OFFSET ^ seed;
    for &b in s.as_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Key under which a precomputed table stores the vector of an arbitrary text.
pub fn text_key(text: &str) -> String {
    format!("h:{:016x}", stable_hash(text, 0))
}

pub trait EmbeddingProvider: Send + Sync {
    fn dim(&self) -> usize;

    fn embed(&self, text: &str) -> Result<Vec<f64>>;

    /// Embeds a document that also has a stable id. Table-backed providers
    /// look the id up first.
    fn embed_document(&self, _id: &str, text: &str) -> Result<Vec<f64>> {
        self.embed(text)
    }
}

/// Bag-of-tokens feature hashing, L2-normalised.
#[derive(Debug, Clone)]
pub struct HashingEncoder {
    dim: usize,
    seed: u64,
}

impl HashingEncoder {
    pub const DEFAULT_SEED: u64 = 0x5eed;

    pub fn new(dim: usize) -> Result<Self> {
        Self::with_seed(dim, Self::DEFAULT_SEED)
    }

    pub fn with_seed(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("embedding dim must be positive"));
        }
        Ok(Self { dim, seed })
    }

    pub fn bucket(&self, token: &str) -> usize {
        (stable_hash(token, self.seed) % self.dim as u64) as usize
    }
}

impl EmbeddingProvider for HashingEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.dim];
        for token in tokenize(text) {
            v[self.bucket(&token)] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        Ok(v)
    }
}

/// Id (or [`text_key`]) to vector map with one shared width.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.vectors.get(key).map(Vec::as_slice)
    }

    pub fn insert(&mut self, key: impl Into<String>, v: Vec<f64>) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::shape(format!(
                "vector of length {} in a table of dim {}",
                v.len(),
                self.dim
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::numeric("non-finite embedding value"));
        }
        self.vectors.insert(key.into(), v);
        Ok(())
    }

    /// Reads the TSV format: a `#dim=<j>` header, then `key \t v1 \t … \t vj` rows.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = BufReader::new(File::open(path)?).lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        let dim: usize = header
            .trim()
            .strip_prefix("#dim=")
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| err(1, format!("expected `#dim=<j>` header, got `{header}`")))?;
        let mut table = Self::new(dim);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let lineno = i + 2;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let key = fields.next().unwrap_or_default().to_string();
            let values: Vec<f64> = fields
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| err(lineno, format!("bad number: {e}")))?;
            if values.len() != dim {
                return Err(err(
                    lineno,
                    format!("row `{key}` has {} values, header says {dim}", values.len()),
                ));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(err(lineno, format!("row `{key}` has a non-finite value")));
            }
            table.vectors.insert(key, values);
        }
        log::info!("loaded {} embeddings of dim {dim} from {}", table.len(), path.display());
        Ok(table)
    }

    /// Writes rows sorted by key. Values use the shortest representation that
    /// parses back to the same `f64`.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "#dim={}", self.dim)?;
        let mut keys: Vec<&String> = self.vectors.keys().collect();
        keys.sort();
        for k in keys {
            write!(out, "{k}")?;
            for v in &self.vectors[k] {
                write!(out, "\t{v}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Provider backed by an [`EmbeddingTable`].
#[derive(Debug, Clone)]
pub struct PrecomputedProvider {
    table: EmbeddingTable,
}

impl PrecomputedProvider {
    pub fn new(table: EmbeddingTable) -> Self {
        Self { table }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        EmbeddingTable::load(path).map(Self::new)
    }
}

impl EmbeddingProvider for PrecomputedProvider {
    fn dim(&self) -> usize {
        self.table.dim()
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        let key = text_key(text);
        self.table
            .get(&key)
            .map(<[f64]>::to_vec)
            .ok_or(Error::MissingEmbedding(key))
    }

    fn embed_document(&self, id: &str, text: &str) -> Result<Vec<f64>> {
        match self.table.get(id) {
            Some(v) => Ok(v.to_vec()),
            None => self.embed(text),
        }
    }
}

/// Static word vectors read from a whitespace-separated text file.
#[derive(Debug, Clone, Default)]
pub struct WordVectors {
    pub dim: usize,
    pub vectors: HashMap<String, Vec<f64>>,
    /// Tokens that appeared on more than one line (last occurrence kept).
    pub duplicates: Vec<String>,
}

impl WordVectors {
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }
}

/// Reads `token v1 v2 …` lines. Every row must have the width of the first.
pub fn load_word_vectors(path: impl AsRef<Path>) -> Result<WordVectors> {
    let path = path.as_ref();
    let mut out = WordVectors::default();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        let mut parts = line.split_whitespace();
        let Some(token) = parts.next() else { continue };
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let values: Vec<f64> = parts
            .map(str::parse::<f64>)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| err(format!("bad number: {e}")))?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(err(format!("non-finite value for `{token}`")));
        }
        if out.vectors.is_empty() && out.duplicates.is_empty() {
            out.dim = values.len();
        }
        if values.len() != out.dim || values.is_empty() {
            return Err(err(format!(
                "`{token}` has {} values, expected {}",
                values.len(),
                out.dim
            )));
        }
        if out.vectors.insert(token.to_string(), values).is_some() {
            log::warn!(
                "duplicate word vector for `{token}` at line {}; keeping the last",
                i + 1
            );
            out.duplicates.push(token.to_string());
        }
    }
    Ok(out)
}

/// Frozen random linear map used when document vectors and word features
/// have different widths. Entries are uniform with variance `1/from`.
pub fn fixed_projection(from: usize, to: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = (3.0 / from.max(1) as f64).sqrt();
    let data = (0..from * to).map(|_| rng.gen_range(-bound..bound)).collect();
    DenseMatrix::from_vec(from, to, data).expect("finite projection")
}

/// Deterministic pseudo-random vector for a word, uniform in `±sqrt(3/dim)`.
/// Stands in for pretrained word vectors when none are configured.
pub fn hashed_word_vector(word: &str, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(stable_hash(word, seed));
    let bound = (3.0 / dim.max(1) as f64).sqrt();
    (0..dim).map(|_| rng.gen_range(-bound..bound)).collect()
}
