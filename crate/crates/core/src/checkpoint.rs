//! Versioned binary container for model tensors.
//!
//! Layout, all integers little-endian:
//! `b"HGMCKPT\0"`, `u32` version, `u64` config hash, `u32` metadata length and
//! metadata JSON, `u32` tensor count, then per tensor `u32` name length, name,
//! `u64` rows, `u64` cols and `rows·cols` `f64` values in row-major order.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Level1Model, Level2Dims, Level2Model, Parameters, PathDims};
use crate::sparse::DenseMatrix;

pub const MAGIC: &[u8; 8] = b"HGMCKPT\0";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum CheckpointMeta {
    Level1 { dims: PathDims },
    Level2 { dims: Level2Dims, genres: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config_hash: u64,
    pub meta: CheckpointMeta,
    pub tensors: Vec<(String, DenseMatrix)>,
}

impl Checkpoint {
    pub fn from_model<M: Parameters>(model: &M, meta: CheckpointMeta, config_hash: u64) -> Self {
        Self {
            config_hash,
            meta,
            tensors: model.tensors().into_iter().map(|(n, t)| (n, t.clone())).collect(),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.config_hash.to_le_bytes());
        let meta = serde_json::to_vec(&self.meta)?;
        out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
        out.extend_from_slice(&meta);
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for (name, t) in &self.tensors {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&(t.rows() as u64).to_le_bytes());
            out.extend_from_slice(&(t.cols() as u64).to_le_bytes());
            for v in t.as_slice() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = bytes;
        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::data("not a checkpoint file (bad magic)"));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(Error::data(format!("unsupported checkpoint version {version}")));
        }
        let config_hash = read_u64(&mut r)?;
        let meta_len = read_u32(&mut r)? as usize;
        let meta: CheckpointMeta = serde_json::from_slice(take(&mut r, meta_len)?)?;
        let count = read_u32(&mut r)?;
        let mut tensors = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let name_len = read_u32(&mut r)? as usize;
            let name = String::from_utf8(take(&mut r, name_len)?.to_vec())
                .map_err(|_| Error::data("tensor name is not UTF-8"))?;
            let rows = read_u64(&mut r)? as usize;
            let cols = read_u64(&mut r)? as usize;
            let n = rows
                .checked_mul(cols)
                .filter(|n| n.checked_mul(8).is_some_and(|b| b <= r.len()))
                .ok_or_else(|| Error::data(format!("tensor `{name}` is truncated")))?;
            let data = take(&mut r, n * 8)?
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect();
            tensors.push((name, DenseMatrix::from_vec(rows, cols, data)?));
        }
        if !r.is_empty() {
            return Err(Error::data(format!("{} trailing bytes in checkpoint", r.len())));
        }
        Ok(Self {
            config_hash,
            meta,
            tensors,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_bytes()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// Copies every stored tensor into the same-named tensor of `model`.
    pub fn restore_into<M: Parameters>(&self, model: &mut M) -> Result<()> {
        let mut targets = model.tensors_mut();
        if targets.len() != self.tensors.len() {
            return Err(Error::data(format!(
                "checkpoint holds {} tensors, model has {}",
                self.tensors.len(),
                targets.len()
            )));
        }
        for (name, src) in &self.tensors {
            let (_, dst) = targets
                .iter_mut()
                .find(|(n, _)| n == name)
                .ok_or_else(|| Error::data(format!("model has no tensor `{name}`")))?;
            if dst.shape() != src.shape() {
                return Err(Error::shape(format!(
                    "tensor `{name}` is {:?} in the checkpoint, {:?} in the model",
                    src.shape(),
                    dst.shape()
                )));
            }
            **dst = src.clone();
        }
        Ok(())
    }

    fn tensor(&self, name: &str) -> Result<&DenseMatrix> {
        self.tensors
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
            .ok_or_else(|| Error::data(format!("checkpoint has no tensor `{name}`")))
    }

    pub fn level1_model(&self) -> Result<Level1Model> {
        let CheckpointMeta::Level1 { dims } = &self.meta else {
            return Err(Error::data("checkpoint does not hold a level-1 model"));
        };
        let mut m = Level1Model::new(*dims, 0)?;
        self.restore_into(&mut m)?;
        Ok(m)
    }

    pub fn level2_model(&self) -> Result<(Level2Model, Vec<String>)> {
        let CheckpointMeta::Level2 { dims, genres } = &self.meta else {
            return Err(Error::data("checkpoint does not hold a level-2 model"));
        };
        let mut m = Level2Model::new(*dims, self.tensor("label.static")?.clone(), 0)?;
        self.restore_into(&mut m)?;
        Ok((m, genres.clone()))
    }
}

fn take<'a>(r: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if r.len() < n {
        return Err(Error::data("checkpoint is truncated"));
    }
    let (head, tail) = r.split_at(n);
    *r = tail;
    Ok(head)
}

fn read_exact(r: &mut &[u8], buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|_| Error::data("checkpoint is truncated"))
}

fn read_u32(r: &mut &[u8]) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut &[u8]) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}
