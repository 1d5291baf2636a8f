//! Flat parameter checkpoints: `params.bin` holds every parameter as
//! row-major little-endian `f32`, back to back; `manifest.json` lists the
//! name, shape and offset of each entry.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{NnError, Parameter, Scalar, Tensor};

pub const CHECKPOINT_FORMAT: &str = "tabenc-f32le-v1";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const VALUES_FILE: &str = "params.bin";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub shape: Vec<usize>,
    /// Offset in values (not bytes) into `params.bin`.
    pub offset: usize,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub entries: Vec<ManifestEntry>,
}

pub fn save_checkpoint<F: Scalar>(params: &[&Parameter<F>], dir: &Path) -> Result<Manifest, NnError> {
    fs::create_dir_all(dir)?;
    let mut bytes = Vec::new();
    let mut entries = Vec::with_capacity(params.len());
    let mut offset = 0;
    for p in params {
        let count = p.value.len();
        for v in p.value.data() {
            let v = v.to_f32().unwrap_or(f32::NAN);
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        entries.push(ManifestEntry {
            name: p.name.clone(),
            shape: p.value.shape().to_vec(),
            offset,
            count,
        });
        offset += count;
    }
    let manifest = Manifest {
        format: CHECKPOINT_FORMAT.to_string(),
        entries,
    };
    fs::write(dir.join(VALUES_FILE), bytes)?;
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(manifest)
}

pub fn load_checkpoint(dir: &Path) -> Result<Vec<(String, Tensor<f32>)>, NnError> {
    let manifest: Manifest = serde_json::from_slice(&fs::read(dir.join(MANIFEST_FILE))?)?;
    if manifest.format != CHECKPOINT_FORMAT {
        return Err(NnError::Checkpoint(format!("unknown format {:?}", manifest.format)));
    }
    let bytes = fs::read(dir.join(VALUES_FILE))?;
    if bytes.len() % 4 != 0 {
        return Err(NnError::Checkpoint("value file length is not a multiple of 4".into()));
    }
    let values: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    manifest
        .entries
        .into_iter()
        .map(|e| {
            let end = e.offset + e.count;
            if end > values.len() || e.shape.iter().product::<usize>() != e.count {
                return Err(NnError::Checkpoint(format!("entry {} out of bounds", e.name)));
            }
            Ok((e.name, Tensor::from_vec(&e.shape, values[e.offset..end].to_vec())))
        })
        .collect()
}

/// Copies checkpoint values into parameters, matched by name and shape.
pub fn restore<F: Scalar>(params: &mut [&mut Parameter<F>], dir: &Path) -> Result<(), NnError> {
    let loaded = load_checkpoint(dir)?;
    if loaded.len() != params.len() {
        return Err(NnError::Checkpoint(format!(
            "checkpoint has {} entries, model has {}",
            loaded.len(),
            params.len()
        )));
    }
    for (p, (name, t)) in params.iter_mut().zip(loaded) {
        if p.name != name || p.value.shape() != t.shape() {
            return Err(NnError::Checkpoint(format!(
                "entry {name} {:?} does not match parameter {} {:?}",
                t.shape(),
                p.name,
                p.value.shape()
            )));
        }
        for (dst, &src) in p.value.data_mut().iter_mut().zip(t.data()) {
            *dst = F::lit(src as f64);
        }
    }
    Ok(())
}
