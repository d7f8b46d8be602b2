//! Checkpoint directories: `manifest.json` plus one raw tensor file per
//! matrix (`w0.bin`, `e1.bin`, `p1.bin`, `v1.bin`, ...).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::error::{NgcError, Result};
use crate::model::params::GncnParams;
use crate::tensor_io::{read_matrix, write_matrix};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub file: String,
    pub shape: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub config: ModelConfig,
    pub layer_sizes: Vec<usize>,
    pub seed: u64,
    pub epoch: usize,
    pub tensors: Vec<TensorEntry>,
}

pub fn save_checkpoint(dir: &Path, params: &GncnParams, epoch: usize) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|e| NgcError::io(dir, e))?;
    let mut tensors = Vec::new();
    for (name, m) in params.named_tensors() {
        let file = format!("{name}.bin");
        write_matrix(&dir.join(&file), m)?;
        tensors.push(TensorEntry {
            name,
            file,
            shape: [m.nrows(), m.ncols()],
        });
    }
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        config: params.config.clone(),
        layer_sizes: params.config.layer_sizes.clone(),
        seed: params.config.seed,
        epoch,
        tensors,
    };
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| NgcError::io(&path, e))?;
    Ok(manifest)
}

pub fn load_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| NgcError::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(NgcError::Checkpoint(format!(
            "unsupported format version {}",
            manifest.format_version
        )));
    }
    if manifest.layer_sizes != manifest.config.layer_sizes {
        return Err(NgcError::Checkpoint("layer_sizes disagree with config".into()));
    }
    Ok(manifest)
}

/// Loads a checkpoint, checking every tensor against the manifest and the
/// manifest against the model layout.
pub fn load_checkpoint(dir: &Path) -> Result<(GncnParams, Manifest)> {
    let manifest = load_manifest(dir)?;
    let template = GncnParams::new(manifest.config.clone())?;
    let expected: Vec<(String, [usize; 2])> = template
        .named_tensors()
        .into_iter()
        .map(|(n, m)| (n, [m.nrows(), m.ncols()]))
        .collect();
    let listed: Vec<(String, [usize; 2])> =
        manifest.tensors.iter().map(|t| (t.name.clone(), t.shape)).collect();
    if expected != listed {
        return Err(NgcError::Checkpoint(format!(
            "tensor list {listed:?} does not match model layout {expected:?}"
        )));
    }
    let mut params = template;
    let depth = params.depth();
    for entry in &manifest.tensors {
        let m = read_matrix(&dir.join(&entry.file), entry.shape[0], entry.shape[1])?;
        let (kind, idx) = entry.name.split_at(1);
        let idx: usize = idx
            .parse()
            .map_err(|_| NgcError::Checkpoint(format!("bad tensor name {}", entry.name)))?;
        let slot = match kind {
            "w" if idx < depth => params.w_mut(idx),
            "e" if (1..=depth).contains(&idx) => params.e_mut(idx),
            "p" if (1..depth).contains(&idx) => params.p_mut(idx),
            "v" if (1..=depth).contains(&idx) => params.v_mut(idx),
            _ => return Err(NgcError::Checkpoint(format!("unexpected tensor {}", entry.name))),
        };
        *slot = m;
    }
    params.check_shapes()?;
    Ok((params, manifest))
}
