//! Network checkpoints: a JSON manifest next to a raw little-endian `f32`
//! blob holding `W0, b0, W1, b1, ...` in layer order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::mlp::{param_count, HiddenActivation, Mlp, OutputActivation};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkManifest {
    pub format_version: u32,
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: HiddenActivation,
    pub output_activation: OutputActivation,
    pub seed: u64,
    pub step_count: u64,
    pub param_count: usize,
}

impl NetworkManifest {
    pub fn describe(net: &Mlp, step_count: u64) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            layer_sizes: net.layer_sizes().to_vec(),
            hidden_activation: net.hidden_activation(),
            output_activation: net.output_activation(),
            seed: net.seed(),
            step_count,
            param_count: net.num_params(),
        }
    }
}

pub fn encode_f32_le(values: &[f32]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn decode_f32_le(bytes: &[u8]) -> Result<Vec<f32>> {
    if !bytes.len().is_multiple_of(4) {
        return Err(NnError::Checkpoint(format!(
            "blob length {} is not a multiple of 4",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

pub fn write_f32_blob(path: &Path, values: &[f32]) -> Result<()> {
    fs::write(path, encode_f32_le(values))?;
    Ok(())
}

pub fn read_f32_blob(path: &Path, expected_len: usize) -> Result<Vec<f32>> {
    let values = decode_f32_le(&fs::read(path)?)?;
    if values.len() != expected_len {
        return Err(NnError::Checkpoint(format!(
            "{}: expected {expected_len} values, found {}",
            path.display(),
            values.len()
        )));
    }
    Ok(values)
}

pub fn save_network(net: &Mlp, step_count: u64, manifest_path: &Path, blob_path: &Path) -> Result<()> {
    let manifest = NetworkManifest::describe(net, step_count);
    fs::write(manifest_path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    write_f32_blob(blob_path, net.params())
}

pub fn load_network(manifest_path: &Path, blob_path: &Path) -> Result<(Mlp, NetworkManifest)> {
    let manifest: NetworkManifest = serde_json::from_slice(&fs::read(manifest_path)?)?;
    network_from_manifest(&manifest, blob_path).map(|net| (net, manifest))
}

pub fn network_from_manifest(manifest: &NetworkManifest, blob_path: &Path) -> Result<Mlp> {
    if manifest.format_version != FORMAT_VERSION {
        return Err(NnError::Checkpoint(format!(
            "format_version: expected {FORMAT_VERSION}, found {}",
            manifest.format_version
        )));
    }
    let expected = param_count(&manifest.layer_sizes);
    if manifest.param_count != expected {
        return Err(NnError::Checkpoint(format!(
            "param_count: layer sizes imply {expected}, manifest says {}",
            manifest.param_count
        )));
    }
    let params = read_f32_blob(blob_path, expected)?;
    Mlp::from_params(&manifest.layer_sizes, manifest.output_activation, manifest.seed, params)
}
