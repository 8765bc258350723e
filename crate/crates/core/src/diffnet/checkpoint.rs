//! `model.json` + `model.bin` checkpoint directories.
//!
//! The binary file holds little-endian `f32` values: every parameter tensor
//! in declaration order, then the Adam first moments, then the second moments.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::graph::{LayerGraph, Node};
use crate::error::{Error, Result};

pub const FORMAT: &str = "mimicface-diffnet/1";
pub const HEADER_FILE: &str = "model.json";
pub const WEIGHTS_FILE: &str = "model.bin";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub input_shape: [usize; 3],
    pub nodes: Vec<Node>,
    pub param_shapes: Vec<[usize; 4]>,
    pub step: u64,
    pub seed: u64,
    /// Free-form model description written by the owner of the graph.
    #[serde(default)]
    pub meta: serde_json::Value,
}

pub fn header_for(graph: &LayerGraph<f32>, meta: serde_json::Value) -> CheckpointHeader {
    CheckpointHeader {
        format: FORMAT.into(),
        input_shape: graph.input_shape(),
        nodes: graph.nodes().to_vec(),
        param_shapes: graph.params().iter().map(|p| p.shape()).collect(),
        step: graph.adam_state().step,
        seed: graph.seed(),
        meta,
    }
}

/// Serialises parameters and moments to the binary layout.
pub fn weights_bytes(graph: &LayerGraph<f32>) -> Vec<u8> {
    let adam = graph.adam_state();
    let mut out = Vec::with_capacity(graph.param_count() * 12);
    for group in [graph.params(), &adam.first[..], &adam.second[..]] {
        for t in group {
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

/// SHA-256 over the canonical header and the weights, lowercase hex.
pub fn checkpoint_hash(graph: &LayerGraph<f32>, meta: &serde_json::Value) -> String {
    let header = serde_json::to_vec(&header_for(graph, meta.clone())).expect("header serialises");
    let mut h = Sha256::new();
    h.update(&header);
    h.update(weights_bytes(graph));
    hex::encode(h.finalize())
}

pub fn save(graph: &LayerGraph<f32>, meta: serde_json::Value, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let header = header_for(graph, meta);
    let json = serde_json::to_string_pretty(&header).expect("header serialises");
    let hp = dir.join(HEADER_FILE);
    fs::write(&hp, json).map_err(|e| Error::io(&hp, e))?;
    let wp = dir.join(WEIGHTS_FILE);
    fs::write(&wp, weights_bytes(graph)).map_err(|e| Error::io(&wp, e))?;
    Ok(())
}

pub fn load(dir: &Path) -> Result<(LayerGraph<f32>, serde_json::Value)> {
    let hp = dir.join(HEADER_FILE);
    let text = fs::read_to_string(&hp).map_err(|e| Error::io(&hp, e))?;
    let header: CheckpointHeader =
        serde_json::from_str(&text).map_err(|e| Error::format(hp.display().to_string(), e))?;
    if header.format != FORMAT {
        return Err(Error::format("checkpoint", format!("unknown format {}", header.format)));
    }
    let mut graph = LayerGraph::<f32>::uninitialized(header.input_shape, header.nodes, header.seed)?;
    let shapes: Vec<_> = graph.params().iter().map(|p| p.shape()).collect();
    if shapes != header.param_shapes {
        return Err(Error::format("checkpoint", "parameter shapes disagree with layer specs"));
    }
    let wp = dir.join(WEIGHTS_FILE);
    let bytes = fs::read(&wp).map_err(|e| Error::io(&wp, e))?;
    if bytes.len() != graph.param_count() * 12 {
        return Err(Error::format(
            "checkpoint",
            format!("expected {} bytes of weights, found {}", graph.param_count() * 12, bytes.len()),
        ));
    }
    let mut values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]));
    let mut fill = |t: &mut crate::diffnet::Tensor<f32>| {
        for v in t.data_mut() {
            *v = values.next().expect("length checked");
        }
    };
    graph.params_mut().iter_mut().for_each(&mut fill);
    let adam = graph.adam_state_mut();
    adam.step = header.step;
    adam.first.iter_mut().for_each(&mut fill);
    adam.second.iter_mut().for_each(&mut fill);
    Ok((graph, header.meta))
}
