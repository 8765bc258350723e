//! Layer graphs of the two models.

use serde::{Deserialize, Serialize};

use crate::diffnet::{GraphBuilder, LayerGraph};
use crate::error::Result;

/// Encoder-decoder widths of the generative model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerativeArch {
    /// Stride-2 encoder stages, shallow to deep.
    pub encoder: [usize; 3],
    /// Decoder stages, deep to shallow; each upsamples, concatenates the
    /// matching skip and refines with a 3×3 convolution.
    pub decoder: [usize; 3],
}

impl Default for GenerativeArch {
    fn default() -> Self {
        GenerativeArch {
            encoder: [16, 32, 64],
            decoder: [16, 8, 8],
        }
    }
}

/// Convolution widths (one per stride-2/stride-1 pair) and hidden units of
/// the command classifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InverseArch {
    pub channels: [usize; 3],
    pub hidden: usize,
}

impl Default for InverseArch {
    fn default() -> Self {
        InverseArch {
            channels: [8, 16, 32],
            hidden: 64,
        }
    }
}

/// Input: mask (2) + static image (3). Output: RGB through a sigmoid.
pub fn generative_graph(arch: &GenerativeArch, width: usize, height: usize, seed: u64) -> Result<LayerGraph<f32>> {
    generative_builder(arch, width, height).build(seed)
}

pub(crate) fn generative_builder(arch: &GenerativeArch, width: usize, height: usize) -> GraphBuilder {
    let mut b = GraphBuilder::new([5, height, width]);
    let mut skips = vec![b.input()];
    let mut x = b.input();
    for &c in &arch.encoder {
        x = b.conv(x, c, 3, 2);
        x = b.relu(x);
        skips.push(x);
    }
    skips.pop();
    for &c in &arch.decoder {
        let skip = skips.pop().expect("one skip per stage");
        x = b.upsample(x);
        x = b.concat(x, skip);
        x = b.conv(x, c, 3, 1);
        x = b.relu(x);
    }
    x = b.conv(x, 3, 1, 1);
    b.sigmoid(x);
    b
}

/// Six 3×3 convolutions (stride 2 on every other one), then two dense layers
/// to `5 · motors` logits.
pub fn inverse_graph(
    arch: &InverseArch,
    in_channels: usize,
    width: usize,
    height: usize,
    motors: usize,
    seed: u64,
) -> Result<LayerGraph<f32>> {
    inverse_builder(arch, in_channels, width, height, motors).build(seed)
}

pub(crate) fn inverse_builder(
    arch: &InverseArch,
    in_channels: usize,
    width: usize,
    height: usize,
    motors: usize,
) -> GraphBuilder {
    let mut b = GraphBuilder::new([in_channels, height, width]);
    let mut x = b.input();
    for &c in &arch.channels {
        for stride in [2, 1] {
            x = b.conv(x, c, 3, stride);
            x = b.relu(x);
        }
    }
    x = b.dense(x, arch.hidden);
    x = b.relu(x);
    b.dense(x, crate::simface::LEVELS * motors);
    b
}
