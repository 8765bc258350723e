//! Planar RGB images and PNG I/O.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use crate::diffnet::Tensor;
use crate::error::{Error, Result};

/// RGB image with values in `[0, 1]`, stored channel-major (3 planes of `width × height`).
#[derive(Clone, Debug, PartialEq)]
pub struct SelfImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl SelfImage {
    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        SelfImage {
            width,
            height,
            data: vec![value; 3 * width * height],
        }
    }

    /// Builds from planar data; values are clamped to `[0, 1]`.
    pub fn from_planes(width: usize, height: usize, mut data: Vec<f32>) -> Result<Self> {
        if data.len() != 3 * width * height {
            return Err(Error::Dimension(format!(
                "{}x{} RGB image needs {} values, got {}",
                width,
                height,
                3 * width * height,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Range("image contains non-finite values".into()));
        }
        for v in &mut data {
            *v = v.clamp(0.0, 1.0);
        }
        Ok(SelfImage { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn planes(&self) -> &[f32] {
        &self.data
    }

    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, x: usize, y: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    /// Rounds every value to the nearest 8-bit level, as a camera or PNG would.
    pub fn quantized(&self) -> Self {
        SelfImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| to_u8(v) as f32 / 255.0).collect(),
        }
    }

    /// Interleaved 8-bit RGB bytes.
    pub fn to_rgb8(&self) -> Vec<u8> {
        let n = self.width * self.height;
        let mut out = Vec::with_capacity(3 * n);
        for p in 0..n {
            for c in 0..3 {
                out.push(to_u8(self.data[c * n + p]));
            }
        }
        out
    }

    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        let n = width * height;
        if bytes.len() != 3 * n {
            return Err(Error::Dimension(format!(
                "{width}x{height} RGB8 needs {} bytes, got {}",
                3 * n,
                bytes.len()
            )));
        }
        let mut data = vec![0.0; 3 * n];
        for p in 0..n {
            for c in 0..3 {
                data[c * n + p] = bytes[3 * p + c] as f32 / 255.0;
            }
        }
        Ok(SelfImage { width, height, data })
    }

    /// Single-item tensor `[1, 3, height, width]`.
    pub fn to_tensor(&self) -> Tensor<f32> {
        Tensor::from_vec([1, 3, self.height, self.width], self.data.clone()).expect("sizes agree")
    }

    /// Reads item `i` of a `[n, 3, h, w]` tensor.
    pub fn from_tensor_item(t: &Tensor<f32>, i: usize) -> Result<Self> {
        let [_, c, h, w] = t.shape();
        if c != 3 {
            return Err(Error::Dimension(format!("expected 3 channels, got {c}")));
        }
        Self::from_planes(w, h, t.item(i).to_vec())
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        write_png(path, self.width, self.height, &self.to_rgb8())
    }

    pub fn load_png(path: &Path) -> Result<Self> {
        let (w, h, bytes) = read_png(path)?;
        Self::from_rgb8(w, h, &bytes)
    }
}

fn to_u8(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes 8-bit RGB pixels.
pub fn write_png(path: &Path, width: usize, height: usize, rgb: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().map_err(|e| Error::format("png", e))?;
    writer.write_image_data(rgb).map_err(|e| Error::format("png", e))?;
    writer.finish().map_err(|e| Error::format("png", e))?;
    Ok(())
}

/// Reads an 8-bit RGB PNG.
pub fn read_png(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let decoder = png::Decoder::new(BufReader::new(file));
    let mut reader = decoder.read_info().map_err(|e| Error::format(path.display().to_string(), e))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format(path.display().to_string(), "image too large"))?;
    let mut buf = vec![0; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::format(path.display().to_string(), e))?;
    if info.color_type != png::ColorType::Rgb || info.bit_depth != png::BitDepth::Eight {
        return Err(Error::format(path.display().to_string(), "expected 8-bit RGB"));
    }
    buf.truncate(info.buffer_size());
    Ok((info.width as usize, info.height as usize, buf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_roundtrip_of_quantized_image_is_exact() {
        let data: Vec<f32> = (0..3 * 6 * 4).map(|i| (i as f32 * 0.137).sin().abs()).collect();
        let img = SelfImage::from_planes(6, 4, data).unwrap().quantized();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.png");
        img.save_png(&p).unwrap();
        assert_eq!(SelfImage::load_png(&p).unwrap(), img);
    }

    #[test]
    fn values_are_clamped() {
        let img = SelfImage::from_planes(1, 1, vec![-0.5, 0.5, 1.5]).unwrap();
        assert_eq!(img.planes(), &[0.0, 0.5, 1.0]);
    }
}
