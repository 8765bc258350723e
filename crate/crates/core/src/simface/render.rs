use std::sync::Arc;

use super::rig::{FaceRig, MotorCommand};
use crate::error::Result;
use crate::image::SelfImage;

/// Peak red-channel contribution of one landmark blob.
pub const BLOB_AMPLITUDE: f64 = 0.75;
const EDGE_DARKEN: [f64; 2] = [0.3, 0.25];

/// The fixed skull texture, planar RGB in `f64`.
pub(crate) fn background(rig: &FaceRig) -> Arc<[Vec<f64>; 3]> {
    rig.cache
        .background
        .get_or_init(|| Arc::new(skull(rig.width(), rig.height())))
        .clone()
}

fn skull(w: usize, h: usize) -> [Vec<f64>; 3] {
    let mut planes = [vec![0.0; w * h], vec![0.0; w * h], vec![0.0; w * h]];
    let (hw, hh) = (w as f64 / 2.0, h as f64 / 2.0);
    for y in 0..h {
        for x in 0..w {
            let (xf, yf) = (x as f64, y as f64);
            let u = (xf - (w - 1) as f64 / 2.0) / hw;
            let v = (yf - (h - 1) as f64 / 2.0) / hh;
            let e = u * u / 0.81 + v * v;
            let s = 1.0 / (1.0 + (-(1.0 - e) * 10.0).exp());
            let i = y * w + x;
            planes[0][i] = 0.05 + 0.07 * s + 0.015 * (0.9 * xf + 0.4 * yf).sin();
            planes[1][i] = 0.30 + 0.40 * s + 0.03 * (0.31 * xf + 0.17 * yf).sin() * (0.23 * yf).cos();
            planes[2][i] = 0.35 + 0.25 * s + 0.03 * (0.23 * xf - 0.29 * yf).cos();
        }
    }
    planes
}

/// Distance from `p` to segment `ab`.
fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

/// Pixel-index range covering `[lo, hi]`, clipped to `0..n`.
pub(crate) fn span(lo: f64, hi: f64, n: usize) -> std::ops::Range<usize> {
    let a = lo.ceil().max(0.0) as usize;
    let b = (hi.floor() + 1.0).clamp(0.0, n as f64) as usize;
    a.min(b)..b
}

/// Sum of unit-height Gaussians centred on `points`.
pub(crate) fn blob_field(points: &[[f64; 2]], sigma: f64, w: usize, h: usize) -> Vec<f64> {
    let mut field = vec![0.0; w * h];
    let r = 4.0 * sigma;
    let k = -0.5 / (sigma * sigma);
    for p in points {
        for y in span(p[1] - r, p[1] + r, h) {
            let dy = y as f64 - p[1];
            for x in span(p[0] - r, p[0] + r, w) {
                let dx = x as f64 - p[0];
                field[y * w + x] += (k * (dx * dx + dy * dy)).exp();
            }
        }
    }
    field
}

/// Renders the face for `cmd`. Layers are composited in a fixed order
/// (skull, edges, blobs) and the result is clamped to `[0, 1]`.
pub fn render(rig: &FaceRig, cmd: &MotorCommand) -> Result<SelfImage> {
    let pts = rig.positions(cmd)?;
    Ok(render_points(rig, &pts))
}

pub(crate) fn render_points(rig: &FaceRig, pts: &[[f64; 2]]) -> SelfImage {
    let (w, h) = rig.dims();
    let bg = background(rig);

    let mut cover = vec![0.0f64; w * h];
    for line in &rig.spec().edges {
        for seg in line.windows(2) {
            let (a, b) = (pts[seg[0]], pts[seg[1]]);
            let xs = span(a[0].min(b[0]) - 1.5, a[0].max(b[0]) + 1.5, w);
            for y in span(a[1].min(b[1]) - 1.5, a[1].max(b[1]) + 1.5, h) {
                for x in xs.clone() {
                    let d = segment_distance([x as f64, y as f64], a, b);
                    let c = (1.2 - d).clamp(0.0, 1.0);
                    let slot = &mut cover[y * w + x];
                    *slot = slot.max(c);
                }
            }
        }
    }
    let blobs = blob_field(pts, rig.blob_sigma(), w, h);

    let mut data = vec![0.0f32; 3 * w * h];
    let (r, gb) = data.split_at_mut(w * h);
    let (g, b) = gb.split_at_mut(w * h);
    for i in 0..w * h {
        r[i] = (bg[0][i] + BLOB_AMPLITUDE * blobs[i]).clamp(0.0, 1.0) as f32;
        g[i] = (bg[1][i] - EDGE_DARKEN[0] * cover[i]).clamp(0.0, 1.0) as f32;
        b[i] = (bg[2][i] - EDGE_DARKEN[1] * cover[i]).clamp(0.0, 1.0) as f32;
    }
    SelfImage::from_planes(w, h, data).expect("sizes agree")
}

/// `render(rig, 0)`, computed once per rig.
pub fn static_self_image(rig: &FaceRig) -> Arc<SelfImage> {
    rig.cache
        .neutral_image
        .get_or_init(|| Arc::new(render_points(rig, rig.neutral())))
        .clone()
}
