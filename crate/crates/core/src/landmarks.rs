//! Landmark sets, range normalisation between faces, mask encoding and the
//! two distances used throughout evaluation.

use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::error::{Error, Result};
use crate::image::SelfImage;

pub const LANDMARKS: usize = 53;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub x: f64,
    pub y: f64,
    /// 0 means not detected.
    pub confidence: f64,
}

/// Exactly 53 landmarks in pixel coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandmarkSet(Vec<Landmark>);

impl LandmarkSet {
    pub fn new(points: Vec<Landmark>) -> Result<Self> {
        if points.len() != LANDMARKS {
            return Err(Error::Dimension(format!(
                "expected {LANDMARKS} landmarks, got {}",
                points.len()
            )));
        }
        for (k, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::Range(format!("landmark {k} has a non-finite position")));
            }
            if !(0.0..=1.0).contains(&p.confidence) {
                return Err(Error::Range(format!(
                    "landmark {k} confidence {} outside [0, 1]",
                    p.confidence
                )));
            }
        }
        Ok(LandmarkSet(points))
    }

    /// Fully confident landmarks at the given positions.
    ///
    /// # Panics
    /// If `positions` does not hold exactly 53 points.
    pub fn from_positions(positions: &[[f64; 2]]) -> Self {
        assert_eq!(positions.len(), LANDMARKS, "landmark count");
        LandmarkSet(
            positions
                .iter()
                .map(|p| Landmark {
                    x: p[0],
                    y: p[1],
                    confidence: 1.0,
                })
                .collect(),
        )
    }

    pub fn points(&self) -> &[Landmark] {
        &self.0
    }

    pub fn get(&self, k: usize) -> Landmark {
        self.0[k]
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.0.iter().map(|p| [p.x, p.y]).collect()
    }

    /// `index,x,y,confidence` with a header row.
    pub fn to_csv(&self) -> String {
        csvio::to_string(self.0.iter().enumerate().map(|(index, p)| LandmarkRow {
            index,
            x: p.x,
            y: p.y,
            confidence: p.confidence,
        }))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows: Vec<LandmarkRow> = csvio::from_str(text, &["index", "x", "y", "confidence"], "landmark csv")?;
        check_indices(rows.iter().map(|r| r.index), "landmark csv")?;
        Self::new(
            rows.into_iter()
                .map(|r| Landmark {
                    x: r.x,
                    y: r.y,
                    confidence: r.confidence,
                })
                .collect(),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct LandmarkRow {
    index: usize,
    x: f64,
    y: f64,
    confidence: f64,
}

#[derive(Serialize, Deserialize)]
struct RangeRow {
    index: usize,
    hmin_x: f64,
    hmin_y: f64,
    hmax_x: f64,
    hmax_y: f64,
}

fn check_indices(indices: impl Iterator<Item = usize>, what: &str) -> Result<()> {
    for (i, idx) in indices.enumerate() {
        if i != idx {
            return Err(Error::format(what, format!("row {i} has index {idx}")));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeBox {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

/// Per-landmark motion ranges of one face.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandmarkRanges(Vec<RangeBox>);

impl LandmarkRanges {
    pub fn new(boxes: Vec<RangeBox>) -> Result<Self> {
        if boxes.len() != LANDMARKS {
            return Err(Error::Dimension(format!(
                "expected {LANDMARKS} ranges, got {}",
                boxes.len()
            )));
        }
        for (k, b) in boxes.iter().enumerate() {
            for a in 0..2 {
                if !(b.min[a].is_finite() && b.max[a].is_finite()) || b.min[a] > b.max[a] {
                    return Err(Error::Range(format!("landmark {k} has an invalid range")));
                }
            }
        }
        Ok(LandmarkRanges(boxes))
    }

    pub fn boxes(&self) -> &[RangeBox] {
        &self.0
    }

    /// `(landmark, axis)` pairs whose range is a single point.
    pub fn degenerate(&self) -> Vec<(usize, char)> {
        let mut out = Vec::new();
        for (k, b) in self.0.iter().enumerate() {
            for (a, name) in ['x', 'y'].into_iter().enumerate() {
                if b.max[a] <= b.min[a] {
                    out.push((k, name));
                }
            }
        }
        out
    }

    /// `index,hmin_x,hmin_y,hmax_x,hmax_y` with a header row.
    pub fn to_csv(&self) -> String {
        csvio::to_string(self.0.iter().enumerate().map(|(index, b)| RangeRow {
            index,
            hmin_x: b.min[0],
            hmin_y: b.min[1],
            hmax_x: b.max[0],
            hmax_y: b.max[1],
        }))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let rows: Vec<RangeRow> =
            csvio::from_str(text, &["index", "hmin_x", "hmin_y", "hmax_x", "hmax_y"], "range csv")?;
        check_indices(rows.iter().map(|r| r.index), "range csv")?;
        Self::new(
            rows.into_iter()
                .map(|r| RangeBox {
                    min: [r.hmin_x, r.hmin_y],
                    max: [r.hmax_x, r.hmax_y],
                })
                .collect(),
        )
    }
}

/// Per-landmark, per-axis extremes over a sequence of at least two frames.
pub fn compute_ranges(frames: &[LandmarkSet]) -> Result<LandmarkRanges> {
    if frames.len() < 2 {
        return Err(Error::Argument(format!(
            "ranges need at least 2 frames, got {}",
            frames.len()
        )));
    }
    let mut boxes = vec![
        RangeBox {
            min: [f64::INFINITY; 2],
            max: [f64::NEG_INFINITY; 2],
        };
        LANDMARKS
    ];
    for f in frames {
        for (b, p) in boxes.iter_mut().zip(f.points()) {
            for (a, v) in [p.x, p.y].into_iter().enumerate() {
                b.min[a] = b.min[a].min(v);
                b.max[a] = b.max[a].max(v);
            }
        }
    }
    LandmarkRanges::new(boxes)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Normalized {
    pub landmarks: LandmarkSet,
    /// Coordinates that fell outside the source range and were clamped.
    pub clamped: usize,
}

/// Maps landmarks from the source face's ranges onto the target face's:
/// `(l - h_min)(r_max - r_min)/(h_max - h_min) + r_min`, clamped to
/// `[r_min, r_max]`. Confidences pass through unchanged.
pub fn normalize(
    landmarks: &LandmarkSet,
    source: &LandmarkRanges,
    target: &LandmarkRanges,
) -> Result<Normalized> {
    let mut clamped = 0;
    let mut out = Vec::with_capacity(LANDMARKS);
    for (k, ((p, h), r)) in landmarks
        .points()
        .iter()
        .zip(source.boxes())
        .zip(target.boxes())
        .enumerate()
    {
        let mut xy = [p.x, p.y];
        for (a, name) in ['x', 'y'].into_iter().enumerate() {
            let span = h.max[a] - h.min[a];
            if span <= 0.0 {
                return Err(Error::DegenerateRange { landmark: k, axis: name });
            }
            let v = (xy[a] - h.min[a]) * (r.max[a] - r.min[a]) / span + r.min[a];
            let c = v.clamp(r.min[a], r.max[a]);
            if c != v {
                clamped += 1;
            }
            xy[a] = c;
        }
        out.push(Landmark {
            x: xy[0],
            y: xy[1],
            confidence: p.confidence,
        });
    }
    Ok(Normalized {
        landmarks: LandmarkSet::new(out)?,
        clamped,
    })
}

/// Two-channel image: occupancy (1 where a landmark falls) and the landmark's
/// confidence. Planar layout, occupancy first.
#[derive(Clone, Debug, PartialEq)]
pub struct LandmarkMask {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl LandmarkMask {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn occupancy(&self) -> &[f32] {
        &self.data[..self.width * self.height]
    }

    pub fn confidence(&self) -> &[f32] {
        &self.data[self.width * self.height..]
    }

    pub fn planes(&self) -> &[f32] {
        &self.data
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaskEncoding {
    pub mask: LandmarkMask,
    /// Landmarks whose rounded position lay outside the frame.
    pub clamped: usize,
}

/// Rasterises detected landmarks at `round_half_up(position)`, clamped into
/// the frame. Landmarks with confidence 0 are left out; when two share a
/// pixel the higher confidence wins.
pub fn encode_mask(landmarks: &LandmarkSet, width: usize, height: usize) -> Result<MaskEncoding> {
    if width == 0 || height == 0 {
        return Err(Error::Argument("mask needs a non-empty frame".into()));
    }
    let n = width * height;
    let mut data = vec![0.0f32; 2 * n];
    let mut clamped = 0;
    for p in landmarks.points().iter().filter(|p| p.confidence > 0.0) {
        let (x, cx) = round_clamp(p.x, width);
        let (y, cy) = round_clamp(p.y, height);
        if cx || cy {
            clamped += 1;
        }
        let i = y * width + x;
        data[i] = 1.0;
        data[n + i] = data[n + i].max(p.confidence as f32);
    }
    Ok(MaskEncoding {
        mask: LandmarkMask { width, height, data },
        clamped,
    })
}

fn round_clamp(v: f64, n: usize) -> (usize, bool) {
    let r = (v + 0.5).floor();
    let c = r.clamp(0.0, (n - 1) as f64);
    (c as usize, c != r)
}

/// Mean Euclidean distance over the 53 landmarks.
pub fn landmark_distance(a: &LandmarkSet, b: &LandmarkSet) -> f64 {
    a.points()
        .iter()
        .zip(b.points())
        .map(|(p, q)| (p.x - q.x).hypot(p.y - q.y))
        .sum::<f64>()
        / LANDMARKS as f64
}

/// Mean squared error over all `width × height × 3` values.
pub fn image_distance(a: &SelfImage, b: &SelfImage) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::Dimension(format!(
            "images are {:?} and {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let sum: f64 = a
        .planes()
        .iter()
        .zip(b.planes())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / a.planes().len() as f64)
}
