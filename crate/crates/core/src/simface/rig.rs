use std::path::Path;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::layout;
use crate::error::{Error, Result};
use crate::image::SelfImage;
use crate::landmarks::{Landmark, LandmarkSet};

pub const RIG_FORMAT: &str = "mimicface-rig/1";
/// Discrete command levels `{0, 0.25, 0.5, 0.75, 1}`.
pub const LEVELS: usize = 5;

/// Where a rig came from. Subjects keep their seed so that they can be regenerated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RigOrigin {
    Master,
    Subject {
        master_rig_id: String,
        seed: u64,
        distortion: f64,
    },
    Custom,
}

/// Plain geometry of a rig; everything that determines its rendering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigSpec {
    pub format: String,
    pub width: usize,
    pub height: usize,
    pub blob_sigma: f64,
    pub neutral: Vec<[f64; 2]>,
    /// `[motor][landmark]`, pixels per unit command.
    pub displacements: Vec<Vec<[f64; 2]>>,
    pub edges: Vec<Vec<usize>>,
    pub motor_names: Vec<String>,
    pub origin: RigOrigin,
}

#[derive(Serialize, Deserialize)]
struct RigFile {
    rig_id: String,
    #[serde(flatten)]
    spec: RigSpec,
}

#[derive(Default)]
pub(crate) struct RigCache {
    pub(crate) background: OnceLock<Arc<[Vec<f64>; 3]>>,
    pub(crate) neutral_image: OnceLock<Arc<SelfImage>>,
}

/// A validated linear face rig.
pub struct FaceRig {
    spec: RigSpec,
    rig_id: String,
    max_disp: Vec<f64>,
    pub(crate) cache: RigCache,
}

impl Clone for FaceRig {
    fn clone(&self) -> Self {
        FaceRig {
            spec: self.spec.clone(),
            rig_id: self.rig_id.clone(),
            max_disp: self.max_disp.clone(),
            cache: RigCache::default(),
        }
    }
}

impl PartialEq for FaceRig {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl std::fmt::Debug for FaceRig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FaceRig")
            .field("rig_id", &self.rig_id)
            .field("width", &self.spec.width)
            .field("height", &self.spec.height)
            .field("motors", &self.motors())
            .finish()
    }
}

/// Motor command with every value in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotorCommand(Vec<f64>);

impl MotorCommand {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Range(format!("motor {i} command {v} outside [0, 1]")));
        }
        Ok(MotorCommand(values))
    }

    /// Command from grid levels in `0..5`.
    pub fn from_levels(levels: &[u8]) -> Result<Self> {
        if let Some(l) = levels.iter().find(|&&l| l as usize >= LEVELS) {
            return Err(Error::Range(format!("level {l} outside 0..{LEVELS}")));
        }
        Ok(MotorCommand(levels.iter().map(|&l| l as f64 / (LEVELS - 1) as f64).collect()))
    }

    /// Nearest grid level of every motor.
    pub fn levels(&self) -> Vec<u8> {
        self.0
            .iter()
            .map(|c| (c * (LEVELS - 1) as f64).round() as u8)
            .collect()
    }

    pub fn zeros(n: usize) -> Self {
        MotorCommand(vec![0.0; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FaceRig {
    /// The built-in face at the default 96×64 resolution with ten motors.
    pub fn standard() -> Self {
        Self::standard_with_motors(layout::DEFAULT_MOTORS).expect("built-in rig is valid")
    }

    /// The built-in face using the first `n` motor fields (1..=10).
    pub fn standard_with_motors(n: usize) -> Result<Self> {
        if n == 0 || n > layout::DEFAULT_MOTORS {
            return Err(Error::Argument(format!(
                "built-in rig supports 1..={} motors, got {n}",
                layout::DEFAULT_MOTORS
            )));
        }
        let mut displacements = layout::displacements();
        displacements.truncate(n);
        Self::new(RigSpec {
            format: RIG_FORMAT.into(),
            width: layout::DEFAULT_WIDTH,
            height: layout::DEFAULT_HEIGHT,
            blob_sigma: layout::DEFAULT_SIGMA,
            neutral: layout::neutral(),
            displacements,
            edges: layout::edges(),
            motor_names: layout::MOTOR_NAMES[..n].iter().map(|s| s.to_string()).collect(),
            origin: RigOrigin::Master,
        })
    }

    pub fn new(spec: RigSpec) -> Result<Self> {
        validate(&spec)?;
        let max_disp = max_displacements(&spec);
        for (k, (p, m)) in spec.neutral.iter().zip(&max_disp).enumerate() {
            let (w, h) = ((spec.width - 1) as f64, (spec.height - 1) as f64);
            if p[0] - m < 0.0 || p[0] + m > w || p[1] - m < 0.0 || p[1] + m > h {
                return Err(Error::Range(format!(
                    "landmark {k} can leave the {}x{} frame",
                    spec.width, spec.height
                )));
            }
        }
        let rig_id = hex::encode(Sha256::digest(canonical_bytes(&spec)?));
        Ok(FaceRig {
            spec,
            rig_id,
            max_disp,
            cache: RigCache::default(),
        })
    }

    pub fn spec(&self) -> &RigSpec {
        &self.spec
    }

    pub fn rig_id(&self) -> &str {
        &self.rig_id
    }

    pub fn motors(&self) -> usize {
        self.spec.displacements.len()
    }

    pub fn width(&self) -> usize {
        self.spec.width
    }

    pub fn height(&self) -> usize {
        self.spec.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.spec.width, self.spec.height)
    }

    pub fn blob_sigma(&self) -> f64 {
        self.spec.blob_sigma
    }

    pub fn neutral(&self) -> &[[f64; 2]] {
        &self.spec.neutral
    }

    /// Upper bound on how far landmark `k` can move: `Σ_n ‖d_nk‖`.
    pub fn max_displacement(&self, k: usize) -> f64 {
        self.max_disp[k]
    }

    /// Landmark positions for `cmd`, all with confidence 1.
    pub fn forward_landmarks(&self, cmd: &MotorCommand) -> Result<LandmarkSet> {
        Ok(LandmarkSet::from_positions(&self.positions(cmd)?))
    }

    pub(crate) fn positions(&self, cmd: &MotorCommand) -> Result<Vec<[f64; 2]>> {
        if cmd.len() != self.motors() {
            return Err(Error::Dimension(format!(
                "rig has {} motors, command has {}",
                self.motors(),
                cmd.len()
            )));
        }
        let mut p = self.spec.neutral.clone();
        for (field, &c) in self.spec.displacements.iter().zip(cmd.values()) {
            if c == 0.0 {
                continue;
            }
            for (q, d) in p.iter_mut().zip(field) {
                q[0] += c * d[0];
                q[1] += c * d[1];
            }
        }
        Ok(p)
    }

    /// Positions for a command of the right length, without range checks.
    pub(crate) fn positions_unchecked(&self, cmd: &[f64]) -> Vec<[f64; 2]> {
        let mut p = self.spec.neutral.clone();
        for (field, &c) in self.spec.displacements.iter().zip(cmd) {
            for (q, d) in p.iter_mut().zip(field) {
                q[0] += c * d[0];
                q[1] += c * d[1];
            }
        }
        p
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RigFile {
            rig_id: self.rig_id.clone(),
            spec: self.spec.clone(),
        })
        .expect("rig serialises")
    }

    /// Parses a rig document; a stored `rig_id` that disagrees with the content is rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: RigFile = serde_json::from_str(text).map_err(|e| Error::format("rig", e))?;
        if file.spec.format != RIG_FORMAT {
            return Err(Error::format("rig", format!("unknown format {}", file.spec.format)));
        }
        let rig = Self::new(file.spec)?;
        if rig.rig_id != file.rig_id {
            return Err(Error::RigMismatch {
                expected: file.rig_id,
                found: rig.rig_id,
            });
        }
        Ok(rig)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Landmark with confidence 0 at its neutral position.
    pub(crate) fn undetected(&self, k: usize) -> Landmark {
        let [x, y] = self.spec.neutral[k];
        Landmark { x, y, confidence: 0.0 }
    }
}

fn canonical_bytes(spec: &RigSpec) -> Result<Vec<u8>> {
    serde_json::to_vec(spec).map_err(|e| Error::format("rig", e))
}

fn max_displacements(spec: &RigSpec) -> Vec<f64> {
    (0..spec.neutral.len())
        .map(|k| {
            spec.displacements
                .iter()
                .map(|f| f[k][0].hypot(f[k][1]))
                .sum()
        })
        .collect()
}

fn validate(spec: &RigSpec) -> Result<()> {
    if spec.format != RIG_FORMAT {
        return Err(Error::format("rig", format!("unknown format {}", spec.format)));
    }
    if spec.width < 8 || spec.height < 8 {
        return Err(Error::Argument(format!(
            "image {}x{} too small",
            spec.width, spec.height
        )));
    }
    if !(spec.blob_sigma.is_finite() && spec.blob_sigma > 0.0) {
        return Err(Error::Range(format!("blob sigma {}", spec.blob_sigma)));
    }
    if spec.neutral.len() != layout::LANDMARKS {
        return Err(Error::Dimension(format!(
            "rig needs {} landmarks, got {}",
            layout::LANDMARKS,
            spec.neutral.len()
        )));
    }
    if spec.displacements.is_empty() {
        return Err(Error::Argument("rig needs at least one motor".into()));
    }
    if spec.motor_names.len() != spec.displacements.len() {
        return Err(Error::Dimension("one name per motor required".into()));
    }
    for (n, field) in spec.displacements.iter().enumerate() {
        if field.len() != layout::LANDMARKS {
            return Err(Error::Dimension(format!(
                "motor {n} moves {} landmarks, expected {}",
                field.len(),
                layout::LANDMARKS
            )));
        }
    }
    let finite = spec
        .neutral
        .iter()
        .chain(spec.displacements.iter().flatten())
        .all(|p| p[0].is_finite() && p[1].is_finite());
    if !finite {
        return Err(Error::Range("rig geometry contains non-finite values".into()));
    }
    for line in &spec.edges {
        if line.len() < 2 || line.iter().any(|&k| k >= layout::LANDMARKS) {
            return Err(Error::Argument(format!("bad polyline {line:?}")));
        }
    }
    Ok(())
}

/// A pseudo-human face: the master geometry under a random affine map with
/// each motor field rescaled independently. `distortion` in `[0, 1]` scales
/// every perturbation; 0 reproduces the master geometry exactly.
pub fn make_subject(master: &FaceRig, seed: u64, distortion: f64) -> Result<FaceRig> {
    if !(0.0..=1.0).contains(&distortion) {
        return Err(Error::Range(format!("distortion {distortion} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sym = |amount: f64| distortion * amount * rng.random_range(-1.0..=1.0);
    let (sx, sy, shear) = (sym(0.3), sym(0.3), sym(0.1));
    let (tx, ty) = (sym(3.0), sym(3.0));
    let gains: Vec<f64> = (0..master.motors()).map(|_| sym(0.5)).collect();

    let spec = master.spec();
    let cx = (spec.width - 1) as f64 / 2.0;
    let cy = (spec.height - 1) as f64 / 2.0;
    let mut neutral: Vec<[f64; 2]> = spec
        .neutral
        .iter()
        .map(|&[x, y]| {
            [
                x + sx * (x - cx) + shear * (y - cy) + tx,
                y + sy * (y - cy) + ty,
            ]
        })
        .collect();
    let displacements: Vec<Vec<[f64; 2]>> = spec
        .displacements
        .iter()
        .zip(&gains)
        .map(|(f, g)| f.iter().map(|d| [d[0] + g * d[0], d[1] + g * d[1]]).collect())
        .collect();

    // grow the frame if the distorted face no longer fits
    let mut probe = spec.clone();
    probe.displacements = displacements.clone();
    let reach = max_displacements(&probe);
    let (mut width, mut height) = (spec.width, spec.height);
    for axis in 0..2 {
        let lo = neutral.iter().zip(&reach).map(|(p, m)| p[axis] - m).fold(f64::INFINITY, f64::min);
        let shift = if lo < 0.0 { (-lo).ceil() } else { 0.0 };
        if shift > 0.0 {
            neutral.iter_mut().for_each(|p| p[axis] += shift);
        }
        let hi = neutral.iter().zip(&reach).map(|(p, m)| p[axis] + m).fold(0.0, f64::max);
        let dim = if axis == 0 { &mut width } else { &mut height };
        *dim = (*dim).max(hi.ceil() as usize + 1);
    }

    FaceRig::new(RigSpec {
        format: RIG_FORMAT.into(),
        width,
        height,
        blob_sigma: spec.blob_sigma,
        neutral,
        displacements,
        edges: spec.edges.clone(),
        motor_names: spec.motor_names.clone(),
        origin: RigOrigin::Subject {
            master_rig_id: master.rig_id().to_string(),
            seed,
            distortion,
        },
    })
}
