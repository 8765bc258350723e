//! Browser demo of the simulated face. Three operations are exported: render
//! a motor command, detect the rendered face's landmarks, and encode them as
//! the two-channel mask the generative model reads.

use mimicface::baselines::random_command;
use mimicface::landmarks::{encode_mask, landmark_distance, LandmarkSet};
use mimicface::simface::layout::MOTOR_NAMES;
use mimicface::simface::{detect_landmarks, render, FaceRig, MotorCommand, LEVELS};
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct Demo {
    rig: FaceRig,
}

#[wasm_bindgen]
pub struct Detection {
    positions: Vec<f64>,
    truth: Vec<f64>,
    error: f64,
}

#[wasm_bindgen]
impl Detection {
    /// `x, y` per landmark.
    pub fn positions(&self) -> Vec<f64> {
        self.positions.clone()
    }

    /// Landmark positions the rig places for the command.
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }

    /// Mean pixel distance between detected and true landmarks.
    pub fn error(&self) -> f64 {
        self.error
    }
}

fn flat(set: &LandmarkSet) -> Vec<f64> {
    set.points().iter().flat_map(|p| [p.x, p.y]).collect()
}

fn command(rig: &FaceRig, levels: &[u8]) -> Result<MotorCommand, String> {
    if levels.len() != rig.motors() {
        return Err(format!("expected {} motor levels, got {}", rig.motors(), levels.len()));
    }
    MotorCommand::from_levels(levels).map_err(|e| e.to_string())
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    #[allow(clippy::new_without_default)]
    pub fn new() -> Demo {
        Demo {
            rig: FaceRig::standard(),
        }
    }

    pub fn width(&self) -> usize {
        self.rig.width()
    }

    pub fn height(&self) -> usize {
        self.rig.height()
    }

    pub fn motors(&self) -> usize {
        self.rig.motors()
    }

    pub fn levels(&self) -> usize {
        LEVELS
    }

    pub fn motor_name(&self, motor: usize) -> String {
        MOTOR_NAMES.get(motor).copied().unwrap_or("").to_string()
    }

    /// RGBA pixels of the face for grid levels `0..5`, one per motor.
    pub fn render(&self, levels: &[u8]) -> Result<Vec<u8>, String> {
        let img = render(&self.rig, &command(&self.rig, levels)?).map_err(|e| e.to_string())?;
        Ok(rgba(&img.to_rgb8()))
    }

    pub fn detect(&self, levels: &[u8]) -> Result<Detection, String> {
        let cmd = command(&self.rig, levels)?;
        let img = render(&self.rig, &cmd).map_err(|e| e.to_string())?;
        let detected = detect_landmarks(&self.rig, &img).map_err(|e| e.to_string())?;
        let truth = self.rig.forward_landmarks(&cmd).map_err(|e| e.to_string())?;
        Ok(Detection {
            error: landmark_distance(&detected, &truth),
            positions: flat(&detected),
            truth: flat(&truth),
        })
    }

    /// RGBA view of the landmark mask of the detected landmarks: occupancy in
    /// red, confidence in green.
    pub fn mask(&self, levels: &[u8]) -> Result<Vec<u8>, String> {
        let cmd = command(&self.rig, levels)?;
        let img = render(&self.rig, &cmd).map_err(|e| e.to_string())?;
        let detected = detect_landmarks(&self.rig, &img).map_err(|e| e.to_string())?;
        let enc = encode_mask(&detected, self.rig.width(), self.rig.height()).map_err(|e| e.to_string())?;
        let m = &enc.mask;
        let to_u8 = |v: f32| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        Ok(m.occupancy()
            .iter()
            .zip(m.confidence())
            .flat_map(|(&o, &c)| [to_u8(o), to_u8(c), 0, 255])
            .collect())
    }

    /// Uniform random levels for the demo's shuffle button.
    pub fn random_levels(&self, seed: u32) -> Vec<u8> {
        random_command(u64::from(seed), self.rig.motors()).levels()
    }
}

fn rgba(rgb: &[u8]) -> Vec<u8> {
    rgb.chunks_exact(3).flat_map(|p| [p[0], p[1], p[2], 255]).collect()
}
