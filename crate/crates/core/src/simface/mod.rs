//! Simulated robot face: a linear landmark rig, a deterministic renderer and
//! a landmark detector that inverts it.

mod detect;
pub mod layout;
mod render;
mod rig;

pub use detect::{detect_landmarks, DETECT_THRESHOLD};
pub use render::{render, static_self_image, BLOB_AMPLITUDE};
pub use rig::{make_subject, FaceRig, MotorCommand, RigOrigin, RigSpec, LEVELS, RIG_FORMAT};
