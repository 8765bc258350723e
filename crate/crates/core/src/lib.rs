mod csvio;
pub mod babble;
pub mod baselines;
pub mod diffnet;
mod error;
pub mod harness;
pub mod image;
pub mod landmarks;
pub mod mimicry;
pub mod simface;

pub use error::{Error, Result};
