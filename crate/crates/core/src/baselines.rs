//! Comparison methods: random sampled image, untrained and briefly trained
//! inverse networks, nearest-neighbour retrieval, a direct landmark-to-motor
//! classifier and random commands.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::babble::{BabbleDataset, BabbleRecord};
use crate::error::{Error, Result};
use crate::image::SelfImage;
use crate::landmarks::{landmark_distance, LandmarkMask, LandmarkSet};
use crate::mimicry::{self, InverseConfig, InverseInput, InverseModel, Prediction};
use crate::simface::{FaceRig, MotorCommand, LEVELS};

/// Adam updates of the briefly trained inverse network.
pub const RI100_ITERATIONS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaselineKind {
    #[serde(rename = "RS")]
    Rs,
    #[serde(rename = "RI")]
    Ri,
    #[serde(rename = "RI100")]
    Ri100,
    #[serde(rename = "NN_on_generated")]
    NnOnGenerated,
    #[serde(rename = "NN_on_landmarks")]
    NnOnLandmarks,
    #[serde(rename = "LandmarkToMotor")]
    LandmarkToMotor,
    #[serde(rename = "RandomCommand")]
    RandomCommand,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 7] = [
        BaselineKind::Rs,
        BaselineKind::Ri,
        BaselineKind::Ri100,
        BaselineKind::NnOnGenerated,
        BaselineKind::NnOnLandmarks,
        BaselineKind::LandmarkToMotor,
        BaselineKind::RandomCommand,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            BaselineKind::Rs => "RS",
            BaselineKind::Ri => "RI",
            BaselineKind::Ri100 => "RI100",
            BaselineKind::NnOnGenerated => "NN_on_generated",
            BaselineKind::NnOnLandmarks => "NN_on_landmarks",
            BaselineKind::LandmarkToMotor => "LandmarkToMotor",
            BaselineKind::RandomCommand => "RandomCommand",
        }
    }
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for BaselineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaselineKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::Argument(format!("unknown baseline {s:?}")))
    }
}

/// Index into the training split drawn uniformly with the given seed.
pub fn rs_index(ds: &BabbleDataset, seed: u64) -> Result<usize> {
    let n = ds.train().len();
    if n == 0 {
        return Err(Error::Argument("random-sample baseline needs training images".into()));
    }
    Ok(ChaCha8Rng::seed_from_u64(seed).random_range(0..n))
}

/// A training image drawn uniformly with the given seed.
pub fn rs_image(ds: &BabbleDataset, seed: u64) -> Result<&SelfImage> {
    Ok(&ds.train()[rs_index(ds, seed)?].image)
}

/// Untrained inverse network.
pub fn make_ri(rig: &FaceRig, config: &InverseConfig) -> Result<InverseModel> {
    InverseModel::untrained(config, rig)
}

/// The untrained network of [`make_ri`] after exactly 100 Adam updates.
pub fn make_ri100(ds: &BabbleDataset, rig: &FaceRig, config: &InverseConfig) -> Result<InverseModel> {
    ds.check_rig(rig)?;
    make_ri(rig, config)?.train_iterations(ds, RI100_ITERATIONS)
}

/// Command of the record whose landmarks are closest to `query`; the lowest
/// step wins ties.
pub fn nn_retrieve<'a>(query: &LandmarkSet, records: &'a [BabbleRecord]) -> Result<&'a MotorCommand> {
    let mut best: Option<(f64, &BabbleRecord)> = None;
    for r in records {
        let d = landmark_distance(query, &r.landmarks);
        let better = match best {
            None => true,
            Some((bd, br)) => d < bd || (d == bd && r.step < br.step),
        };
        if better {
            best = Some((d, r));
        }
    }
    best.map(|(_, r)| &r.command)
        .ok_or_else(|| Error::Argument("nearest-neighbour retrieval needs records".into()))
}

/// Default configuration of the landmark-to-motor classifier: the inverse
/// model's architecture and schedule reading the two mask channels.
pub fn landmark_to_motor_config(seed: u64) -> InverseConfig {
    let mut config = InverseConfig {
        input: InverseInput::Mask,
        ..InverseConfig::default()
    };
    config.train.seed = seed;
    config
}

pub fn train_landmark_to_motor(ds: &BabbleDataset, rig: &FaceRig, config: &InverseConfig) -> Result<InverseModel> {
    if config.input != InverseInput::Mask {
        return Err(Error::Argument("landmark-to-motor model reads the mask input".into()));
    }
    mimicry::train_inverse(ds, rig, config)
}

pub fn infer_landmark_to_motor(model: &InverseModel, mask: &LandmarkMask) -> Result<Prediction> {
    Ok(model.infer_masks(&[mask])?.remove(0))
}

/// Uniform i.i.d. grid level per motor.
pub fn random_command(seed: u64, motors: usize) -> MotorCommand {
    random_command_with(&mut ChaCha8Rng::seed_from_u64(seed), motors)
}

pub fn random_command_with<R: Rng>(rng: &mut R, motors: usize) -> MotorCommand {
    let levels: Vec<u8> = (0..motors).map(|_| rng.random_range(0..LEVELS as u8)).collect();
    MotorCommand::from_levels(&levels).expect("levels in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::babble;

    fn small() -> (FaceRig, BabbleDataset) {
        let rig = FaceRig::standard();
        let ds = babble::collect(&rig, 40, 3, 1).unwrap();
        (rig.clone(), babble::split(&ds, 30, 5, 5).unwrap())
    }

    #[test]
    fn tags_round_trip() {
        for k in BaselineKind::ALL {
            assert_eq!(k.tag().parse::<BaselineKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.tag()));
        }
        assert!("GM".parse::<BaselineKind>().is_err());
    }

    #[test]
    fn rs_image_is_a_seeded_training_image() {
        let (_, ds) = small();
        let a = rs_image(&ds, 5).unwrap();
        assert_eq!(a, rs_image(&ds, 5).unwrap());
        assert!(ds.train().iter().any(|r| &r.image == a));
        let empty = babble::BabbleDataset {
            records: Vec::new(),
            split: Default::default(),
            ..ds.clone()
        };
        assert!(rs_image(&empty, 0).is_err());
    }

    #[test]
    fn nn_matches_exhaustive_scan_and_self_matches() {
        let (rig, ds) = small();
        for r in ds.train() {
            assert_eq!(nn_retrieve(&r.landmarks, ds.train()).unwrap(), &r.command);
        }
        // brute-force oracle on the neutral pose
        let neutral = LandmarkSet::from_positions(rig.neutral());
        let mut best = (f64::INFINITY, 0);
        for (i, r) in ds.train().iter().enumerate() {
            let d: f64 = neutral
                .points()
                .iter()
                .zip(r.landmarks.points())
                .map(|(a, b)| ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt())
                .sum::<f64>()
                / 53.0;
            if d < best.0 {
                best = (d, i);
            }
        }
        assert_eq!(nn_retrieve(&neutral, ds.train()).unwrap(), &ds.train()[best.1].command);
        assert!(nn_retrieve(&neutral, &[]).is_err());
    }

    #[test]
    fn nn_ties_go_to_the_lowest_step() {
        let (_, ds) = small();
        let mut records = ds.train()[..3].to_vec();
        records[2].landmarks = records[0].landmarks.clone();
        records[2].command = MotorCommand::zeros(10);
        records.swap(0, 2);
        assert_eq!(nn_retrieve(&records[0].landmarks, &records).unwrap(), &ds.train()[0].command);
    }

    #[test]
    fn ri_is_deterministic_per_seed() {
        let rig = FaceRig::standard();
        let mut c = InverseConfig::default();
        let a = make_ri(&rig, &c).unwrap();
        assert_eq!(a.checkpoint_hash(), make_ri(&rig, &c).unwrap().checkpoint_hash());
        c.train.seed = 1;
        assert_ne!(a.checkpoint_hash(), make_ri(&rig, &c).unwrap().checkpoint_hash());
    }

    #[test]
    fn ri100_takes_exactly_100_updates() {
        let (rig, ds) = small();
        let mut c = InverseConfig::default();
        c.train.batch = 8;
        let m = make_ri100(&ds, &rig, &c).unwrap();
        assert_eq!(m.graph().adam_state().step, RI100_ITERATIONS as u64);
        assert_eq!(m.checkpoint_hash(), make_ri100(&ds, &rig, &c).unwrap().checkpoint_hash());
    }

    #[test]
    fn random_command_marginals_are_uniform() {
        // chi-square with 4 degrees of freedom, critical value at alpha 0.001
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [[0usize; 5]; 10];
        let draws = 10_000;
        for _ in 0..draws {
            for (m, l) in random_command_with(&mut rng, 10).levels().into_iter().enumerate() {
                counts[m][l as usize] += 1;
            }
        }
        let expected = draws as f64 / 5.0;
        for row in counts {
            let chi2: f64 = row.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
            assert!(chi2 < 18.467, "chi2 {chi2}");
        }
        assert_eq!(random_command(3, 10), random_command(3, 10));
    }
}
