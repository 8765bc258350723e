//! Motor babbling: random grid commands, the resulting self-images and their
//! detected landmarks, collected reproducibly and stored on disk.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::image::SelfImage;
use crate::landmarks::{compute_ranges, LandmarkRanges, LandmarkSet};
use crate::simface::{detect_landmarks, render, FaceRig, MotorCommand, LEVELS};

pub const DATASET_FORMAT: &str = "mimicface-babble/1";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const COMMANDS_FILE: &str = "commands.csv";
pub const RIG_FILE: &str = "rig.json";

#[derive(Clone, Debug, PartialEq)]
pub struct BabbleRecord {
    pub step: usize,
    pub command: MotorCommand,
    pub landmarks: LandmarkSet,
    /// 8-bit quantised, exactly as stored on disk.
    pub image: SelfImage,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BabbleDataset {
    pub rig_id: String,
    pub master_seed: u64,
    pub width: usize,
    pub height: usize,
    pub motors: usize,
    /// Ordered by step. Train, validation and test are consecutive blocks.
    pub records: Vec<BabbleRecord>,
    pub split: Split,
}

/// Seed for one step: SHA-256 of the master seed and step index.
pub fn step_seed(master_seed: u64, step: usize) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"babble-step");
    h.update(master_seed.to_le_bytes());
    h.update((step as u64).to_le_bytes());
    h.finalize().into()
}

/// The grid command drawn at `step`.
pub fn step_command(master_seed: u64, step: usize, motors: usize) -> MotorCommand {
    let mut rng = ChaCha8Rng::from_seed(step_seed(master_seed, step));
    let levels: Vec<u8> = (0..motors).map(|_| rng.random_range(0..LEVELS as u8)).collect();
    MotorCommand::from_levels(&levels).expect("levels in range")
}

fn record(rig: &FaceRig, master_seed: u64, step: usize) -> Result<BabbleRecord> {
    let command = step_command(master_seed, step, rig.motors());
    let image = render(rig, &command)?.quantized();
    let landmarks = detect_landmarks(rig, &image)?;
    Ok(BabbleRecord {
        step,
        command,
        landmarks,
        image,
    })
}

/// Collects `steps` records. The result depends only on the rig and seed;
/// `workers` threads produce exactly what one thread would.
pub fn collect(rig: &FaceRig, steps: usize, master_seed: u64, workers: usize) -> Result<BabbleDataset> {
    if steps == 0 {
        return Err(Error::Argument("babble needs at least one step".into()));
    }
    let workers = workers.clamp(1, steps);
    let per = steps.div_ceil(workers);
    let chunks: Vec<Result<Vec<BabbleRecord>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let range = w * per..((w + 1) * per).min(steps);
                s.spawn(move || range.map(|step| record(rig, master_seed, step)).collect())
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("babble worker panicked"))
            .collect()
    });
    let mut records = Vec::with_capacity(steps);
    for c in chunks {
        records.extend(c?);
    }
    Ok(BabbleDataset {
        rig_id: rig.rig_id().to_string(),
        master_seed,
        width: rig.width(),
        height: rig.height(),
        motors: rig.motors(),
        records,
        split: Split {
            train: steps,
            val: 0,
            test: 0,
        },
    })
}

/// Assigns the first `n_train` records to training, the next `n_val` to
/// validation and the next `n_test` to test; any remainder is dropped.
pub fn split(ds: &BabbleDataset, n_train: usize, n_val: usize, n_test: usize) -> Result<BabbleDataset> {
    let need = n_train + n_val + n_test;
    if need > ds.records.len() {
        return Err(Error::Argument(format!(
            "split needs {need} records, dataset has {}",
            ds.records.len()
        )));
    }
    let mut out = ds.clone();
    out.records.truncate(need);
    out.split = Split {
        train: n_train,
        val: n_val,
        test: n_test,
    };
    Ok(out)
}

impl BabbleDataset {
    pub fn train(&self) -> &[BabbleRecord] {
        &self.records[..self.split.train]
    }

    pub fn val(&self) -> &[BabbleRecord] {
        &self.records[self.split.train..self.split.train + self.split.val]
    }

    pub fn test(&self) -> &[BabbleRecord] {
        let start = self.split.train + self.split.val;
        &self.records[start..start + self.split.test]
    }

    /// Per-landmark ranges observed over the training split: the robot's
    /// side of landmark normalisation.
    pub fn train_ranges(&self) -> Result<LandmarkRanges> {
        let frames: Vec<LandmarkSet> = self.train().iter().map(|r| r.landmarks.clone()).collect();
        compute_ranges(&frames)
    }

    /// SHA-256 over the canonical content of every record and the split.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(DATASET_FORMAT.as_bytes());
        h.update(self.rig_id.as_bytes());
        for v in [
            self.master_seed,
            self.width as u64,
            self.height as u64,
            self.motors as u64,
            self.split.train as u64,
            self.split.val as u64,
            self.split.test as u64,
        ] {
            h.update(v.to_le_bytes());
        }
        for r in &self.records {
            h.update((r.step as u64).to_le_bytes());
            h.update(r.command.levels());
            for p in r.landmarks.points() {
                for v in [p.x, p.y, p.confidence] {
                    h.update(v.to_bits().to_le_bytes());
                }
            }
            h.update(r.image.to_rgb8());
        }
        hex::encode(h.finalize())
    }

    /// Fails unless the dataset was collected on `rig`.
    pub fn check_rig(&self, rig: &FaceRig) -> Result<()> {
        if self.rig_id != rig.rig_id() {
            return Err(Error::RigMismatch {
                expected: rig.rig_id().to_string(),
                found: self.rig_id.clone(),
            });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct FileEntry {
    path: String,
    sha256: String,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format: String,
    rig_id: String,
    master_seed: u64,
    width: usize,
    height: usize,
    motors: usize,
    records: usize,
    split: Split,
    content_hash: String,
    files: Vec<FileEntry>,
}

fn landmark_path(step: usize) -> String {
    format!("landmarks/lm_{step:06}.csv")
}

fn image_path(step: usize) -> String {
    format!("images/img_{step:06}.png")
}

fn sha_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn commands_header(motors: usize) -> Vec<String> {
    std::iter::once("step".to_string())
        .chain((0..motors).map(|m| format!("m{m}")))
        .collect()
}

/// Writes the dataset directory: manifest, rig, commands, per-step landmark
/// CSVs and PNG images. Every file's SHA-256 is recorded in the manifest.
pub fn save(ds: &BabbleDataset, rig: &FaceRig, dir: &Path) -> Result<()> {
    ds.check_rig(rig)?;
    for sub in ["landmarks", "images"] {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    let mut files = Vec::new();
    let mut put = |rel: String, bytes: Option<&[u8]>| -> Result<()> {
        let p = dir.join(&rel);
        if let Some(b) = bytes {
            write(&p, b)?;
        }
        files.push(FileEntry {
            sha256: sha_file(&p)?,
            path: rel,
        });
        Ok(())
    };
    put(RIG_FILE.into(), Some(rig.to_json().as_bytes()))?;

    let header = commands_header(ds.motors);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&header).map_err(|e| Error::format("commands csv", e))?;
    for r in &ds.records {
        let row = std::iter::once(r.step.to_string()).chain(r.command.values().iter().map(|v| v.to_string()));
        w.write_record(row).map_err(|e| Error::format("commands csv", e))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::format("commands csv", e))?;
    put(COMMANDS_FILE.into(), Some(&bytes))?;

    for r in &ds.records {
        put(landmark_path(r.step), Some(r.landmarks.to_csv().as_bytes()))?;
        let rel = image_path(r.step);
        r.image.save_png(&dir.join(&rel))?;
        put(rel, None)?;
    }

    let manifest = Manifest {
        format: DATASET_FORMAT.into(),
        rig_id: ds.rig_id.clone(),
        master_seed: ds.master_seed,
        width: ds.width,
        height: ds.height,
        motors: ds.motors,
        records: ds.records.len(),
        split: ds.split,
        content_hash: ds.content_hash(),
        files,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    write(&dir.join(MANIFEST_FILE), text)
}

/// Loads and verifies a dataset directory, returning it with its rig.
pub fn load(dir: &Path) -> Result<(BabbleDataset, FaceRig)> {
    let mp = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&mp).map_err(|e| Error::io(&mp, e))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::format("manifest", e))?;
    if m.format != DATASET_FORMAT {
        return Err(Error::format("manifest", format!("unknown format {}", m.format)));
    }
    for f in &m.files {
        let p = dir.join(&f.path);
        if sha_file(&p)? != f.sha256 {
            return Err(Error::Checksum { path: p });
        }
    }
    let rig = FaceRig::load(&dir.join(RIG_FILE))?;
    if rig.rig_id() != m.rig_id {
        return Err(Error::RigMismatch {
            expected: m.rig_id,
            found: rig.rig_id().to_string(),
        });
    }

    let cp = dir.join(COMMANDS_FILE);
    let mut reader = csv::Reader::from_path(&cp).map_err(|e| Error::format("commands csv", e))?;
    let header = reader.headers().map_err(|e| Error::format("commands csv", e))?.clone();
    if header.iter().ne(commands_header(m.motors).iter().map(String::as_str)) {
        return Err(Error::format("commands csv", "unexpected header"));
    }
    let mut records = Vec::with_capacity(m.records);
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::format("commands csv", e))?;
        let vals: Vec<f64> = row
            .iter()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::format("commands csv", format!("row {i}: {e}")))?;
        let step = vals[0] as usize;
        let command = MotorCommand::new(vals[1..].to_vec())?;
        let lp = dir.join(landmark_path(step));
        let lm_text = fs::read_to_string(&lp).map_err(|e| Error::io(&lp, e))?;
        records.push(BabbleRecord {
            step,
            command,
            landmarks: LandmarkSet::from_csv(&lm_text)?,
            image: SelfImage::load_png(&dir.join(image_path(step)))?,
        });
    }
    let ds = BabbleDataset {
        rig_id: m.rig_id,
        master_seed: m.master_seed,
        width: m.width,
        height: m.height,
        motors: m.motors,
        records,
        split: m.split,
    };
    if ds.records.len() != m.records || ds.content_hash() != m.content_hash {
        return Err(Error::format("dataset", "content does not match its manifest"));
    }
    Ok((ds, rig))
}

/// Loads a dataset and insists it was collected on `rig`.
pub fn load_for_rig(dir: &Path, rig: &FaceRig) -> Result<BabbleDataset> {
    let (ds, _) = load(dir)?;
    ds.check_rig(rig)?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_commands_are_reproducible_and_on_grid() {
        let a = step_command(7, 3, 10);
        assert_eq!(a, step_command(7, 3, 10));
        assert_ne!(a, step_command(7, 4, 10));
        assert_ne!(a, step_command(8, 3, 10));
        assert!(a.values().iter().all(|v| (v * 4.0).fract() == 0.0));
    }

    #[test]
    fn parallel_collection_equals_serial() {
        let rig = FaceRig::standard();
        let serial = collect(&rig, 7, 5, 1).unwrap();
        let parallel = collect(&rig, 7, 5, 3).unwrap();
        assert_eq!(serial, parallel);
        assert_eq!(serial.content_hash(), parallel.content_hash());
        assert_eq!(serial.records.iter().map(|r| r.step).collect::<Vec<_>>(), (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn split_blocks() {
        let rig = FaceRig::standard();
        let ds = split(&collect(&rig, 6, 1, 1).unwrap(), 3, 2, 1).unwrap();
        assert_eq!(ds.train().len(), 3);
        assert_eq!(ds.val()[0].step, 3);
        assert_eq!(ds.test()[0].step, 5);
        assert!(split(&ds, 4, 2, 1).is_err());
    }

    #[test]
    fn save_load_roundtrip_and_tamper_detection() {
        let rig = FaceRig::standard();
        let ds = split(&collect(&rig, 4, 11, 2).unwrap(), 2, 1, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save(&ds, &rig, dir.path()).unwrap();
        let (back, back_rig) = load(dir.path()).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back_rig, rig);

        let other = FaceRig::standard_with_motors(9).unwrap();
        assert!(matches!(load_for_rig(dir.path(), &other), Err(Error::RigMismatch { .. })));

        let lp = dir.path().join(landmark_path(2));
        let text = fs::read_to_string(&lp).unwrap().replacen("0,", "0,1", 1);
        fs::write(&lp, text).unwrap();
        assert!(matches!(load(dir.path()), Err(Error::Checksum { .. })));
    }
}
