//! The generative model (landmark mask + static self-image → self-image), the
//! inverse model (image → per-motor class distribution) and their chaining.

mod arch;
mod train;

use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use arch::{generative_graph, inverse_graph, GenerativeArch, InverseArch};
pub use train::{log_from_csv, log_to_csv, EpochLog, TrainConfig};

use crate::babble::{BabbleDataset, BabbleRecord};
use crate::diffnet::{checkpoint, loss, LayerGraph, Tensor};
use crate::error::{Error, Result};
use crate::image::SelfImage;
use crate::landmarks::{encode_mask, image_distance, normalize, LandmarkMask, LandmarkRanges, LandmarkSet};
use crate::simface::{FaceRig, MotorCommand, LEVELS};
use train::{Goal, Task, Validation};

pub const TRAIN_LOG_FILE: &str = "train_log.csv";
pub const REFERENCE_FILE: &str = "reference.png";
const STEP: f64 = 0.25;

/// Per-motor class indices in `0..5`; class `i` is the value `0.25·i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CommandClasses(Vec<u8>);

impl CommandClasses {
    pub fn new(classes: Vec<u8>) -> Result<Self> {
        if let Some(c) = classes.iter().find(|&&c| c as usize >= LEVELS) {
            return Err(Error::Range(format!("class {c} outside 0..{LEVELS}")));
        }
        Ok(CommandClasses(classes))
    }

    pub fn classes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_command(&self) -> MotorCommand {
        MotorCommand::from_levels(&self.0).expect("classes are in range")
    }
}

/// Rounds every value to the nearest grid class, ties upward.
pub fn discretize(values: &[f64]) -> Result<CommandClasses> {
    let mut out = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Range(format!("motor {i} value {v} outside [0, 1]")));
        }
        out.push((v / STEP + 0.5).floor() as u8);
    }
    Ok(CommandClasses(out))
}

/// Argmax per head of `LEVELS` probabilities; the lower index wins ties.
pub fn argmax_heads(probs: &[f64]) -> CommandClasses {
    let classes = probs
        .chunks(LEVELS)
        .map(|head| {
            let mut best = 0;
            for (i, &p) in head.iter().enumerate() {
                if p > head[best] {
                    best = i;
                }
            }
            best as u8
        })
        .collect();
    CommandClasses(classes)
}

fn record_classes(r: &BabbleRecord) -> Vec<usize> {
    r.command.levels().into_iter().map(usize::from).collect()
}

fn mask_of(landmarks: &LandmarkSet, width: usize, height: usize) -> Result<LandmarkMask> {
    Ok(encode_mask(landmarks, width, height)?.mask)
}

fn check_dims(what: &str, expected: (usize, usize), got: (usize, usize)) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension(format!(
            "{what} is {}×{}, model expects {}×{}",
            got.0, got.1, expected.0, expected.1
        )));
    }
    Ok(())
}

fn check_dataset(ds: &BabbleDataset) -> Result<()> {
    if ds.train().is_empty() || ds.val().is_empty() {
        return Err(Error::Training(format!(
            "dataset needs train and validation splits, got {} / {}",
            ds.split.train, ds.split.val
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// generative model

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerativeConfig {
    pub arch: GenerativeArch,
    pub train: TrainConfig,
}

impl Default for GenerativeConfig {
    fn default() -> Self {
        GenerativeConfig {
            arch: GenerativeArch::default(),
            train: TrainConfig {
                lr: 1e-3,
                epochs: 10,
                batch: 32,
                seed: 0,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct GenerativeMeta {
    kind: String,
    config: GenerativeConfig,
    width: usize,
    height: usize,
    rig_id: String,
    dataset_hash: String,
    best_epoch: usize,
}

#[derive(Clone, Debug)]
pub struct GenerativeModel {
    graph: LayerGraph<f32>,
    meta: GenerativeMeta,
    log: Vec<EpochLog>,
}

/// Input tensor item: mask planes then static image planes.
fn generative_input(masks: &[&LandmarkMask], static_image: &SelfImage) -> Tensor<f32> {
    let (w, h) = static_image.dims();
    let mut data = Vec::with_capacity(masks.len() * 5 * w * h);
    for m in masks {
        data.extend_from_slice(m.planes());
        data.extend_from_slice(static_image.planes());
    }
    Tensor::from_vec([masks.len(), 5, h, w], data).expect("sizes agree")
}

fn image_batch(images: &[&SelfImage]) -> Tensor<f32> {
    let (w, h) = images[0].dims();
    let mut data = Vec::with_capacity(images.len() * 3 * w * h);
    for img in images {
        data.extend_from_slice(img.planes());
    }
    Tensor::from_vec([images.len(), 3, h, w], data).expect("sizes agree")
}

struct GenerativeTask<'a> {
    train: &'a [BabbleRecord],
    val: &'a [BabbleRecord],
    static_image: &'a SelfImage,
    batch: usize,
}

impl GenerativeTask<'_> {
    fn inputs(&self, records: &[&BabbleRecord]) -> Result<(Tensor<f32>, Tensor<f32>)> {
        let (w, h) = self.static_image.dims();
        let masks = records
            .iter()
            .map(|r| mask_of(&r.landmarks, w, h))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&LandmarkMask> = masks.iter().collect();
        let images: Vec<&SelfImage> = records.iter().map(|r| &r.image).collect();
        Ok((generative_input(&refs, self.static_image), image_batch(&images)))
    }
}

impl Task for GenerativeTask<'_> {
    type Target = Tensor<f32>;

    fn train_len(&self) -> usize {
        self.train.len()
    }

    fn batch(&self, indices: &[usize]) -> Result<(Tensor<f32>, Tensor<f32>)> {
        let records: Vec<&BabbleRecord> = indices.iter().map(|&i| &self.train[i]).collect();
        self.inputs(&records)
    }

    fn loss(&self, output: &Tensor<f32>, target: &Tensor<f32>) -> Result<(f32, Tensor<f32>)> {
        loss::mse(output, target)
    }

    /// Mean image distance over the validation split; loss and metric coincide.
    fn validate(&self, graph: &LayerGraph<f32>) -> Result<Validation> {
        let mut total = 0.0f64;
        for chunk in self.val.chunks(self.batch) {
            let records: Vec<&BabbleRecord> = chunk.iter().collect();
            let (input, target) = self.inputs(&records)?;
            let out = graph.infer(&input)?;
            total += loss::mse(&out, &target)?.0 as f64 * chunk.len() as f64;
        }
        let mean = total / self.val.len() as f64;
        Ok(Validation { loss: mean, metric: mean })
    }

    fn goal(&self) -> Goal {
        Goal::Minimize
    }
}

/// Trains G on (mask of detected landmarks, static image) → recorded image.
pub fn train_generative(ds: &BabbleDataset, rig: &FaceRig, config: &GenerativeConfig) -> Result<GenerativeModel> {
    ds.check_rig(rig)?;
    check_dataset(ds)?;
    let static_image = crate::simface::static_self_image(rig);
    let graph = generative_graph(&config.arch, ds.width, ds.height, config.train.seed)?;
    let task = GenerativeTask {
        train: ds.train(),
        val: ds.val(),
        static_image: &static_image,
        batch: config.train.batch,
    };
    let out = train::fit("generative model", graph, &task, &config.train)?;
    Ok(GenerativeModel {
        graph: out.graph,
        meta: GenerativeMeta {
            kind: "generative".into(),
            config: *config,
            width: ds.width,
            height: ds.height,
            rig_id: ds.rig_id.clone(),
            dataset_hash: ds.content_hash(),
            best_epoch: out.best_epoch,
        },
        log: out.log,
    })
}

impl GenerativeModel {
    pub fn graph(&self) -> &LayerGraph<f32> {
        &self.graph
    }

    pub fn config(&self) -> &GenerativeConfig {
        &self.meta.config
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.meta.width, self.meta.height)
    }

    pub fn rig_id(&self) -> &str {
        &self.meta.rig_id
    }

    pub fn dataset_hash(&self) -> &str {
        &self.meta.dataset_hash
    }

    pub fn best_epoch(&self) -> usize {
        self.meta.best_epoch
    }

    /// Training curve; empty for a model loaded without its log.
    pub fn log(&self) -> &[EpochLog] {
        &self.log
    }

    /// Synthesises the self-image showing the landmarks of `mask`.
    pub fn generate(&self, mask: &LandmarkMask, static_image: &SelfImage) -> Result<SelfImage> {
        Ok(self.generate_batch(&[mask], static_image)?.remove(0))
    }

    pub fn generate_batch(&self, masks: &[&LandmarkMask], static_image: &SelfImage) -> Result<Vec<SelfImage>> {
        check_dims("static image", self.dims(), static_image.dims())?;
        for m in masks {
            check_dims("mask", self.dims(), (m.width(), m.height()))?;
        }
        if masks.is_empty() {
            return Ok(Vec::new());
        }
        let out = self.graph.infer(&generative_input(masks, static_image))?;
        (0..masks.len()).map(|i| SelfImage::from_tensor_item(&out, i)).collect()
    }

    pub fn checkpoint_hash(&self) -> String {
        checkpoint::checkpoint_hash(&self.graph, &meta_json(&self.meta))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        checkpoint::save(&self.graph, meta_json(&self.meta), dir)?;
        write_log(dir, &self.log)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let (graph, meta) = checkpoint::load(dir)?;
        let meta: GenerativeMeta = parse_meta(meta, "generative")?;
        if graph.input_shape() != [5, meta.height, meta.width] || graph.output_shape() != [3, meta.height, meta.width] {
            return Err(Error::format("generative checkpoint", "graph shapes disagree with metadata"));
        }
        Ok(GenerativeModel {
            graph,
            meta,
            log: read_log(dir)?,
        })
    }
}

// ---------------------------------------------------------------------------
// inverse model

/// What an inverse-style classifier looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseInput {
    /// RGB self-image (the inverse model F).
    Image,
    /// Two-channel landmark mask (the direct landmark-to-motor baseline).
    Mask,
}

impl InverseInput {
    pub fn channels(self) -> usize {
        match self {
            InverseInput::Image => 3,
            InverseInput::Mask => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseConfig {
    pub arch: InverseArch,
    pub input: InverseInput,
    pub train: TrainConfig,
}

impl Default for InverseConfig {
    fn default() -> Self {
        InverseConfig {
            arch: InverseArch::default(),
            input: InverseInput::Image,
            train: TrainConfig {
                lr: 5e-5,
                epochs: 40,
                batch: 32,
                seed: 0,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct InverseMeta {
    kind: String,
    config: InverseConfig,
    width: usize,
    height: usize,
    motors: usize,
    /// Dataset the weights were fitted on; `None` for an untrained network.
    dataset_hash: Option<String>,
    /// Number of Adam updates when trained for a fixed budget.
    iterations: Option<usize>,
    best_epoch: Option<usize>,
    /// SHA-256 of the reference image's 8-bit RGB bytes.
    reference_sha256: Option<String>,
}

#[derive(Clone, Debug)]
pub struct InverseModel {
    graph: LayerGraph<f32>,
    /// Subtracted from every input image; the robot's static self-image.
    reference: Option<SelfImage>,
    meta: InverseMeta,
    log: Vec<EpochLog>,
}

/// Class prediction with its per-head probabilities (`motors × 5`).
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub command: MotorCommand,
    pub classes: CommandClasses,
    pub probabilities: Vec<f64>,
}

struct InverseTask<'a> {
    reference: Option<&'a SelfImage>,
    train: &'a [BabbleRecord],
    val: &'a [BabbleRecord],
    input: InverseInput,
    dims: (usize, usize),
    batch: usize,
}

impl InverseTask<'_> {
    fn inputs(&self, records: &[&BabbleRecord]) -> Result<(Tensor<f32>, Vec<usize>)> {
        let input = match self.input {
            InverseInput::Image => {
                let images: Vec<&SelfImage> = records.iter().map(|r| &r.image).collect();
                centered_batch(&images, self.reference)
            }
            InverseInput::Mask => {
                let masks = records
                    .iter()
                    .map(|r| mask_of(&r.landmarks, self.dims.0, self.dims.1))
                    .collect::<Result<Vec<_>>>()?;
                mask_batch(&masks.iter().collect::<Vec<_>>())
            }
        };
        let targets = records.iter().flat_map(|r| record_classes(r)).collect();
        Ok((input, targets))
    }
}

/// Image batch minus the reference image, when there is one.
fn centered_batch(images: &[&SelfImage], reference: Option<&SelfImage>) -> Tensor<f32> {
    let mut t = image_batch(images);
    if let Some(r) = reference {
        let r = r.planes();
        for item in t.data_mut().chunks_mut(r.len()) {
            for (v, &b) in item.iter_mut().zip(r) {
                *v -= b;
            }
        }
    }
    t
}

fn mask_batch(masks: &[&LandmarkMask]) -> Tensor<f32> {
    let (w, h) = (masks[0].width(), masks[0].height());
    let mut data = Vec::with_capacity(masks.len() * 2 * w * h);
    for m in masks {
        data.extend_from_slice(m.planes());
    }
    Tensor::from_vec([masks.len(), 2, h, w], data).expect("sizes agree")
}

impl Task for InverseTask<'_> {
    type Target = Vec<usize>;

    fn train_len(&self) -> usize {
        self.train.len()
    }

    fn batch(&self, indices: &[usize]) -> Result<(Tensor<f32>, Vec<usize>)> {
        let records: Vec<&BabbleRecord> = indices.iter().map(|&i| &self.train[i]).collect();
        self.inputs(&records)
    }

    fn loss(&self, output: &Tensor<f32>, target: &Vec<usize>) -> Result<(f32, Tensor<f32>)> {
        loss::softmax_cross_entropy(output, target, LEVELS)
    }

    /// Cross-entropy for the learning-signal check, command accuracy for selection.
    fn validate(&self, graph: &LayerGraph<f32>) -> Result<Validation> {
        let mut total = 0.0f64;
        let mut correct = 0usize;
        let mut heads = 0usize;
        for chunk in self.val.chunks(self.batch) {
            let records: Vec<&BabbleRecord> = chunk.iter().collect();
            let (input, targets) = self.inputs(&records)?;
            let out = graph.infer(&input)?;
            total += loss::softmax_cross_entropy(&out, &targets, LEVELS)?.0 as f64 * chunk.len() as f64;
            let probs: Vec<f64> = loss::softmax_heads(out.data(), LEVELS).iter().map(|&p| p as f64).collect();
            let predicted = argmax_heads(&probs);
            correct += predicted
                .classes()
                .iter()
                .zip(&targets)
                .filter(|(&p, &t)| p as usize == t)
                .count();
            heads += targets.len();
        }
        Ok(Validation {
            loss: total / self.val.len() as f64,
            metric: correct as f64 / heads as f64,
        })
    }

    fn goal(&self) -> Goal {
        Goal::Maximize
    }
}

impl InverseModel {
    /// Untrained network of the configured architecture. Image-input models
    /// see their input minus the rig's static self-image (8-bit quantised).
    pub fn untrained(config: &InverseConfig, rig: &FaceRig) -> Result<Self> {
        config.train.validate()?;
        let (width, height) = rig.dims();
        let motors = rig.motors();
        let reference = match config.input {
            InverseInput::Image => Some(crate::simface::static_self_image(rig).quantized()),
            InverseInput::Mask => None,
        };
        let graph = inverse_graph(
            &config.arch,
            config.input.channels(),
            width,
            height,
            motors,
            config.train.seed,
        )?;
        Ok(InverseModel {
            graph,
            meta: InverseMeta {
                reference_sha256: reference.as_ref().map(reference_hash),
                kind: "inverse".into(),
                config: *config,
                width,
                height,
                motors,
                dataset_hash: None,
                iterations: None,
                best_epoch: None,
            },
            reference,
            log: Vec::new(),
        })
    }

    fn task<'a>(&'a self, ds: &'a BabbleDataset) -> InverseTask<'a> {
        InverseTask {
            reference: self.reference.as_ref(),
            train: ds.train(),
            val: ds.val(),
            input: self.meta.config.input,
            dims: (self.meta.width, self.meta.height),
            batch: self.meta.config.train.batch,
        }
    }

    fn check_dataset(&self, ds: &BabbleDataset) -> Result<()> {
        check_dims("dataset", (self.meta.width, self.meta.height), (ds.width, ds.height))?;
        if ds.motors != self.meta.motors {
            return Err(Error::Dimension(format!(
                "dataset has {} motors, model {}",
                ds.motors, self.meta.motors
            )));
        }
        check_dataset(ds)
    }

    /// Exactly `iterations` Adam updates from the current weights.
    pub fn train_iterations(mut self, ds: &BabbleDataset, iterations: usize) -> Result<Self> {
        self.check_dataset(ds)?;
        let config = self.meta.config.train;
        let graph = train::fit_iterations("inverse model", self.graph.clone(), &self.task(ds), &config, iterations)?;
        self.graph = graph;
        self.meta.dataset_hash = Some(ds.content_hash());
        self.meta.iterations = Some(iterations);
        Ok(self)
    }

    pub fn graph(&self) -> &LayerGraph<f32> {
        &self.graph
    }

    pub fn config(&self) -> &InverseConfig {
        &self.meta.config
    }

    pub fn input(&self) -> InverseInput {
        self.meta.config.input
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.meta.width, self.meta.height)
    }

    pub fn motors(&self) -> usize {
        self.meta.motors
    }

    pub fn dataset_hash(&self) -> Option<&str> {
        self.meta.dataset_hash.as_deref()
    }

    pub fn best_epoch(&self) -> Option<usize> {
        self.meta.best_epoch
    }

    pub fn log(&self) -> &[EpochLog] {
        &self.log
    }

    fn predict(&self, input: &Tensor<f32>) -> Result<Vec<Prediction>> {
        let out = self.graph.infer(input)?;
        let per = self.meta.motors * LEVELS;
        let probs = loss::softmax_heads(out.data(), LEVELS);
        Ok(probs
            .chunks(per)
            .map(|p| {
                let probabilities: Vec<f64> = p.iter().map(|&v| v as f64).collect();
                let classes = argmax_heads(&probabilities);
                Prediction {
                    command: classes.to_command(),
                    classes,
                    probabilities,
                }
            })
            .collect())
    }

    fn require(&self, input: InverseInput) -> Result<()> {
        if self.meta.config.input != input {
            return Err(Error::Argument(format!(
                "model reads {:?} input, got {:?}",
                self.meta.config.input, input
            )));
        }
        Ok(())
    }

    /// Most likely command for a self-image.
    pub fn infer_commands(&self, image: &SelfImage) -> Result<Prediction> {
        Ok(self.infer_images(&[image])?.remove(0))
    }

    pub fn infer_images(&self, images: &[&SelfImage]) -> Result<Vec<Prediction>> {
        self.require(InverseInput::Image)?;
        for img in images {
            check_dims("image", self.dims(), img.dims())?;
        }
        if images.is_empty() {
            return Ok(Vec::new());
        }
        self.predict(&centered_batch(images, self.reference.as_ref()))
    }

    /// Most likely command for a landmark mask (mask-input models only).
    pub fn infer_masks(&self, masks: &[&LandmarkMask]) -> Result<Vec<Prediction>> {
        self.require(InverseInput::Mask)?;
        for m in masks {
            check_dims("mask", self.dims(), (m.width(), m.height()))?;
        }
        if masks.is_empty() {
            return Ok(Vec::new());
        }
        self.predict(&mask_batch(masks))
    }

    pub fn checkpoint_hash(&self) -> String {
        checkpoint::checkpoint_hash(&self.graph, &meta_json(&self.meta))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        checkpoint::save(&self.graph, meta_json(&self.meta), dir)?;
        if let Some(r) = &self.reference {
            r.save_png(&dir.join(REFERENCE_FILE))?;
        }
        write_log(dir, &self.log)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let (graph, meta) = checkpoint::load(dir)?;
        let meta: InverseMeta = parse_meta(meta, "inverse")?;
        let reference = match &meta.reference_sha256 {
            None => None,
            Some(expected) => {
                let path = dir.join(REFERENCE_FILE);
                // a missing file stays an io error; unreadable contents fail the checksum
                let img = match SelfImage::load_png(&path) {
                    Ok(img) => img,
                    Err(e) if !path.exists() => return Err(e),
                    Err(_) => return Err(Error::Checksum { path }),
                };
                if reference_hash(&img) != *expected || img.dims() != (meta.width, meta.height) {
                    return Err(Error::Checksum { path });
                }
                Some(img)
            }
        };
        let expected_in = [meta.config.input.channels(), meta.height, meta.width];
        if graph.input_shape() != expected_in || graph.output_shape() != [meta.motors * LEVELS, 1, 1] {
            return Err(Error::format("inverse checkpoint", "graph shapes disagree with metadata"));
        }
        Ok(InverseModel {
            graph,
            meta,
            reference,
            log: read_log(dir)?,
        })
    }
}

/// Trains F (or the mask-input baseline) with summed per-head cross-entropy,
/// keeping the epoch with the best validation command accuracy.
pub fn train_inverse(ds: &BabbleDataset, rig: &FaceRig, config: &InverseConfig) -> Result<InverseModel> {
    ds.check_rig(rig)?;
    let mut model = InverseModel::untrained(config, rig)?;
    model.check_dataset(ds)?;
    let out = train::fit("inverse model", model.graph.clone(), &model.task(ds), &config.train)?;
    model.graph = out.graph;
    model.log = out.log;
    model.meta.dataset_hash = Some(ds.content_hash());
    model.meta.best_epoch = Some(out.best_epoch);
    Ok(model)
}

// ---------------------------------------------------------------------------
// checkpoints

fn meta_json<M: Serialize>(meta: &M) -> serde_json::Value {
    serde_json::to_value(meta).expect("metadata serialises")
}

fn parse_meta<M: serde::de::DeserializeOwned>(meta: serde_json::Value, kind: &str) -> Result<M> {
    let found = meta.get("kind").and_then(|k| k.as_str()).unwrap_or("none").to_string();
    if found != kind {
        return Err(Error::format(
            "checkpoint",
            format!("expected a {kind} model, found {found}"),
        ));
    }
    serde_json::from_value(meta).map_err(|e| Error::format("checkpoint metadata", e.to_string()))
}

fn reference_hash(img: &SelfImage) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(img.to_rgb8()))
}

fn write_log(dir: &Path, log: &[EpochLog]) -> Result<()> {
    if log.is_empty() {
        return Ok(());
    }
    let path = dir.join(TRAIN_LOG_FILE);
    std::fs::write(&path, log_to_csv(log)).map_err(|e| Error::io(&path, e))
}

fn read_log(dir: &Path) -> Result<Vec<EpochLog>> {
    let path = dir.join(TRAIN_LOG_FILE);
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    log_from_csv(&text)
}

// ---------------------------------------------------------------------------
// joint inference

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub prediction: Prediction,
    /// Normalised target landmarks fed to the generator.
    pub target: LandmarkSet,
    pub generated: SelfImage,
    /// Landmarks clamped during normalisation.
    pub clamped: usize,
    pub latency: Duration,
}

/// normalize → encode_mask → generate → infer_commands, timed end to end.
pub fn pipeline_infer(
    gm: &GenerativeModel,
    im: &InverseModel,
    human: &LandmarkSet,
    human_ranges: &LandmarkRanges,
    robot_ranges: &LandmarkRanges,
    static_image: &SelfImage,
) -> Result<PipelineOutput> {
    let start = Instant::now();
    let normalized = normalize(human, human_ranges, robot_ranges)?;
    let (w, h) = gm.dims();
    let mask = mask_of(&normalized.landmarks, w, h)?;
    let generated = gm.generate(&mask, static_image)?;
    let prediction = im.infer_commands(&generated)?;
    Ok(PipelineOutput {
        prediction,
        target: normalized.landmarks,
        generated,
        clamped: normalized.clamped,
        latency: start.elapsed(),
    })
}

/// Mean image distance between generated and recorded images of `records`.
pub fn mean_generation_error(
    gm: &GenerativeModel,
    records: &[BabbleRecord],
    static_image: &SelfImage,
) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Argument("no records to evaluate".into()));
    }
    let (w, h) = gm.dims();
    let mut total = 0.0;
    for r in records {
        let img = gm.generate(&mask_of(&r.landmarks, w, h)?, static_image)?;
        total += image_distance(&img, &r.image)?;
    }
    Ok(total / records.len() as f64)
}
