use serde::{Deserialize, Serialize};

use super::{command_accuracy, command_distance, derive_seed, EvalReport};
use crate::babble::{self, BabbleDataset, BabbleRecord};
use crate::baselines::{nn_retrieve, random_command};
use crate::error::{Error, Result};
use crate::image::SelfImage;
use crate::landmarks::{
    compute_ranges, encode_mask, image_distance, landmark_distance, normalize, LandmarkMask, LandmarkRanges,
    LandmarkSet,
};
use crate::mimicry::{pipeline_infer, GenerativeModel, InverseModel, Prediction};
use crate::simface::{detect_landmarks, make_subject, render, static_self_image, FaceRig, MotorCommand};

pub const DEFAULT_SUBJECTS: usize = 8;
pub const DEFAULT_FRAMES: usize = 40;
pub const SUBJECT_BABBLE_FRAMES: usize = 500;
const CHUNK: usize = 32;
const SUBJECT_SEED_BASE: u64 = 0x5eed_0000;
const EXPRESSION_SEED_BASE: u64 = 0xe4e5_0000;

/// One model per evaluation seed for each inverse-style method.
pub struct InverseModels<'a> {
    pub im: &'a [InverseModel],
    pub ri: &'a [InverseModel],
    pub ri100: &'a [InverseModel],
}

pub struct PipelineModels<'a> {
    pub gm: &'a [GenerativeModel],
    pub im: &'a [InverseModel],
    pub ri: &'a [InverseModel],
    pub ri100: &'a [InverseModel],
    pub landmark_to_motor: &'a [InverseModel],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutionSetup {
    pub subjects: usize,
    pub frames: usize,
    pub subject_babble: usize,
    /// Distortion of the last subject; subjects are spaced evenly from 0.
    pub max_distortion: f64,
}

impl Default for ExecutionSetup {
    fn default() -> Self {
        ExecutionSetup {
            subjects: DEFAULT_SUBJECTS,
            frames: DEFAULT_FRAMES,
            subject_babble: SUBJECT_BABBLE_FRAMES,
            max_distortion: 0.5,
        }
    }
}

/// Distortion of subject `k` out of `n`, evenly spaced over `[0, max]`.
pub fn subject_distortion(k: usize, n: usize, max: f64) -> f64 {
    if n < 2 {
        0.0
    } else {
        max * k as f64 / (n - 1) as f64
    }
}

fn check_seeds(what: &str, seeds: &[u64], n: usize) -> Result<()> {
    if seeds.is_empty() || seeds.len() != n {
        return Err(Error::Argument(format!(
            "{what}: {n} models for {} seeds; need one model per seed",
            seeds.len()
        )));
    }
    Ok(())
}

fn test_records(ds: &BabbleDataset) -> Result<&[BabbleRecord]> {
    if ds.test().is_empty() {
        return Err(Error::Argument("dataset has no test split".into()));
    }
    Ok(ds.test())
}

fn masks(landmarks: &[&LandmarkSet], rig: &FaceRig) -> Result<Vec<LandmarkMask>> {
    landmarks
        .iter()
        .map(|l| Ok(encode_mask(l, rig.width(), rig.height())?.mask))
        .collect()
}

fn generate_all(gm: &GenerativeModel, masks: &[LandmarkMask], static_image: &SelfImage) -> Result<Vec<SelfImage>> {
    let mut out = Vec::with_capacity(masks.len());
    for chunk in masks.chunks(CHUNK) {
        out.extend(gm.generate_batch(&chunk.iter().collect::<Vec<_>>(), static_image)?);
    }
    Ok(out)
}

fn infer_all(im: &InverseModel, images: &[&SelfImage]) -> Result<Vec<Prediction>> {
    let mut out = Vec::with_capacity(images.len());
    for chunk in images.chunks(CHUNK) {
        out.extend(im.infer_images(chunk)?);
    }
    Ok(out)
}

fn infer_masks_all(im: &InverseModel, masks: &[LandmarkMask]) -> Result<Vec<Prediction>> {
    let mut out = Vec::with_capacity(masks.len());
    for chunk in masks.chunks(CHUNK) {
        out.extend(im.infer_masks(&chunk.iter().collect::<Vec<_>>())?);
    }
    Ok(out)
}

/// Mean command distance and accuracy of predictions against targets.
fn command_scores<'a>(
    predicted: impl IntoIterator<Item = &'a MotorCommand>,
    targets: &[&MotorCommand],
) -> Result<(f64, f64)> {
    let mut dist = 0.0;
    let mut acc = 0.0;
    let mut n = 0usize;
    for (p, t) in predicted.into_iter().zip(targets) {
        dist += command_distance(p, t)?;
        acc += command_accuracy(p, t)?;
        n += 1;
    }
    if n != targets.len() {
        return Err(Error::State("prediction count differs from target count".into()));
    }
    Ok((dist / n as f64, acc / n as f64))
}

fn setup_json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("config serialises")
}

/// Generated images versus recorded images (and their detected landmarks),
/// against a random training image.
pub fn eval_generative(gms: &[GenerativeModel], ds: &BabbleDataset, rig: &FaceRig, seeds: &[u64]) -> Result<EvalReport> {
    check_seeds("eval_generative", seeds, gms.len())?;
    ds.check_rig(rig)?;
    let test = test_records(ds)?;
    let static_image = static_self_image(rig);
    let ms = masks(&test.iter().map(|r| &r.landmarks).collect::<Vec<_>>(), rig)?;
    let mut gm_img = Vec::new();
    let mut gm_lm = Vec::new();
    let mut rs_img = Vec::new();
    let mut rs_lm = Vec::new();
    for (gm, &seed) in gms.iter().zip(seeds) {
        let generated = generate_all(gm, &ms, &static_image)?;
        let (mut di, mut dl, mut ri, mut rl) = (0.0, 0.0, 0.0, 0.0);
        for (i, (r, g)) in test.iter().zip(&generated).enumerate() {
            di += image_distance(g, &r.image)?;
            dl += landmark_distance(&detect_landmarks(rig, g)?, &r.landmarks);
            let rs = rs_record(ds, derive_seed(seed, i as u64))?;
            ri += image_distance(&rs.image, &r.image)?;
            rl += landmark_distance(&rs.landmarks, &r.landmarks);
        }
        let n = test.len() as f64;
        gm_img.push(di / n);
        gm_lm.push(dl / n);
        rs_img.push(ri / n);
        rs_lm.push(rl / n);
    }
    let config = serde_json::json!({
        "generative": gms.iter().map(|g| setup_json(g.config())).collect::<Vec<_>>(),
        "checkpoints": gms.iter().map(|g| g.checkpoint_hash()).collect::<Vec<_>>(),
        "test_records": test.len(),
    });
    let mut report = EvalReport::new("generative", seeds, &ds.content_hash(), config);
    report.push("GM", "image_distance", &gm_img);
    report.push("GM", "landmark_distance", &gm_lm);
    report.push("RS", "image_distance", &rs_img);
    report.push("RS", "landmark_distance", &rs_lm);
    Ok(report)
}

fn rs_record(ds: &BabbleDataset, seed: u64) -> Result<&BabbleRecord> {
    Ok(&ds.train()[crate::baselines::rs_index(ds, seed)?])
}

/// Inverse model and its two baselines on held-out recorded images.
pub fn eval_inverse(models: &InverseModels<'_>, ds: &BabbleDataset, seeds: &[u64]) -> Result<EvalReport> {
    for (name, set) in [("IM", models.im), ("RI", models.ri), ("RI100", models.ri100)] {
        check_seeds(name, seeds, set.len())?;
    }
    let test = test_records(ds)?;
    let images: Vec<&SelfImage> = test.iter().map(|r| &r.image).collect();
    let targets: Vec<&MotorCommand> = test.iter().map(|r| &r.command).collect();
    let mut report = EvalReport::new("inverse", seeds, &ds.content_hash(), serde_json::Value::Null);
    let mut hashes = serde_json::Map::new();
    for (name, set) in [("IM", models.im), ("RI", models.ri), ("RI100", models.ri100)] {
        let mut dist = Vec::new();
        let mut acc = Vec::new();
        for m in set {
            let preds = infer_all(m, &images)?;
            let (d, a) = command_scores(preds.iter().map(|p| &p.command), &targets)?;
            dist.push(d);
            acc.push(a);
        }
        report.push(name, "command_distance", &dist);
        report.push(name, "command_accuracy", &acc);
        hashes.insert(name.into(), set.iter().map(|m| m.checkpoint_hash()).collect());
    }
    report.config = serde_json::json!({
        "inverse": setup_json(models.im[0].config()),
        "checkpoints": hashes,
        "test_records": test.len(),
    });
    Ok(report)
}

/// The two-stage chain and every alternative on held-out records: the input
/// is a record's detected landmarks, the target its command.
pub fn eval_pipeline(models: &PipelineModels<'_>, ds: &BabbleDataset, rig: &FaceRig, seeds: &[u64]) -> Result<EvalReport> {
    for (name, n) in [
        ("GM", models.gm.len()),
        ("IM", models.im.len()),
        ("RI", models.ri.len()),
        ("RI100", models.ri100.len()),
        ("LandmarkToMotor", models.landmark_to_motor.len()),
    ] {
        check_seeds(name, seeds, n)?;
    }
    ds.check_rig(rig)?;
    let test = test_records(ds)?;
    let ranges = ds.train_ranges()?;
    let static_image = static_self_image(rig);
    let targets: Vec<&MotorCommand> = test.iter().map(|r| &r.command).collect();
    let inputs = test
        .iter()
        .map(|r| Ok(normalize(&r.landmarks, &ranges, &ranges)?.landmarks))
        .collect::<Result<Vec<_>>>()?;
    let ms = masks(&inputs.iter().collect::<Vec<_>>(), rig)?;

    // retrieval on the input landmarks needs no model
    let landmark_nn = inputs
        .iter()
        .map(|l| nn_retrieve(l, ds.train()).cloned())
        .collect::<Result<Vec<_>>>()?;
    let landmark_nn = command_scores(landmark_nn.iter(), &targets)?;

    let methods = ["GM+IM", "GM+NN", "GM+RI", "GM+RI100", "LandmarkToMotor", "LandmarkNN", "IM"];
    let mut dist: Vec<Vec<f64>> = vec![Vec::new(); methods.len()];
    let mut acc: Vec<Vec<f64>> = vec![Vec::new(); methods.len()];
    for s in 0..seeds.len() {
        let generated = generate_all(&models.gm[s], &ms, &static_image)?;
        let gen_refs: Vec<&SelfImage> = generated.iter().collect();
        let nn_on_generated = generated
            .iter()
            .map(|g| nn_retrieve(&detect_landmarks(rig, g)?, ds.train()).cloned())
            .collect::<Result<Vec<_>>>()?;
        let recorded: Vec<&SelfImage> = test.iter().map(|r| &r.image).collect();
        let scores = [
            command_scores(infer_all(&models.im[s], &gen_refs)?.iter().map(|p| &p.command), &targets)?,
            command_scores(nn_on_generated.iter(), &targets)?,
            command_scores(infer_all(&models.ri[s], &gen_refs)?.iter().map(|p| &p.command), &targets)?,
            command_scores(infer_all(&models.ri100[s], &gen_refs)?.iter().map(|p| &p.command), &targets)?,
            command_scores(
                infer_masks_all(&models.landmark_to_motor[s], &ms)?.iter().map(|p| &p.command),
                &targets,
            )?,
            landmark_nn,
            command_scores(infer_all(&models.im[s], &recorded)?.iter().map(|p| &p.command), &targets)?,
        ];
        for (i, (d, a)) in scores.into_iter().enumerate() {
            dist[i].push(d);
            acc[i].push(a);
        }
    }
    let config = serde_json::json!({
        "generative": setup_json(models.gm[0].config()),
        "inverse": setup_json(models.im[0].config()),
        "landmark_to_motor": setup_json(models.landmark_to_motor[0].config()),
        "checkpoints": {
            "GM": models.gm.iter().map(|m| m.checkpoint_hash()).collect::<Vec<_>>(),
            "IM": models.im.iter().map(|m| m.checkpoint_hash()).collect::<Vec<_>>(),
            "RI": models.ri.iter().map(|m| m.checkpoint_hash()).collect::<Vec<_>>(),
            "RI100": models.ri100.iter().map(|m| m.checkpoint_hash()).collect::<Vec<_>>(),
            "LandmarkToMotor": models.landmark_to_motor.iter().map(|m| m.checkpoint_hash()).collect::<Vec<_>>(),
        },
        "test_records": test.len(),
    });
    let mut report = EvalReport::new("pipeline", seeds, &ds.content_hash(), config);
    for (i, m) in methods.iter().enumerate() {
        report.push(m, "command_distance", &dist[i]);
        report.push(m, "command_accuracy", &acc[i]);
    }
    report.notes.push("IM row: inverse model on recorded images, for reference".into());
    Ok(report)
}

struct Subject {
    rig: FaceRig,
    ranges: LandmarkRanges,
    /// Expression commands and the subject's detected landmarks for them.
    frames: Vec<(MotorCommand, LandmarkSet)>,
}

fn build_subject(master: &FaceRig, k: usize, setup: &ExecutionSetup) -> Result<Subject> {
    let d = subject_distortion(k, setup.subjects, setup.max_distortion);
    let rig = make_subject(master, derive_seed(SUBJECT_SEED_BASE, k as u64), d)?;
    let babble = babble::collect(&rig, setup.subject_babble, derive_seed(SUBJECT_SEED_BASE + 1, k as u64), 1)?;
    let seen: Vec<LandmarkSet> = babble.records.into_iter().map(|r| r.landmarks).collect();
    let ranges = compute_ranges(&seen)?;
    let frames = (0..setup.frames)
        .map(|f| {
            let cmd = random_command(derive_seed(EXPRESSION_SEED_BASE + k as u64, f as u64), rig.motors());
            let lms = detect_landmarks(&rig, &render(&rig, &cmd)?)?;
            Ok((cmd, lms))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Subject { rig, ranges, frames })
}

fn execute(robot: &FaceRig, cmd: &MotorCommand) -> Result<LandmarkSet> {
    detect_landmarks(robot, &render(robot, cmd)?)
}

/// Pseudo-human imitation: for each subject frame, normalise the subject's
/// landmarks into the robot's ranges, run the chain, execute the command on
/// the robot and measure the executed landmarks against the normalised
/// target. Random commands and the robot imitating its own expressions serve
/// as references.
pub fn eval_execution(
    gms: &[GenerativeModel],
    ims: &[InverseModel],
    ds: &BabbleDataset,
    robot: &FaceRig,
    setup: &ExecutionSetup,
    seeds: &[u64],
) -> Result<EvalReport> {
    check_seeds("GM", seeds, gms.len())?;
    check_seeds("IM", seeds, ims.len())?;
    ds.check_rig(robot)?;
    if setup.subjects == 0 || setup.frames == 0 {
        return Err(Error::Argument("execution needs at least one subject and one frame".into()));
    }
    let robot_ranges = ds.train_ranges()?;
    let static_image = static_self_image(robot);
    let subjects = (0..setup.subjects)
        .map(|k| build_subject(robot, k, setup))
        .collect::<Result<Vec<_>>>()?;

    let n_sub = subjects.len();
    // [subject][seed]
    let mut pipe = vec![Vec::new(); n_sub];
    let mut rand = vec![Vec::new(); n_sub];
    let mut round = vec![Vec::new(); n_sub];
    let mut latencies = Vec::new();
    let mut clamped = 0usize;
    for (s, &seed) in seeds.iter().enumerate() {
        for (k, subj) in subjects.iter().enumerate() {
            let (mut dp, mut dr, mut dt) = (0.0, 0.0, 0.0);
            for (f, (cmd, human)) in subj.frames.iter().enumerate() {
                let out = pipeline_infer(&gms[s], &ims[s], human, &subj.ranges, &robot_ranges, &static_image)?;
                latencies.push(out.latency.as_secs_f64() * 1e3);
                clamped += out.clamped;
                dp += landmark_distance(&execute(robot, &out.prediction.command)?, &out.target);

                let random = random_command(derive_seed(seed, (k * setup.frames + f) as u64), robot.motors());
                dr += landmark_distance(&execute(robot, &random)?, &out.target);

                let own = execute(robot, cmd)?;
                let rt = pipeline_infer(&gms[s], &ims[s], &own, &robot_ranges, &robot_ranges, &static_image)?;
                dt += landmark_distance(&execute(robot, &rt.prediction.command)?, &rt.target);
            }
            let n = subj.frames.len() as f64;
            pipe[k].push(dp / n);
            rand[k].push(dr / n);
            round[k].push(dt / n);
        }
    }

    let distortions: Vec<f64> = (0..n_sub)
        .map(|k| subject_distortion(k, setup.subjects, setup.max_distortion))
        .collect();
    let config = serde_json::json!({
        "setup": setup_json(setup),
        "distortions": distortions,
        "subject_rigs": subjects.iter().map(|s| s.rig.rig_id().to_string()).collect::<Vec<_>>(),
        "checkpoints": {
            "GM": gms.iter().map(|m| m.checkpoint_hash()).collect::<Vec<_>>(),
            "IM": ims.iter().map(|m| m.checkpoint_hash()).collect::<Vec<_>>(),
        },
    });
    let mut report = EvalReport::new("execution", seeds, &ds.content_hash(), config);
    let overall = |rows: &[Vec<f64>]| -> Vec<f64> {
        (0..seeds.len())
            .map(|s| rows.iter().map(|r| r[s]).sum::<f64>() / rows.len() as f64)
            .collect()
    };
    for (name, rows) in [("GM+IM", &pipe), ("RandomCommand", &rand), ("RobotRoundTrip", &round)] {
        for (k, per_seed) in rows.iter().enumerate() {
            report.push(name, &format!("landmark_distance_s{k}"), per_seed);
        }
        report.push(name, "landmark_distance", &overall(rows));
    }
    latencies.sort_by(f64::total_cmp);
    report.push("GM+IM", "latency_ms_median", &[latencies[latencies.len() / 2]]);
    report
        .notes
        .push("distances are measured against subject landmarks normalised into the robot's ranges".into());
    report.notes.push(format!("landmarks clamped during normalisation: {clamped}"));
    Ok(report)
}
