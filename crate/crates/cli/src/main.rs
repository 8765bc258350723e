use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mimicface::babble::{self, BabbleDataset};
use mimicface::baselines;
use mimicface::harness::{self, EvalReport, ExecutionSetup, InverseModels, PipelineModels};
use mimicface::landmarks::{LandmarkRanges, LandmarkSet};
use mimicface::mimicry::{
    self, GenerativeConfig, GenerativeModel, InverseConfig, InverseInput, InverseModel, TrainConfig,
};
use mimicface::simface::{static_self_image, FaceRig};

const ROBOT_RANGES_FILE: &str = "robot_ranges.csv";

#[derive(Parser, Debug)]
#[command(name = "mimicface", version, about = "Self-supervised facial mimicry on a simulated face")]
struct Cli {
    /// JSON object of flag values for the subcommand; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Collect a motor-babbling dataset on the robot rig.
    Babble(BabbleArgs),
    /// Train the generative model.
    TrainGen(TrainGenArgs),
    /// Train the inverse model.
    TrainInv(TrainInvArgs),
    /// Build RI and RI-100 and train the landmark-to-motor baseline.
    TrainBaselines(TrainBaselinesArgs),
    /// Generative model against the random-sample baseline.
    EvalGen(EvalGenArgs),
    /// Inverse model against RI and RI-100.
    EvalInv(EvalInvArgs),
    /// The two-stage chain against every alternative.
    EvalPipeline(EvalPipelineArgs),
    /// Imitation of pseudo-human subjects executed on the robot.
    EvalExec(EvalExecArgs),
    /// Motor command for one landmark file.
    Infer(InferArgs),
    /// CSV tables and PNG plots from saved evaluation reports.
    Report(ReportArgs),
}

#[derive(Args, Debug, Serialize)]
struct BabbleArgs {
    #[arg(long, default_value_t = 4000)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Train, validation and test sizes; default 7/8, 1/16, 1/16 of the steps.
    #[arg(long, value_delimiter = ',')]
    split: Option<Vec<usize>>,
    /// Robot rig file; the built-in rig when absent.
    #[arg(long)]
    rig: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args, Debug, Serialize)]
struct TrainArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
}

impl TrainArgs {
    fn apply(&self, c: &mut TrainConfig) {
        c.seed = self.seed.unwrap_or(c.seed);
        c.epochs = self.epochs.unwrap_or(c.epochs);
        c.lr = self.lr.unwrap_or(c.lr);
        c.batch = self.batch.unwrap_or(c.batch);
    }
}

#[derive(Args, Debug, Serialize)]
struct TrainGenArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    train: TrainArgs,
}

#[derive(Args, Debug, Serialize)]
struct TrainInvArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    train: TrainArgs,
}

#[derive(Args, Debug, Serialize)]
struct TrainBaselinesArgs {
    #[arg(long)]
    data: PathBuf,
    /// Directory receiving `ri/`, `ri100/` and `l2m/`.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    train: TrainArgs,
}

#[derive(Args, Debug, Serialize)]
struct SeedsArgs {
    /// One seed per checkpoint, in the order the checkpoints are given.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
}

#[derive(Args, Debug, Serialize)]
struct EvalGenArgs {
    #[arg(long)]
    data: PathBuf,
    /// Generative checkpoint; repeat once per seed.
    #[arg(long = "gen", required = true)]
    gen: Vec<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    seeds: SeedsArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct EvalInvArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long = "inv", required = true)]
    inv: Vec<PathBuf>,
    /// Output directory of `train-baselines`; repeat once per seed.
    #[arg(long = "baselines", required = true)]
    baselines: Vec<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    seeds: SeedsArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct EvalPipelineArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long = "gen", required = true)]
    gen: Vec<PathBuf>,
    #[arg(long = "inv", required = true)]
    inv: Vec<PathBuf>,
    #[arg(long = "baselines", required = true)]
    baselines: Vec<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    seeds: SeedsArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct EvalExecArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long = "gen", required = true)]
    gen: Vec<PathBuf>,
    #[arg(long = "inv", required = true)]
    inv: Vec<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    seeds: SeedsArgs,
    #[arg(long, default_value_t = harness::DEFAULT_SUBJECTS)]
    subjects: usize,
    #[arg(long, default_value_t = harness::DEFAULT_FRAMES)]
    frames: usize,
    #[arg(long, default_value_t = harness::SUBJECT_BABBLE_FRAMES)]
    subject_babble: usize,
    #[arg(long, default_value_t = 0.5)]
    max_distortion: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct InferArgs {
    /// Landmark CSV (`index,x,y,confidence`).
    #[arg(long)]
    landmarks: PathBuf,
    /// Range CSV of the face the landmarks come from.
    #[arg(long)]
    human_ranges: PathBuf,
    /// Robot range CSV; defaults to the one stored with the generative model.
    #[arg(long)]
    robot_ranges: Option<PathBuf>,
    #[arg(long = "gen")]
    gen: PathBuf,
    #[arg(long = "inv")]
    inv: PathBuf,
    /// Robot rig file; the built-in rig when absent.
    #[arg(long)]
    rig: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ReportArgs {
    /// Directory holding evaluation reports (`*.json`).
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "csv,png")]
    format: Vec<String>,
    /// Output directory; the input directory when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Dataset and checkpoint disagree about the data they belong to.
#[derive(Debug)]
struct HashMismatch(String);

impl std::fmt::Display for HashMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for HashMismatch {}

fn error_kind(e: &anyhow::Error) -> &'static str {
    use mimicface::Error as E;
    if e.downcast_ref::<HashMismatch>().is_some() {
        return "hash_mismatch";
    }
    match e.chain().find_map(|c| c.downcast_ref::<E>()) {
        Some(E::Dimension(_)) => "dimension",
        Some(E::Range(_)) => "range",
        Some(E::Argument(_)) => "argument",
        Some(E::DegenerateRange { .. }) => "degenerate_range",
        Some(E::Numeric { .. }) => "numeric",
        Some(E::State(_)) => "state",
        Some(E::Training(_)) => "training",
        Some(E::Checksum { .. }) => "checksum",
        Some(E::RigMismatch { .. }) => "rig_mismatch",
        Some(E::Format { .. }) => "format",
        Some(E::Io { .. }) => "io",
        None => "error",
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let line = serde_json::json!({ "error": kind, "message": message.replace('\n', " ") });
    eprintln!("{line}");
    ExitCode::from(code)
}

fn config_path(argv: &[String]) -> Option<String> {
    argv.iter().enumerate().find_map(|(i, a)| match a.strip_prefix("--config") {
        Some("") => argv.get(i + 1).cloned(),
        Some(rest) => rest.strip_prefix('=').map(str::to_string),
        None => None,
    })
}

/// Turns a config JSON object into flags, skipping those given explicitly.
fn config_flags(path: &Path, explicit: &[&str]) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| anyhow!(mimicface::Error::Format {
            what: "config".into(),
            detail: e.to_string(),
        }))?;
    let obj = value
        .as_object()
        .ok_or_else(|| anyhow!(mimicface::Error::Argument("config file must hold a JSON object".into())))?;
    let mut out = Vec::new();
    for (key, v) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        if explicit.contains(&flag.as_str()) {
            continue;
        }
        let scalars = match v {
            serde_json::Value::Array(items) => items.clone(),
            other => vec![other.clone()],
        };
        for s in scalars {
            match s {
                serde_json::Value::Bool(true) => out.push(flag.clone()),
                serde_json::Value::Bool(false) | serde_json::Value::Null => {}
                serde_json::Value::String(t) => out.extend([flag.clone(), t]),
                other => out.extend([flag.clone(), other.to_string()]),
            }
        }
    }
    Ok(out)
}

/// Reparses with the config file's flags spliced in after the subcommand.
fn parse() -> std::result::Result<Cli, ExitCode> {
    let argv: Vec<String> = std::env::args().collect();
    let Some(path) = config_path(&argv) else {
        return Cli::try_parse_from(&argv).map_err(clap_exit);
    };
    let explicit: Vec<&str> = argv.iter().filter(|a| a.starts_with("--")).map(|a| a.split('=').next().unwrap()).collect();
    let extra = config_flags(Path::new(&path), &explicit).map_err(|e| fail(error_kind(&e), &format!("{e:#}"), 1))?;
    let sub = argv
        .iter()
        .position(|a| !a.starts_with('-') && a.contains(|c: char| c.is_ascii_lowercase()) && is_subcommand(a))
        .ok_or_else(|| fail("usage", "no subcommand", 2))?;
    let mut merged = argv[..=sub].to_vec();
    merged.extend(extra);
    merged.extend_from_slice(&argv[sub + 1..]);
    Cli::try_parse_from(&merged).map_err(clap_exit)
}

fn is_subcommand(a: &str) -> bool {
    use clap::CommandFactory;
    Cli::command().get_subcommands().any(|s| s.get_name() == a)
}

fn clap_exit(e: clap::Error) -> ExitCode {
    use clap::error::ErrorKind;
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
            let _ = e.print();
            ExitCode::SUCCESS
        }
        _ => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            fail("usage", first.trim_start_matches("error: "), 2)
        }
    }
}

fn main() -> ExitCode {
    let cli = match parse() {
        Ok(c) => c,
        Err(code) => return code,
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(error_kind(&e), &format!("{e:#}"), 1),
    }
}

fn run(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Babble(a) => babble_cmd(a, cmd),
        Command::TrainGen(a) => train_gen(a, cmd),
        Command::TrainInv(a) => train_inv(a, cmd),
        Command::TrainBaselines(a) => train_baselines(a, cmd),
        Command::EvalGen(a) => eval_gen(a, cmd),
        Command::EvalInv(a) => eval_inv(a, cmd),
        Command::EvalPipeline(a) => eval_pipeline(a, cmd),
        Command::EvalExec(a) => eval_exec(a, cmd),
        Command::Infer(a) => infer(a),
        Command::Report(a) => report(a, cmd),
    }
}

/// Canonical snapshot of the resolved command plus provenance hashes.
fn snapshot(dir: &Path, cmd: &Command, extra: serde_json::Value) -> Result<PathBuf> {
    let doc = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "invocation": cmd,
        "provenance": extra,
    });
    let path = harness::write_config_snapshot(dir, &doc)?;
    println!("config: {}", path.display());
    Ok(path)
}

fn load_rig(path: Option<&Path>) -> Result<FaceRig> {
    Ok(match path {
        Some(p) => FaceRig::load(p)?,
        None => FaceRig::standard(),
    })
}

fn load_data(dir: &Path) -> Result<(BabbleDataset, FaceRig)> {
    Ok(babble::load(dir).with_context(|| format!("loading dataset {}", dir.display()))?)
}

fn babble_cmd(a: &BabbleArgs, cmd: &Command) -> Result<()> {
    let rig = load_rig(a.rig.as_deref())?;
    let (tr, va, te) = match a.split.as_deref() {
        Some([tr, va, te]) => (*tr, *va, *te),
        Some(other) => bail!(mimicface::Error::Argument(format!(
            "--split takes train,val,test sizes, got {} values",
            other.len()
        ))),
        None => {
            let va = a.steps / 16;
            (a.steps - 2 * va, va, va)
        }
    };
    let ds = babble::collect(&rig, a.steps, a.seed, a.workers.max(1))?;
    let ds = babble::split(&ds, tr, va, te)?;
    babble::save(&ds, &rig, &a.out)?;
    let hash = ds.content_hash();
    snapshot(&a.out, cmd, serde_json::json!({ "dataset_hash": hash, "rig_id": rig.rig_id() }))?;
    println!("dataset_hash: {hash}");
    println!("dataset: {}", a.out.display());
    Ok(())
}

fn train_gen(a: &TrainGenArgs, cmd: &Command) -> Result<()> {
    let (ds, rig) = load_data(&a.data)?;
    let mut config = GenerativeConfig::default();
    a.train.apply(&mut config.train);
    let gm = mimicry::train_generative(&ds, &rig, &config)?;
    gm.save(&a.out)?;
    let ranges_path = a.out.join(ROBOT_RANGES_FILE);
    std::fs::write(&ranges_path, ds.train_ranges()?.to_csv())
        .with_context(|| format!("writing {}", ranges_path.display()))?;
    let hash = gm.checkpoint_hash();
    snapshot(
        &a.out,
        cmd,
        serde_json::json!({ "dataset_hash": ds.content_hash(), "checkpoint_hash": hash, "config": config }),
    )?;
    println!("best_epoch: {}", gm.best_epoch());
    println!("checkpoint_hash: {hash}");
    println!("checkpoint: {}", a.out.display());
    Ok(())
}

fn train_inv(a: &TrainInvArgs, cmd: &Command) -> Result<()> {
    let (ds, rig) = load_data(&a.data)?;
    let mut config = InverseConfig::default();
    a.train.apply(&mut config.train);
    let im = mimicry::train_inverse(&ds, &rig, &config)?;
    im.save(&a.out)?;
    let hash = im.checkpoint_hash();
    snapshot(
        &a.out,
        cmd,
        serde_json::json!({ "dataset_hash": ds.content_hash(), "checkpoint_hash": hash, "config": config }),
    )?;
    println!("best_epoch: {}", im.best_epoch().unwrap_or(0));
    println!("checkpoint_hash: {hash}");
    println!("checkpoint: {}", a.out.display());
    Ok(())
}

fn train_baselines(a: &TrainBaselinesArgs, cmd: &Command) -> Result<()> {
    let (ds, rig) = load_data(&a.data)?;
    let mut inv = InverseConfig::default();
    a.train.apply(&mut inv.train);
    let mut l2m = baselines::landmark_to_motor_config(inv.train.seed);
    a.train.apply(&mut l2m.train);
    let ri = baselines::make_ri(&rig, &inv)?;
    let ri100 = baselines::make_ri100(&ds, &rig, &inv)?;
    let l2m_model = baselines::train_landmark_to_motor(&ds, &rig, &l2m)?;
    let mut hashes = serde_json::Map::new();
    for (name, m) in [("ri", &ri), ("ri100", &ri100), ("l2m", &l2m_model)] {
        let dir = a.out.join(name);
        m.save(&dir)?;
        hashes.insert(name.into(), m.checkpoint_hash().into());
        println!("{name}: {}", dir.display());
    }
    snapshot(
        &a.out,
        cmd,
        serde_json::json!({
            "dataset_hash": ds.content_hash(),
            "checkpoint_hashes": hashes,
            "inverse_config": inv,
            "landmark_to_motor_config": l2m,
        }),
    )?;
    Ok(())
}

fn check_trained_on(what: &Path, model_hash: Option<&str>, ds: &BabbleDataset) -> Result<()> {
    if let Some(h) = model_hash {
        let expected = ds.content_hash();
        if h != expected {
            bail!(HashMismatch(format!(
                "{} was trained on dataset {h}, evaluation dataset is {expected}",
                what.display()
            )));
        }
    }
    Ok(())
}

fn load_gms(paths: &[PathBuf], ds: &BabbleDataset) -> Result<Vec<GenerativeModel>> {
    paths
        .iter()
        .map(|p| {
            let m = GenerativeModel::load(p).with_context(|| format!("loading {}", p.display()))?;
            check_trained_on(p, Some(m.dataset_hash()), ds)?;
            Ok(m)
        })
        .collect()
}

fn load_inverse(path: &Path, ds: &BabbleDataset) -> Result<InverseModel> {
    let m = InverseModel::load(path).with_context(|| format!("loading {}", path.display()))?;
    check_trained_on(path, m.dataset_hash(), ds)?;
    Ok(m)
}

fn load_ims(paths: &[PathBuf], ds: &BabbleDataset) -> Result<Vec<InverseModel>> {
    paths.iter().map(|p| load_inverse(p, ds)).collect()
}

struct BaselineSet {
    ri: Vec<InverseModel>,
    ri100: Vec<InverseModel>,
    l2m: Vec<InverseModel>,
}

fn load_baselines(dirs: &[PathBuf], ds: &BabbleDataset) -> Result<BaselineSet> {
    let mut set = BaselineSet {
        ri: Vec::new(),
        ri100: Vec::new(),
        l2m: Vec::new(),
    };
    for d in dirs {
        set.ri.push(load_inverse(&d.join("ri"), ds)?);
        set.ri100.push(load_inverse(&d.join("ri100"), ds)?);
        let l2m = load_inverse(&d.join("l2m"), ds)?;
        if l2m.input() != InverseInput::Mask {
            bail!(mimicface::Error::Argument(format!("{} is not a mask-input model", d.join("l2m").display())));
        }
        set.l2m.push(l2m);
    }
    Ok(set)
}

fn finish(report: &EvalReport, out: &Path, cmd: &Command) -> Result<()> {
    let path = report.save(out)?;
    let csv = out.join(format!("{}.csv", report.experiment));
    std::fs::write(&csv, report.to_csv()).with_context(|| format!("writing {}", csv.display()))?;
    snapshot(
        out,
        cmd,
        serde_json::json!({ "dataset_hash": report.dataset_hash, "report": report.experiment }),
    )?;
    print!("{}", report.to_csv());
    println!("report: {}", path.display());
    println!("table: {}", csv.display());
    Ok(())
}

fn eval_gen(a: &EvalGenArgs, cmd: &Command) -> Result<()> {
    let (ds, rig) = load_data(&a.data)?;
    let gms = load_gms(&a.gen, &ds)?;
    let report = harness::eval_generative(&gms, &ds, &rig, &a.seeds.seeds)?;
    finish(&report, &a.out, cmd)
}

fn eval_inv(a: &EvalInvArgs, cmd: &Command) -> Result<()> {
    let (ds, _) = load_data(&a.data)?;
    let ims = load_ims(&a.inv, &ds)?;
    let b = load_baselines(&a.baselines, &ds)?;
    let models = InverseModels {
        im: &ims,
        ri: &b.ri,
        ri100: &b.ri100,
    };
    let report = harness::eval_inverse(&models, &ds, &a.seeds.seeds)?;
    finish(&report, &a.out, cmd)
}

fn eval_pipeline(a: &EvalPipelineArgs, cmd: &Command) -> Result<()> {
    let (ds, rig) = load_data(&a.data)?;
    let gms = load_gms(&a.gen, &ds)?;
    let ims = load_ims(&a.inv, &ds)?;
    let b = load_baselines(&a.baselines, &ds)?;
    let models = PipelineModels {
        gm: &gms,
        im: &ims,
        ri: &b.ri,
        ri100: &b.ri100,
        landmark_to_motor: &b.l2m,
    };
    let report = harness::eval_pipeline(&models, &ds, &rig, &a.seeds.seeds)?;
    finish(&report, &a.out, cmd)
}

fn eval_exec(a: &EvalExecArgs, cmd: &Command) -> Result<()> {
    let (ds, rig) = load_data(&a.data)?;
    let gms = load_gms(&a.gen, &ds)?;
    let ims = load_ims(&a.inv, &ds)?;
    let setup = ExecutionSetup {
        subjects: a.subjects,
        frames: a.frames,
        subject_babble: a.subject_babble,
        max_distortion: a.max_distortion,
    };
    let report = harness::eval_execution(&gms, &ims, &ds, &rig, &setup, &a.seeds.seeds)?;
    finish(&report, &a.out, cmd)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| anyhow!(mimicface::Error::Io { path: path.into(), source: e }))
}

fn infer(a: &InferArgs) -> Result<()> {
    let rig = load_rig(a.rig.as_deref())?;
    let gm = GenerativeModel::load(&a.gen).with_context(|| format!("loading {}", a.gen.display()))?;
    let im = InverseModel::load(&a.inv).with_context(|| format!("loading {}", a.inv.display()))?;
    if gm.rig_id() != rig.rig_id() {
        bail!(mimicface::Error::RigMismatch {
            expected: rig.rig_id().into(),
            found: gm.rig_id().into(),
        });
    }
    let landmarks = LandmarkSet::from_csv(&read_text(&a.landmarks)?)?;
    let human = LandmarkRanges::from_csv(&read_text(&a.human_ranges)?)?;
    let robot_path = a.robot_ranges.clone().unwrap_or_else(|| a.gen.join(ROBOT_RANGES_FILE));
    let robot = LandmarkRanges::from_csv(&read_text(&robot_path)?)?;
    let si = static_self_image(&rig);
    let out = mimicry::pipeline_infer(&gm, &im, &landmarks, &human, &robot, &si)?;
    let values: Vec<String> = out.prediction.command.values().iter().map(|v| v.to_string()).collect();
    println!("{}", values.join(","));
    eprintln!("latency_ms: {:.3}", out.latency.as_secs_f64() * 1e3);
    Ok(())
}

/// Bars for one figure: every method of every subject for the execution
/// experiment, the per-method means otherwise.
fn figure_bars(report: &EvalReport, metric: &str) -> Vec<(String, f64, f64)> {
    let subject_rows: Vec<_> = report.rows.iter().filter(|r| r.metric.starts_with(&format!("{metric}_s"))).collect();
    let rows: Vec<_> = if subject_rows.is_empty() {
        report.rows.iter().filter(|r| r.metric == metric).collect()
    } else {
        subject_rows
    };
    rows.iter()
        .map(|r| {
            let suffix = r.metric.strip_prefix(metric).unwrap_or("").trim_start_matches('_');
            let label = if suffix.is_empty() { r.method.clone() } else { format!("{} {suffix}", r.method) };
            (label, r.mean, r.stderr)
        })
        .collect()
}

fn report(a: &ReportArgs, cmd: &Command) -> Result<()> {
    let out = a.out.clone().unwrap_or_else(|| a.input.clone());
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let reports = EvalReport::load_dir(&a.input)?;
    if reports.is_empty() {
        bail!(mimicface::Error::Argument(format!("no reports in {}", a.input.display())));
    }
    for f in &a.format {
        if f != "csv" && f != "png" {
            bail!(mimicface::Error::Argument(format!("unknown format {f:?}; use csv and/or png")));
        }
    }
    let mut written = Vec::new();
    for r in &reports {
        if a.format.iter().any(|f| f == "csv") {
            let p = out.join(format!("{}.csv", r.experiment));
            std::fs::write(&p, r.to_csv()).with_context(|| format!("writing {}", p.display()))?;
            written.push(p);
        }
        // the execution experiment is the figure analog; tables get no plot
        if r.experiment == "execution" && a.format.iter().any(|f| f == "png") {
            let p = out.join(format!("{}.png", r.experiment));
            let bars = figure_bars(r, "landmark_distance");
            harness::bar_chart_png("executed landmark distance per subject", &bars, &p)?;
            written.push(p);
        }
    }
    snapshot(&out, cmd, serde_json::json!({ "reports": reports.iter().map(|r| &r.experiment).collect::<Vec<_>>() }))?;
    for p in written {
        println!("wrote: {}", p.display());
    }
    Ok(())
}
