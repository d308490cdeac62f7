//! Command-line front end.
//!
//! Every command writes its outputs under `--out` with fixed file names and
//! a `config.echo.json` holding the effective parameters. `replay` re-runs a
//! command from such an echo file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::classifier::{load_model, save_model, TrainConfig};
use crate::error::{Error, Result};
use crate::evaluation::{
    evaluate_model, evaluate_segmentation, load_manifest, segmentation_model_id, sweep_k, train_on_set, ClassFolders,
    DatasetLayout, DatasetManifest, EvalReport, EvalSet, SweepRow,
};
use crate::imaging::{load_image, load_mask};
use crate::segmentation::{
    build_reference_signature, segment_and_classify, Colorspace, ReferenceSignature, SegmentConfig,
    DEFAULT_DECISION_THRESHOLD, DEFAULT_REJECT_THRESHOLD,
};

pub const CONFIG_ECHO: &str = "config.echo.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const MASK_PNG: &str = "mask.png";
pub const REFERENCE_JSON: &str = "reference.json";
pub const MODEL_BIN: &str = "model.bin";
pub const LOSS_CSV: &str = "loss.csv";

#[derive(Debug, Parser)]
#[command(name = "floodlens", version, about = "Flood detection in aerial imagery")]
pub struct Cli {
    /// Worker threads for per-image work (0 = one per core).
    #[arg(long, global = true, env = "FLOODLENS_THREADS", default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Build a water-texture reference signature from images and water masks.
    BuildReference(BuildReferenceArgs),
    /// Segment one image and decide whether it shows a flood.
    Segment(SegmentArgs),
    /// Train the LBP classifier on a labelled dataset.
    Train(TrainArgs),
    /// Score a dataset with the segmentation detector or a trained classifier.
    Evaluate(EvaluateArgs),
    /// Grid over k and colorspace for the segmentation detector.
    Sweep(SweepArgs),
    /// Re-run a command from its config echo file.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Switch {
    On,
    Off,
}

impl Switch {
    fn is_on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    Segmentation,
    Mlp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutArg {
    FolderPerClass,
    ImagePlusMask,
}

impl From<LayoutArg> for DatasetLayout {
    fn from(l: LayoutArg) -> Self {
        match l {
            LayoutArg::FolderPerClass => DatasetLayout::FolderPerClass,
            LayoutArg::ImagePlusMask => DatasetLayout::ImagePlusMask,
        }
    }
}

fn parse_colorspace(s: &str) -> std::result::Result<Colorspace, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BuildReferenceArgs {
    /// Image files or directories of images.
    #[arg(long, num_args = 1.., required = true)]
    pub images: Vec<PathBuf>,
    /// Mask files or directories; paired with images by file stem.
    #[arg(long, num_args = 1.., required = true)]
    pub masks: Vec<PathBuf>,
    /// Mask values that mark water.
    #[arg(long, value_delimiter = ',', default_value = "255")]
    pub water_values: Vec<u8>,
    /// Provenance note stored in the signature.
    #[arg(long)]
    pub note: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Segmentation parameters shared by `segment`, `evaluate` and `sweep`.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SegmentOptions {
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value = "lab", value_parser = parse_colorspace)]
    pub colorspace: Colorspace,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub texture: Switch,
    /// Water fraction above which an image is flooded.
    #[arg(long, default_value_t = DEFAULT_DECISION_THRESHOLD)]
    pub threshold: f64,
    /// Chi-square distance above which no cluster counts as water.
    #[arg(long, default_value_t = DEFAULT_REJECT_THRESHOLD)]
    pub reject_threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SegmentOptions {
    pub fn config(&self) -> SegmentConfig {
        SegmentConfig {
            k: self.k,
            seed: self.seed,
            use_texture: self.texture.is_on(),
            colorspace: self.colorspace,
            decision_threshold: self.threshold,
            reject_threshold: self.reject_threshold,
            ..SegmentConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SegmentArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Reference signature written by `build-reference`.
    #[arg(long)]
    pub reference: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub options: SegmentOptions,
    #[arg(long)]
    pub out: PathBuf,
}

/// Dataset selection: a JSON manifest or a dataset root directory.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DatasetArgs {
    /// Manifest JSON file, or a dataset root to scan.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Layout used when `--manifest` is a directory.
    #[arg(long, value_enum, default_value_t = LayoutArg::FolderPerClass)]
    pub layout: LayoutArg,
    /// Mask values counted as water when deriving labels from masks.
    #[arg(long, value_delimiter = ',', default_value = "255")]
    pub water_values: Vec<u8>,
    #[arg(long, default_value = "flooded")]
    pub flooded_dir: String,
    #[arg(long, default_value = "normal")]
    pub normal_dir: String,
}

impl DatasetArgs {
    pub fn load(&self) -> Result<DatasetManifest> {
        if self.manifest.is_dir() {
            let folders = ClassFolders {
                flooded: self.flooded_dir.clone(),
                normal: self.normal_dir.clone(),
            };
            load_manifest(&self.manifest, self.layout.into(), &self.water_values, &folders)
        } else {
            DatasetManifest::load(&self.manifest)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dataset: DatasetArgs,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    pub lr: f64,
    #[arg(long, default_value_t = 16)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.2)]
    pub dropout: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gradient-norm clipping threshold; 0 disables clipping.
    #[arg(long, default_value_t = 5.0)]
    pub max_grad_norm: f64,
    #[arg(long)]
    pub out: PathBuf,
}

impl TrainArgs {
    pub fn config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.lr,
            epochs: self.epochs,
            batch_size: self.batch,
            dropout_rate: self.dropout,
            seed: self.seed,
            max_grad_norm: (self.max_grad_norm != 0.0).then_some(self.max_grad_norm),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvaluateArgs {
    #[arg(long, value_enum, default_value_t = EvalMode::Segmentation)]
    pub mode: EvalMode,
    #[command(flatten)]
    #[serde(flatten)]
    pub dataset: DatasetArgs,
    /// Reference signature (segmentation mode).
    #[arg(long, required_if_eq("mode", "segmentation"))]
    pub reference: Option<PathBuf>,
    /// Model file (mlp mode).
    #[arg(long, required_if_eq("mode", "mlp"))]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub options: SegmentOptions,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dataset: DatasetArgs,
    #[arg(long)]
    pub reference: PathBuf,
    #[arg(long = "k", value_delimiter = ',', default_value = "3,4")]
    pub k_values: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "lab,rgb", value_parser = parse_colorspace)]
    pub colorspaces: Vec<Colorspace>,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub texture: Switch,
    #[arg(long, default_value_t = DEFAULT_DECISION_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = DEFAULT_REJECT_THRESHOLD)]
    pub reject_threshold: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A `config.echo.json` written by an earlier run.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to the one recorded in the echo.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Per-image record written by `segment`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub path: String,
    pub k: usize,
    pub colorspace: Colorspace,
    pub feature_dim: usize,
    pub water_segment: Option<usize>,
    pub water_fraction: f64,
    /// Per-cluster distance to the reference; `null` for an empty cluster.
    pub distances: Vec<Option<f64>>,
    pub decision: crate::FloodLabel,
}

#[derive(Serialize)]
struct SweepReport<'a> {
    rows: Vec<&'a SweepRow>,
    reports: Vec<&'a EvalReport>,
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn prepare_out(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

fn write_echo(out: &Path, command: &Command) -> Result<()> {
    write_file(&out.join(CONFIG_ECHO), serde_json::to_string_pretty(command)? + "\n")
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

fn expand(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| {
                    f.is_file()
                        && f.extension()
                            .and_then(|e| e.to_str())
                            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
                })
                .collect();
            found.sort();
            out.extend(found);
        } else if p.is_file() {
            out.push(p.clone());
        } else {
            return Err(Error::FileNotFound(p.clone()));
        }
    }
    Ok(out)
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Pairs images with masks by stem (a `_lab` mask suffix is accepted).
fn pair_by_stem(images: &[PathBuf], masks: &[PathBuf]) -> Result<Vec<(PathBuf, PathBuf)>> {
    images
        .iter()
        .map(|img| {
            let s = file_stem(img);
            masks
                .iter()
                .find(|m| {
                    let ms = file_stem(m);
                    ms == s || ms.strip_suffix("_lab") == Some(s.as_str())
                })
                .map(|m| (img.clone(), m.clone()))
                .ok_or_else(|| Error::UnpairedImage(img.display().to_string()))
        })
        .collect()
}

pub fn cmd_build_reference(args: &BuildReferenceArgs) -> Result<ReferenceSignature> {
    let pairs = pair_by_stem(&expand(&args.images)?, &expand(&args.masks)?)?;
    if pairs.is_empty() {
        return Err(Error::EmptyReference);
    }
    let mut inputs = Vec::with_capacity(pairs.len());
    for (img_path, mask_path) in &pairs {
        let img = load_image(img_path)?;
        let mask = load_mask(mask_path)?;
        if (mask.width(), mask.height()) != (img.width(), img.height()) {
            return Err(Error::mismatch(
                format!("{}x{} mask for {}", img.width(), img.height(), img_path.display()),
                format!("{}x{}", mask.width(), mask.height()),
            ));
        }
        let interior: Vec<bool> = mask
            .interior(1)
            .data()
            .iter()
            .map(|v| args.water_values.contains(v))
            .collect();
        inputs.push((img, interior));
    }
    let note = args.note.clone().unwrap_or_else(|| {
        let names: Vec<String> = pairs.iter().map(|(i, _)| file_name(i)).collect();
        format!("{} image(s): {}", names.len(), names.join(", "))
    });
    let signature = build_reference_signature(&inputs)?.with_source_note(note);
    prepare_out(&args.out)?;
    signature.save(args.out.join(REFERENCE_JSON))?;
    Ok(signature)
}

pub fn cmd_segment(args: &SegmentArgs) -> Result<SegmentRecord> {
    let reference = ReferenceSignature::load(&args.reference)?;
    let img = load_image(&args.input)?;
    let config = args.options.config();
    let result = segment_and_classify(&img, &reference, &config)?;
    let record = SegmentRecord {
        path: args.input.display().to_string(),
        k: config.k,
        colorspace: config.colorspace,
        feature_dim: result.feature_dim,
        water_segment: result.water_segment,
        water_fraction: result.water_fraction,
        distances: result
            .segment_distances
            .iter()
            .map(|&d| d.is_finite().then_some(d))
            .collect(),
        decision: result.decision,
    };
    prepare_out(&args.out)?;
    result.water_mask().save_png(args.out.join(MASK_PNG))?;
    write_file(&args.out.join(REPORT_JSON), to_json(&record)?)?;
    Ok(record)
}

pub fn cmd_train(args: &TrainArgs) -> Result<Vec<f64>> {
    let cfg = args.config();
    cfg.validate()?;
    let set = EvalSet::from_manifest(&args.dataset.load()?)?;
    let (model, history) = train_on_set(&set, &cfg)?;
    prepare_out(&args.out)?;
    save_model(&model, args.out.join(MODEL_BIN))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["epoch", "loss"])?;
    for (i, loss) in history.iter().enumerate() {
        w.write_record([(i + 1).to_string(), loss.to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Encode(e.to_string()))?;
    write_file(&args.out.join(LOSS_CSV), bytes)?;
    Ok(history)
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<EvalReport> {
    let set = EvalSet::from_manifest(&args.dataset.load()?)?;
    let report = match args.mode {
        EvalMode::Segmentation => {
            let path = args
                .reference
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("segmentation mode needs --reference".into()))?;
            let reference = ReferenceSignature::load(path)?;
            evaluate_segmentation(&set, &reference, &args.options.config())?
        }
        EvalMode::Mlp => {
            let path = args
                .model
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("mlp mode needs --model".into()))?;
            let model = load_model(path)?;
            evaluate_model(&model, &set, format!("mlp:{}", file_name(path)), None)?
        }
    };
    prepare_out(&args.out)?;
    report.write_json(args.out.join(REPORT_JSON))?;
    report.write_csv(args.out.join(REPORT_CSV))?;
    Ok(report)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<Vec<SweepRow>> {
    if args.k_values.is_empty() {
        return Err(Error::InvalidParameter("k list is empty".into()));
    }
    let reference = ReferenceSignature::load(&args.reference)?;
    let set = EvalSet::from_manifest(&args.dataset.load()?)?;
    let base = SegmentConfig {
        seed: args.seed,
        use_texture: args.texture.is_on(),
        decision_threshold: args.threshold,
        reject_threshold: args.reject_threshold,
        ..SegmentConfig::default()
    };
    let cells = sweep_k(&set, &reference, &args.k_values, &args.colorspaces, &base)?;
    for (row, report) in &cells {
        log::info!(
            "{} accuracy {:.4} f1 {:.4}",
            segmentation_model_id(&SegmentConfig { k: row.k, colorspace: row.colorspace, ..base }),
            report.metrics.accuracy,
            report.metrics.f1
        );
    }

    prepare_out(&args.out)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["colorspace", "k", "accuracy", "precision", "recall", "f1"])?;
    for (row, _) in &cells {
        let m = &row.metrics;
        w.write_record([
            row.colorspace.to_string(),
            row.k.to_string(),
            m.accuracy.to_string(),
            m.precision.to_string(),
            m.recall.to_string(),
            m.f1.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Encode(e.to_string()))?;
    write_file(&args.out.join(REPORT_CSV), bytes)?;
    let summary = SweepReport {
        rows: cells.iter().map(|(r, _)| r).collect(),
        reports: cells.iter().map(|(_, r)| r).collect(),
    };
    write_file(&args.out.join(REPORT_JSON), to_json(&summary)?)?;
    Ok(cells.into_iter().map(|(r, _)| r).collect())
}

fn out_dir(command: &Command) -> Option<&Path> {
    match command {
        Command::BuildReference(a) => Some(&a.out),
        Command::Segment(a) => Some(&a.out),
        Command::Train(a) => Some(&a.out),
        Command::Evaluate(a) => Some(&a.out),
        Command::Sweep(a) => Some(&a.out),
        Command::Replay(_) => None,
    }
}

fn set_out(command: &mut Command, out: PathBuf) {
    match command {
        Command::BuildReference(a) => a.out = out,
        Command::Segment(a) => a.out = out,
        Command::Train(a) => a.out = out,
        Command::Evaluate(a) => a.out = out,
        Command::Sweep(a) => a.out = out,
        Command::Replay(_) => {}
    }
}

/// Runs one command and writes its config echo.
pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::BuildReference(a) => cmd_build_reference(a).map(drop)?,
        Command::Segment(a) => cmd_segment(a).map(drop)?,
        Command::Train(a) => cmd_train(a).map(drop)?,
        Command::Evaluate(a) => cmd_evaluate(a).map(drop)?,
        Command::Sweep(a) => cmd_sweep(a).map(drop)?,
        Command::Replay(a) => {
            let text = std::fs::read_to_string(&a.config).map_err(|e| Error::io(&a.config, e))?;
            let mut recorded: Command = serde_json::from_str(&text)?;
            if matches!(recorded, Command::Replay(_)) {
                return Err(Error::InvalidParameter("cannot replay a replay".into()));
            }
            if let Some(out) = &a.out {
                set_out(&mut recorded, out.clone());
            }
            return execute(&recorded);
        }
    }
    if let Some(out) = out_dir(command) {
        write_echo(out, command)?;
    }
    Ok(())
}

/// Entry point shared by the binary and tests.
pub fn run(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| execute(&cli.command))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    run(cli)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_mirror_headline_configuration() {
        let cli = Cli::try_parse_from(["floodlens", "segment", "--input", "a.png", "--reference", "r.json", "--out", "o"]).unwrap();
        let Command::Segment(a) = cli.command else { panic!() };
        assert_eq!(a.options.k, 3);
        assert_eq!(a.options.colorspace, Colorspace::Lab);
        assert_eq!(a.options.texture, Switch::On);
        assert_eq!(a.options.threshold, 0.25);
    }

    #[test]
    fn echo_round_trips_through_serde() {
        let cli = Cli::try_parse_from([
            "floodlens", "sweep", "--manifest", "m.json", "--reference", "r.json", "--k", "2,5", "--colorspaces", "rgb", "--out", "o",
        ])
        .unwrap();
        let json = serde_json::to_string(&cli.command).unwrap();
        assert!(json.contains("\"command\":\"sweep\""));
        let back: Command = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cli.command);
        let Command::Sweep(a) = back else { panic!() };
        assert_eq!(a.k_values, [2, 5]);
        assert_eq!(a.colorspaces, [Colorspace::Rgb]);
    }

    #[test]
    fn evaluate_requires_matching_input() {
        assert!(Cli::try_parse_from(["floodlens", "evaluate", "--mode", "mlp", "--manifest", "m", "--out", "o"]).is_err());
        // clap ignores defaulted values in required_if_eq, so the command checks at run time
        let cli = Cli::try_parse_from(["floodlens", "evaluate", "--manifest", "m", "--out", "o"]).unwrap();
        let Command::Evaluate(a) = cli.command else { panic!() };
        assert!(a.reference.is_none());
    }

    #[test]
    fn stem_pairing() {
        let imgs = [PathBuf::from("i/a.jpg"), PathBuf::from("i/b.jpg")];
        let masks = [PathBuf::from("m/b_lab.png"), PathBuf::from("m/a.png")];
        let pairs = pair_by_stem(&imgs, &masks).unwrap();
        assert_eq!(pairs[0].1, PathBuf::from("m/a.png"));
        assert_eq!(pairs[1].1, PathBuf::from("m/b_lab.png"));
        assert!(matches!(pair_by_stem(&imgs, &masks[..1]), Err(Error::UnpairedImage(_))));
    }
}
