mod eval;
mod ingest;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aed_core::metrics::roc;
use aed_core::pipeline::{
    frame_scores_csv, patch_scores_csv, score_frames, score_patches, train_with_report, TILE_LABEL_CSV_HEADER,
};
use aed_core::synth::generate;
use aed_core::{AedModel, AnomalyStyle, EvalMode, PipelineConfig, Preset, SynthSpec};
use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aedpipe", version, about = "Optical-flow PCAnet + kernel PCA anomaly detector")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model on a directory of normal frames
    Train(TrainArgs),
    /// Score a frame directory with a trained model
    Score(ScoreArgs),
    /// ROC, AUC and EER from a score CSV and a label CSV
    Eval(EvalArgs),
    /// Render a synthetic crowd clip with ground-truth labels
    Synth(SynthArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Directory of training frames, read in file-name order
    #[arg(long, required_unless_present = "show_config")]
    data: Option<PathBuf>,
    /// Where to write the model container
    #[arg(long, required_unless_present = "show_config")]
    out: Option<PathBuf>,
    /// Starting values before --config and --set
    #[arg(long, value_parser = Preset::NAMES)]
    preset: Option<String>,
    /// `key = value` file applied over the preset
    #[arg(long)]
    config: Option<PathBuf>,
    /// One `key=value` override; repeatable, wins over --config
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the effective configuration and exit
    #[arg(long)]
    show_config: bool,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, required_unless_present = "show_config")]
    data: Option<PathBuf>,
    /// Score CSV; tile rows when the model is pixel level
    #[arg(long, required_unless_present = "show_config")]
    out: Option<PathBuf>,
    /// Print the configuration stored in the model and exit
    #[arg(long)]
    show_config: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// CSV written by `score`
    #[arg(long)]
    scores: PathBuf,
    /// `frame_index,label` or `frame_index,tile_row,tile_col,label`
    #[arg(long)]
    labels: PathBuf,
    /// ROC points as `threshold,fpr,tpr`
    #[arg(long)]
    roc_out: PathBuf,
    /// Also write the `auc,eer` summary here
    #[arg(long)]
    summary_out: Option<PathBuf>,
    /// Keep skipped rows as score-0 negatives instead of dropping them
    #[arg(long)]
    skipped_as_negative: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for frame_NNNN.png and labels.csv
    #[arg(long, required_unless_present = "show_config")]
    out: Option<PathBuf>,
    /// Spec file of `key = value` lines
    #[arg(long, alias = "spec")]
    config: Option<PathBuf>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Overrides the spec seed
    #[arg(long)]
    seed: Option<u64>,
    /// Tile size for tile_labels.csv, written for intruder clips
    #[arg(long, default_value_t = 12)]
    patch_h: usize,
    #[arg(long, default_value_t = 16)]
    patch_w: usize,
    /// Print the effective spec and exit
    #[arg(long)]
    show_config: bool,
}

/// Exit 1 for bad invocations or config, 2 for data and model failures.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait Classify<T> {
    fn usage(self) -> Result<T, Failure>;
    fn data(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: 1, error: e.into() })
    }

    fn data(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: 2, error: e.into() })
    }
}

fn split_kv(item: &str) -> anyhow::Result<(&str, &str)> {
    item.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got {item:?}"))
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn effective_config(args: &TrainArgs) -> anyhow::Result<PipelineConfig> {
    let mut cfg = match &args.preset {
        Some(name) => name.parse::<Preset>()?.config(),
        None => PipelineConfig::default(),
    };
    if let Some(path) = &args.config {
        cfg.apply_text(&read_text(path)?)
            .with_context(|| format!("in {}", path.display()))?;
    }
    for item in &args.set {
        let (k, v) = split_kv(item)?;
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn train(args: TrainArgs) -> Result<(), Failure> {
    let cfg = effective_config(&args).usage()?;
    if args.show_config {
        print!("{}", cfg.to_text());
        return Ok(());
    }
    let (data, out) = (args.data.expect("required by clap"), args.out.expect("required by clap"));
    let frames = ingest::load_frames(&data).context("loading training frames").data()?;
    let (model, report) = train_with_report(&frames, &cfg).context("training").data()?;
    model.save(&out).with_context(|| format!("writing model {}", out.display())).data()?;
    println!("kept frames: {} of {} flow pairs", report.kept_pairs.len(), report.flow_pairs);
    println!("training samples: {}", report.training_samples);
    println!("feature dimension: {}", report.feature_dim);
    println!("kpca rank: {}", report.rank);
    println!("threshold: {}", report.threshold);
    Ok(())
}

fn score(args: ScoreArgs) -> Result<(), Failure> {
    let model = AedModel::load(&args.model)
        .with_context(|| format!("loading model {}", args.model.display()))
        .data()?;
    if args.show_config {
        print!("{}", model.config.to_text());
        return Ok(());
    }
    let (data, out) = (args.data.expect("required by clap"), args.out.expect("required by clap"));
    let frames = ingest::load_frames(&data).context("loading frames").data()?;
    let threshold = model.threshold();
    let (csv, anomalies, skipped) = match model.config.eval_mode {
        EvalMode::FrameLevel => {
            let s = score_frames(&model, &frames).context("scoring").data()?;
            let anomalies = s.iter().filter(|f| f.decision == aed_core::Decision::Anomaly).count();
            let skipped = s.iter().filter(|f| f.gated_out).count();
            (frame_scores_csv(&s, threshold), anomalies, skipped)
        }
        EvalMode::PixelLevel => {
            let s = score_patches(&model, &frames).context("scoring").data()?;
            let anomalies = s.iter().filter(|f| f.decision == aed_core::Decision::Anomaly).count();
            let skipped = s.iter().filter(|f| f.frame_score.is_none()).count();
            (patch_scores_csv(&s, threshold), anomalies, skipped)
        }
    };
    write_file(&out, csv).data()?;
    println!("frames: {}, anomalous: {anomalies}, skipped: {skipped}", frames.len());
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let data = eval::join(&args.scores, &args.labels, args.skipped_as_negative).data()?;
    let curve = roc(&data).context("roc").data()?;
    write_file(&args.roc_out, curve.to_csv()).data()?;
    if let Some(path) = &args.summary_out {
        write_file(path, curve.summary_csv()).data()?;
    }
    println!("auc={:.4} eer={:.4}", curve.auc, curve.eer);
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let mut spec = match &args.config {
        Some(path) => read_text(path)
            .and_then(|t| SynthSpec::from_text(&t).with_context(|| format!("in {}", path.display())))
            .usage()?,
        None => SynthSpec::default(),
    };
    for item in &args.set {
        let (k, v) = split_kv(item).usage()?;
        spec.set(k, v).usage()?;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    spec.validate().usage()?;
    if args.show_config {
        print!("{}", spec.to_text());
        return Ok(());
    }
    let out = args.out.expect("required by clap");
    let clip = generate(&spec).data()?;
    std::fs::create_dir_all(&out)
        .with_context(|| format!("cannot create {}", out.display()))
        .data()?;
    let digits = spec.frames.saturating_sub(1).to_string().len().max(4);
    for (t, pixels) in clip.pixels.iter().enumerate() {
        let img = image::GrayImage::from_raw(spec.width as u32, spec.height as u32, pixels.clone())
            .ok_or_else(|| anyhow!("frame {t} has the wrong pixel count"))
            .data()?;
        let path = out.join(format!("frame_{t:0digits$}.png"));
        img.save(&path).with_context(|| format!("cannot write {}", path.display())).data()?;
    }
    write_file(&out.join("labels.csv"), clip.labels_csv()).data()?;
    if spec.anomaly_style == AnomalyStyle::Intruder {
        let origins = aed_core::pipeline::tile_origins(spec.height, spec.width, args.patch_h, args.patch_w).usage()?;
        let mut text = format!("{TILE_LABEL_CSV_HEADER}\n");
        for t in 0..spec.frames {
            // The last frame is scored on the final flow pair.
            let pair = t.min(spec.frames - 2);
            for &(r, c) in &origins {
                let hit = clip.intruder_in_tile(pair, (r, c), args.patch_h, args.patch_w);
                let _ = writeln!(text, "{t},{r},{c},{}", u8::from(hit));
            }
        }
        write_file(&out.join("tile_labels.csv"), text).data()?;
    }
    println!(
        "wrote {} frames to {} ({} labeled anomalous)",
        spec.frames,
        out.display(),
        clip.labels.iter().filter(|&&l| l).count()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Score(a) => score(a),
        Command::Eval(a) => eval(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
