#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use echo_core::dataset::{build, read_dataset, BuildConfig};
use echo_core::eval::{write_per_record_csv, EgoDims};
use echo_core::{
    arousal, emotionalize, evaluate, extract_features, modulate, normalize_features, read_wav,
    write_wav, ArousalWeights, EmotionLabel, EmotionProfileParams, EvalOptions, HorizonMode,
    LabelThresholds, Trajectory,
};
use serde::Serialize;

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

/// Emotion-aware audio and trajectory augmentation toolkit.
#[derive(Debug, Parser)]
#[command(name = "echo", version)]
struct Cli {
    /// Seed for stochastic steps (overrides the build config seed when set).
    #[arg(long, global = true, env = "ECHO_SEED")]
    seed: Option<u64>,
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print features, normalized features and arousal of a WAV file.
    Features(FeaturesArgs),
    /// Apply the urgent or hesitant prosody preset to a WAV file.
    Emotionalize(EmotionalizeArgs),
    /// Re-time a trajectory with an emotion speed profile.
    ModulateTraj(ModulateArgs),
    /// Build a CoT dataset from a JSON build config.
    BuildDataset(BuildArgs),
    /// Score predicted trajectories against a built dataset.
    Evaluate(EvaluateArgs),
    /// Write SVG trajectory and speed figures for dataset records.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct ArousalOptions {
    /// Arousal weights for rms, f0, tempo and centroid, e.g. 0.4,0.4,0.15,0.05.
    #[arg(long, value_parser = parse_weights, value_name = "WR,WF,WT,WC")]
    weights: Option<[f64; 4]>,
    /// Arousal at or above which a clip is urgent.
    #[arg(long, default_value_t = echo_core::arousal::URGENT_THRESHOLD)]
    urgent_threshold: f64,
    /// Arousal at or below which a clip is hesitant.
    #[arg(long, default_value_t = echo_core::arousal::HESITANT_THRESHOLD)]
    hesitant_threshold: f64,
}

fn parse_weights(s: &str) -> Result<[f64; 4], String> {
    let values: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect::<Result<_, _>>()?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected 4 comma-separated weights, got {}", v.len()))
}

impl ArousalOptions {
    fn resolve(&self) -> CliResult<(ArousalWeights, LabelThresholds)> {
        let mut weights = ArousalWeights::default();
        if let Some(w) = &self.weights {
            (weights.w_r, weights.w_f, weights.w_t, weights.w_c) = (w[0], w[1], w[2], w[3]);
        }
        weights.validate()?;
        let thresholds = LabelThresholds {
            urgent: self.urgent_threshold,
            hesitant: self.hesitant_threshold,
        };
        thresholds.validate()?;
        Ok((weights, thresholds))
    }
}

#[derive(Debug, Args)]
struct FeaturesArgs {
    wav: PathBuf,
    #[command(flatten)]
    arousal: ArousalOptions,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProsodyEmotion {
    Urgent,
    Hesitant,
}

impl From<ProsodyEmotion> for EmotionLabel {
    fn from(e: ProsodyEmotion) -> Self {
        match e {
            ProsodyEmotion::Urgent => EmotionLabel::Urgent,
            ProsodyEmotion::Hesitant => EmotionLabel::Hesitant,
        }
    }
}

#[derive(Debug, Args)]
struct EmotionalizeArgs {
    wav: PathBuf,
    #[arg(long, value_enum)]
    emotion: ProsodyEmotion,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Emotion {
    Normal,
    Urgent,
    Hesitant,
}

impl From<Emotion> for EmotionLabel {
    fn from(e: Emotion) -> Self {
        match e {
            Emotion::Normal => EmotionLabel::Normal,
            Emotion::Urgent => EmotionLabel::Urgent,
            Emotion::Hesitant => EmotionLabel::Hesitant,
        }
    }
}

#[derive(Debug, Args)]
struct ModulateArgs {
    /// JSON file `{"points": [[x, y], ...], "duration": seconds}`.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_enum)]
    emotion: Emotion,
    /// Disable the speed noise term.
    #[arg(long)]
    no_noise: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BuildArgs {
    /// BuildConfig JSON; relative paths inside resolve against its directory.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Horizon {
    CumulativeMean,
    SinglePoint,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write per-record metrics as CSV.
    #[arg(long, value_name = "CSV")]
    per_record: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "cumulative-mean")]
    horizon: Horizon,
    #[arg(long, default_value_t = EgoDims::default().length)]
    ego_length: f64,
    #[arg(long, default_value_t = EgoDims::default().width)]
    ego_width: f64,
}

#[derive(Debug, Args)]
struct PlotArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Plot at most this many records.
    #[arg(long)]
    limit: Option<usize>,
}

fn print_json<T: Serialize>(value: &T) -> CliResult<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(())
}

fn features(args: &FeaturesArgs) -> CliResult<()> {
    let (weights, thresholds) = args.arousal.resolve()?;
    let audio = read_wav(&args.wav)?;
    let features = extract_features(&audio)?;
    let normalized = normalize_features(&features);
    let score = arousal(&normalized, &weights);
    print_json(&serde_json::json!({
        "path": args.wav,
        "duration_s": audio.duration(),
        "sample_rate": audio.sample_rate,
        "features": features,
        "normalized": normalized,
        "arousal": score,
        "emotion": thresholds.label(score.value),
    }))
}

fn emotionalize_cmd(args: &EmotionalizeArgs) -> CliResult<()> {
    let audio = read_wav(&args.wav)?;
    let emotion = EmotionLabel::from(args.emotion);
    let out = emotionalize(&audio, emotion)?;
    write_wav(&args.output, &out)?;
    let score = |a| -> CliResult<f64> {
        Ok(arousal(
            &normalize_features(&extract_features(a)?),
            &ArousalWeights::default(),
        )
        .value)
    };
    print_json(&serde_json::json!({
        "input": args.wav,
        "output": args.output,
        "emotion": emotion,
        "input_duration_s": audio.duration(),
        "output_duration_s": out.duration(),
        "arousal_before": score(&audio)?,
        "arousal_after": score(&out)?,
    }))
}

fn modulate_cmd(args: &ModulateArgs, seed: u64) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| format!("{}: {e}", args.input.display()))?;
    let traj: Trajectory = serde_json::from_str(&text)?;
    traj.validate()?;
    let emotion = EmotionLabel::from(args.emotion);
    let mut params = EmotionProfileParams::for_emotion(emotion, seed)
        .unwrap_or_else(|| EmotionProfileParams::urgent(seed));
    if args.no_noise {
        params = params.without_noise();
    }
    let out = modulate(&traj, emotion, &params)?;
    if let Some(path) = &args.output {
        write_json(path, &out)?;
    }
    print_json(&out)
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn build_cmd(args: &BuildArgs, seed: Option<u64>) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("{}: {e}", args.config.display()))?;
    let mut config: BuildConfig = serde_json::from_str(&text)?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    config.input = resolve(base, &config.input);
    config.output = resolve(base, &config.output);
    if let echo_core::dataset::AudioSource::WavDir(dir) = &mut config.audio_source {
        *dir = resolve(base, dir);
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let report = build(&config)?;
    for e in &report.ingest_errors {
        log::warn!("scene line {}: {}: {}", e.line, e.field, e.message);
    }
    for s in &report.skipped {
        log::warn!("skipped {} ({}): {}", s.frame_id, s.emotion, s.reason);
    }
    for f in &report.flagged {
        log::warn!(
            "{} requested {} but measured {} (arousal {:.3})",
            f.record_id,
            f.requested,
            f.measured,
            f.arousal
        );
    }
    print_json(&report)
}

fn evaluate_cmd(args: &EvaluateArgs) -> CliResult<()> {
    let options = EvalOptions {
        mode: match args.horizon {
            Horizon::CumulativeMean => HorizonMode::CumulativeMean,
            Horizon::SinglePoint => HorizonMode::SinglePoint,
        },
        ego: EgoDims {
            length: args.ego_length,
            width: args.ego_width,
        },
    };
    if !(options.ego.length > 0.0 && options.ego.width > 0.0) {
        return Err("ego dimensions must be positive".into());
    }
    let (report, rows) = evaluate(&args.dataset, &args.pred, &options)?;
    for id in &report.unmatched_predictions {
        log::warn!("prediction {id} matches no record");
    }
    if let Some(path) = &args.output {
        write_json(path, &report)?;
    }
    if let Some(path) = &args.per_record {
        write_per_record_csv(path, &rows)?;
    }
    print_json(&report)
}

fn plot_cmd(args: &PlotArgs) -> CliResult<()> {
    let records = read_dataset(&args.dataset)?;
    std::fs::create_dir_all(&args.output).map_err(|e| format!("{}: {e}", args.output.display()))?;
    let mut written = Vec::new();
    for r in records.iter().take(args.limit.unwrap_or(usize::MAX)) {
        for (suffix, svg) in [
            ("trajectory", plot::trajectory_figure(r)),
            ("speed", plot::speed_figure(r)),
        ] {
            let path = args.output.join(format!("{}_{suffix}.svg", r.record_id));
            std::fs::write(&path, svg).map_err(|e| format!("{}: {e}", path.display()))?;
            written.push(path);
        }
    }
    log::info!(
        "wrote {} figures to {}",
        written.len(),
        args.output.display()
    );
    print_json(&written)
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Features(a) => features(a),
        Command::Emotionalize(a) => emotionalize_cmd(a),
        Command::ModulateTraj(a) => modulate_cmd(a, cli.seed.unwrap_or(0)),
        Command::BuildDataset(a) => build_cmd(a, cli.seed),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Plot(a) => plot_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (_, 0) => log::LevelFilter::Warn,
        (_, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
