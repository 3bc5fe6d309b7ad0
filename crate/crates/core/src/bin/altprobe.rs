use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use altprobe::datasets::{load_fava, load_lava, Alternation, FavaDataset, FrameId, LavaDataset};
use altprobe::embstore::{read_store, synth_store, SentenceFeatures, SynthConfig, SynthScheme, WordFeatures};
use altprobe::experiments::{
    load_plan, run_sentence_experiment, run_word_experiment, sweep, ComplexityConfig, CvOptions, SweepPlan, Task,
};
use altprobe::probes::{ProbeConfig, ProbeKind};
use altprobe::report::{
    best_layer_table, curve_points, import_results, mean_curve, write_rows, Format, ResultRow, CURVE_COLUMNS,
    RESULT_COLUMNS, SWEEP_COLUMNS,
};
use altprobe::Error;

#[derive(Parser)]
#[command(name = "altprobe", version, about = "Layer-wise probing for verb alternation classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frame membership of verbs, k-fold cross-validated.
    WordProbe(WordArgs),
    /// Sentence grammaticality, train split to test split.
    SentenceProbe(SentenceArgs),
    /// Real task vs control task on one frame.
    Control(ControlArgs),
    /// Run a plan file of control experiments.
    Sweep(SweepArgs),
    /// Best-layer table and mean curves from an exported result file.
    Report(ReportArgs),
    /// Write a synthetic store for the given datasets.
    SynthStore(SynthArgs),
}

#[derive(Args)]
struct Data {
    #[arg(long)]
    lava: PathBuf,
    #[arg(long)]
    fava: PathBuf,
    #[arg(long)]
    store: PathBuf,
    /// Comma-separated layers or ranges, e.g. `0,4-12`. Default: all.
    #[arg(long)]
    layers: Option<String>,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long, value_enum, default_value = "linear")]
    probe: ProbeArg,
    #[arg(long, default_value_t = 0.0)]
    l2: f64,
    #[arg(long)]
    svd_rank: Option<usize>,
    #[arg(long, default_value_t = 768)]
    hidden_size: usize,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct Output {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct WordArgs {
    #[command(flatten)]
    data: Data,
    /// Frame token such as `spray_load.with`. Default: all ten.
    #[arg(long)]
    frame: Vec<String>,
    #[arg(long, default_value_t = 4)]
    folds: usize,
    #[command(flatten)]
    probe: ProbeArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SentenceArgs {
    #[arg(long)]
    fava: PathBuf,
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    layers: Option<String>,
    /// Alternation token such as `dative`.
    #[arg(long = "class", conflicts_with = "combined")]
    class: Vec<String>,
    /// Pool all five alternations (the default when no class is given).
    #[arg(long)]
    combined: bool,
    #[command(flatten)]
    probe: ProbeArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ControlArgs {
    #[command(flatten)]
    data: Data,
    #[arg(long)]
    frame: String,
    #[arg(long, value_enum, default_value = "linear")]
    probe: ProbeArg,
    /// Dimensionality knob: SVD rank (linear) or hidden width (MLPs).
    #[arg(long, alias = "svd-rank")]
    k: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    train_prop: f64,
    #[arg(long, default_value_t = 0.0)]
    l2: f64,
    #[arg(long, default_value_t = 768)]
    hidden_size: usize,
    #[arg(long, default_value_t = 4)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML plan file.
    #[arg(long)]
    plan: PathBuf,
    /// Overrides `out` in the plan.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct ReportArgs {
    /// Result file written by `word-probe` or `sentence-probe`.
    #[arg(long)]
    input: PathBuf,
    /// Best-layer table (text). Default: stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-task and mean curves.
    #[arg(long)]
    curves: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    lava: PathBuf,
    #[arg(long)]
    fava: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "linear")]
    scheme: SchemeArg,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    num_layers: usize,
    #[arg(long, default_value_t = 24)]
    dim: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProbeArg {
    Linear,
    Mlp1,
    Mlp2,
}

impl From<ProbeArg> for ProbeKind {
    fn from(p: ProbeArg) -> ProbeKind {
        match p {
            ProbeArg::Linear => ProbeKind::Linear,
            ProbeArg::Mlp1 => ProbeKind::Mlp1,
            ProbeArg::Mlp2 => ProbeKind::Mlp2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Linear,
    Noise,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Lib(#[from] Error),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn is_validation(&self) -> bool {
        match self {
            CliError::Lib(e) => e.is_validation(),
            CliError::Usage(_) => true,
            CliError::Io(_) => false,
        }
    }
}

fn lib<T, E: Into<Error>>(r: Result<T, E>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Lib(e.into()))
}

fn parse_layers(spec: Option<&str>, num_layers: usize) -> Result<Vec<usize>, CliError> {
    let Some(spec) = spec else {
        return Ok((0..num_layers).collect());
    };
    let bad = || CliError::Usage(format!("bad layer list {spec:?}"));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if let Some(l) = out.iter().find(|l| **l >= num_layers) {
        return Err(CliError::Usage(format!("layer {l} out of range; the store has {num_layers} layers")));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn store_layers(store: &Path, spec: Option<&str>) -> Result<Vec<usize>, CliError> {
    let (header, _) = lib(read_store(store))?;
    parse_layers(spec, header.num_layers)
}

fn probe_config(a: &ProbeArgs) -> ProbeConfig {
    ProbeConfig {
        kind: a.probe.into(),
        hidden_size: a.hidden_size,
        l2: a.l2,
        svd_rank: a.svd_rank,
        seed: a.seed,
        max_iters: a.max_iters,
        ..ProbeConfig::default()
    }
}

fn emit<T: serde::Serialize>(rows: &[T], columns: &[&str], output: &Output) -> Result<(), CliError> {
    let format = output.format.into();
    match &output.out {
        Some(path) => lib(write_rows(rows, columns, format, std::fs::File::create(path)?)),
        None => lib(write_rows(rows, columns, format, std::io::stdout().lock())),
    }
}

fn load_pair(data: &Data) -> Result<(LavaDataset, FavaDataset), CliError> {
    Ok((lib(load_lava(&data.lava))?, lib(load_fava(&data.fava))?))
}

fn word_probe(a: WordArgs) -> Result<(), CliError> {
    let (lava, fava) = load_pair(&a.data)?;
    let layers = store_layers(&a.data.store, a.data.layers.as_deref())?;
    let frames = if a.frame.is_empty() {
        FrameId::ALL.to_vec()
    } else {
        lib(a.frame.iter().map(|f| f.parse::<FrameId>()).collect::<Result<Vec<_>, _>>())?
    };
    let features = lib(WordFeatures::from_store(&a.data.store, &lava, &fava, &layers))?;
    let config = probe_config(&a.probe);
    let cv = CvOptions { folds: a.folds, seed: a.probe.seed };
    let mut rows = Vec::new();
    for frame in frames {
        for &layer in &layers {
            let r = lib(run_word_experiment(&lava, &features, frame, layer, &config, &cv))?;
            log::info!("{frame} layer {layer}: mcc {:.3} accuracy {:.3}", r.mcc, r.accuracy);
            rows.push(ResultRow::new(features.model_id(), config.kind, &r));
        }
    }
    emit(&rows, &RESULT_COLUMNS, &a.output)
}

fn sentence_probe(a: SentenceArgs) -> Result<(), CliError> {
    let fava = lib(load_fava(&a.fava))?;
    let layers = store_layers(&a.store, a.layers.as_deref())?;
    let tasks = if a.class.is_empty() {
        vec![Task::Combined]
    } else {
        lib(a.class.iter().map(|c| c.parse::<Alternation>().map(Task::Alternation)).collect::<Result<Vec<_>, _>>())?
    };
    let features = lib(SentenceFeatures::from_store(&a.store, &fava, &layers))?;
    let config = probe_config(&a.probe);
    let mut rows = Vec::new();
    for task in tasks {
        for &layer in &layers {
            let r = lib(run_sentence_experiment(&fava, &features, task, layer, &config))?;
            log::info!("{task} layer {layer}: mcc {:.3} accuracy {:.3}", r.mcc, r.accuracy);
            rows.push(ResultRow::new(features.model_id(), config.kind, &r));
        }
    }
    emit(&rows, &RESULT_COLUMNS, &a.output)
}

fn control(a: ControlArgs) -> Result<(), CliError> {
    let (lava, fava) = load_pair(&a.data)?;
    let layers = store_layers(&a.data.store, a.data.layers.as_deref())?;
    let frame: FrameId = lib(a.frame.parse())?;
    let complexity = ComplexityConfig { k: a.k, train_prop: a.train_prop, l2: a.l2 };
    let mut plan = lib(SweepPlan::new(vec![frame], layers, vec![a.probe.into()], vec![complexity], a.folds, a.seed))?;
    plan.base.hidden_size = a.hidden_size;
    let features = lib(WordFeatures::from_store(&a.data.store, &lava, &fava, &plan.layers))?;
    let rows = sweep(&plan, &lava, &features);
    if let Some(e) = rows.iter().find_map(|r| r.error.as_ref()) {
        return Err(CliError::Usage(e.clone()));
    }
    emit(&rows, &SWEEP_COLUMNS, &a.output)
}

fn run_sweep(a: SweepArgs) -> Result<(), CliError> {
    let file = lib(load_plan(&a.plan))?;
    let plan = lib(file.plan())?;
    let lava = lib(load_lava(&file.lava))?;
    let fava = lib(load_fava(&file.fava))?;
    let features = lib(WordFeatures::from_store(&file.store, &lava, &fava, &plan.layers))?;
    let rows = sweep(&plan, &lava, &features);
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} of {} cells failed", rows.len());
    }
    emit(&rows, &SWEEP_COLUMNS, &Output { out: a.out.or(file.out), format: a.format })
}

fn report(a: ReportArgs) -> Result<(), CliError> {
    let in_format = if a.input.extension().is_some_and(|e| e == "json") { Format::Json } else { Format::Csv };
    let rows = lib(import_results(&a.input, in_format))?;
    let table = lib(best_layer_table(&rows))?;
    match &a.out {
        Some(path) => std::fs::write(path, table.render())?,
        None => std::io::stdout().lock().write_all(table.render().as_bytes())?,
    }
    if let Some(path) = a.curves {
        let mut curves = lib(altprobe::report::task_curves(&rows))?;
        curves.extend(lib(mean_curve(&rows))?);
        let format = a.format.into();
        lib(write_rows(&curve_points(&curves), &CURVE_COLUMNS, format, std::fs::File::create(path)?))?;
    }
    Ok(())
}

fn synth(a: SynthArgs) -> Result<(), CliError> {
    let lava = lib(load_lava(&a.lava))?;
    let fava = lib(load_fava(&a.fava))?;
    let scheme = match a.scheme {
        SchemeArg::Linear => SynthScheme::LinearSignal { sigma: a.sigma },
        SchemeArg::Noise => SynthScheme::PureNoise,
    };
    let config = SynthConfig { seed: a.seed, scheme, num_layers: a.num_layers, hidden_dim: a.dim };
    let header = lib(synth_store(&config, &lava, &fava, &a.out))?;
    log::info!("wrote {} ({} layers, d={})", a.out.display(), header.num_layers, header.hidden_dim);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::WordProbe(a) => word_probe(a),
        Command::SentenceProbe(a) => sentence_probe(a),
        Command::Control(a) => control(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Report(a) => report(a),
        Command::SynthStore(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("altprobe: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
