//! `ismclass` command-line pipeline. Stages talk only through files.
//!
//! Exit codes: 0 success, 2 usage or validation error, 1 runtime error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use ismclass::detect::{detect_bursts, DetectorConfig};
use ismclass::eval::{
    build_corpus, compare_methods, emit_report, evaluate, label_detections, run_noise_study,
    score_detections, split_train_test, train_model, CorpusConfig, EvalReport, Method, MethodSpec,
    NoiseStudyConfig, ReportFormat, TestRecording, TrainedModel,
};
use ismclass::features::{
    extract_dataset, load_dataset, save_dataset, standardize, FeatureSet, PaprUnit, Standardization,
};
use ismclass::io::{
    read_detections, read_iq, read_truth, truth_path, write_detections, write_iq, write_json,
    write_truth,
};
use ismclass::signal::{generate, DEFAULT_SAMPLE_RATE_HZ};
use ismclass::{Error, GeneratorConfig, ProtocolLabel, Scenario};

#[derive(Parser)]
#[command(
    name = "ismclass",
    version,
    about = "Synthetic ISM traffic, burst detection and protocol classification"
)]
struct Cli {
    /// TOML or JSON file; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a recording with its truth.
    Generate(GenerateArgs),
    /// Run the burst detector on a recording.
    Detect(DetectArgs),
    /// Turn bursts into a feature CSV.
    Extract(ExtractArgs),
    /// Split a dataset into train and test halves.
    Split(SplitArgs),
    /// Train one classifier.
    Train(TrainArgs),
    /// Evaluate a trained model on a dataset.
    Eval(EvalArgs),
    /// Clean-train, noisy-test accuracy over an SNR grid.
    Sweep(SweepArgs),
    /// Build a labeled corpus and compare every method on it.
    Corpus(CorpusArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    scenario: Option<Scenario>,
    /// Seconds.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sample_rate: Option<f64>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    bt_idle_us: Option<f64>,
    /// IQ output; `.meta.json` and `.truth.json` sidecars go next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Default)]
struct DetectorFlags {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    smooth_len: Option<usize>,
    #[arg(long)]
    window_rising: Option<usize>,
    #[arg(long)]
    window_falling: Option<usize>,
    #[arg(long)]
    gap_delta: Option<usize>,
    #[arg(long)]
    min_burst_us: Option<f64>,
    #[arg(long)]
    min_gap_us: Option<f64>,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    input: PathBuf,
    /// Defaults to `<input>.detections.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Truth JSON to score the detections against.
    #[arg(long)]
    score_against: Option<PathBuf>,
    #[command(flatten)]
    detector: DetectorFlags,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long)]
    input: PathBuf,
    /// Detections JSON; runs the detector when omitted.
    #[arg(long, conflicts_with = "use_truth")]
    detections: Option<PathBuf>,
    /// Use truth intervals instead of detections.
    #[arg(long)]
    use_truth: bool,
    /// Truth JSON used for labels; defaults to `<input>.truth.json`.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Label every row with this class instead of matching against truth.
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    detector: DetectorFlags,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Shuffle all rows together instead of per class.
    #[arg(long)]
    unstratified: bool,
    /// Write both halves z-scored with training statistics, plus sidecars.
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    train_out: PathBuf,
    #[arg(long)]
    test_out: PathBuf,
}

#[derive(Args, Default)]
struct MethodFlags {
    #[arg(long)]
    features: Option<FeatureSet>,
    /// Soft-margin penalty.
    #[arg(long = "c")]
    c_reg: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_passes: Option<usize>,
    #[arg(long)]
    poly_c: Option<f64>,
    #[arg(long)]
    poly_p: Option<u32>,
    /// RBF width; the median heuristic when unset.
    #[arg(long)]
    rbf_c: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    papr_unit: Option<PaprUnit>,
    /// Skip z-scoring.
    #[arg(long)]
    no_standardize: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    method: Option<Method>,
    #[command(flatten)]
    spec: MethodFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// json, csv or curve-csv.
    #[arg(long, default_value = "json")]
    format: ReportFormat,
    /// Printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Raw or standardized training CSV.
    #[arg(long)]
    train: PathBuf,
    /// Clean IQ test recordings, each with a truth sidecar.
    #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
    recordings: Vec<PathBuf>,
    /// Comma-separated; all four when omitted.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<Method>,
    /// Comma-separated SNR grid in dB.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    spec: MethodFlags,
    #[command(flatten)]
    detector: DetectorFlags,
    /// json, csv or curve-csv.
    #[arg(long, default_value = "curve-csv")]
    format: ReportFormat,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    frames_per_class: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Label truth intervals instead of detections.
    #[arg(long)]
    use_truth: bool,
    #[arg(long)]
    capture_snr: Option<f64>,
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    split_seed: Option<u64>,
    /// Independent splits with consecutive seeds.
    #[arg(long)]
    repeats: Option<usize>,
    #[command(flatten)]
    spec: MethodFlags,
}

/// Sections of a `--config` file. Each subcommand reads the ones it needs.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    generator: Option<GeneratorConfig>,
    sample_rate_hz: Option<f64>,
    detector: Option<DetectorConfig>,
    method: Option<MethodSpec>,
    split: Option<SplitSettings>,
    corpus: Option<CorpusConfig>,
    sweep: Option<NoiseStudyConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SplitSettings {
    test_fraction: f64,
    seed: u64,
    stratified: bool,
    repeats: usize,
}

impl Default for SplitSettings {
    fn default() -> Self {
        Self {
            test_fraction: 0.2,
            seed: 7,
            stratified: true,
            repeats: 1,
        }
    }
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Self::Usage(e.to_string())
        } else {
            Self::Runtime(e.to_string())
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let file = match &cli.config {
        Some(p) => load_config(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Generate(a) => cmd_generate(a, file),
        Command::Detect(a) => cmd_detect(a, file),
        Command::Extract(a) => cmd_extract(a, file),
        Command::Split(a) => cmd_split(a, file),
        Command::Train(a) => cmd_train(a, file),
        Command::Eval(a) => cmd_eval(a),
        Command::Sweep(a) => cmd_sweep(a, file),
        Command::Corpus(a) => cmd_corpus(a, file),
    }
}

fn load_config(path: &Path) -> CliResult<FileConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let parsed = if is_json {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn set<T>(dst: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *dst = v;
    }
}

/// `out.ext` -> `out.ext.config.json`, so outputs sharing a stem keep
/// separate snapshots.
fn snapshot_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".config.json");
    PathBuf::from(name)
}

#[derive(Serialize)]
struct Snapshot<'a, T: Serialize> {
    command: &'a str,
    version: &'a str,
    settings: T,
}

fn write_snapshot<T: Serialize>(out: &Path, command: &str, settings: T) -> CliResult {
    let snap = Snapshot {
        command,
        version: env!("CARGO_PKG_VERSION"),
        settings,
    };
    Ok(write_json(&snapshot_path(out), &snap)?)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult {
    fs::write(path, bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn detector_config(
    flags: DetectorFlags,
    file: Option<DetectorConfig>,
) -> CliResult<DetectorConfig> {
    let mut d = file.unwrap_or_default();
    set(&mut d.alpha, flags.alpha);
    set(&mut d.smooth_len, flags.smooth_len);
    set(&mut d.window_len_rising, flags.window_rising);
    set(&mut d.window_len_falling, flags.window_falling);
    set(&mut d.gap_delta, flags.gap_delta);
    set(&mut d.min_burst_us, flags.min_burst_us);
    set(&mut d.min_gap_us, flags.min_gap_us);
    d.validate()?;
    Ok(d)
}

fn method_spec(
    method: Option<Method>,
    flags: &MethodFlags,
    file: Option<MethodSpec>,
) -> MethodSpec {
    let mut s = file.unwrap_or_default();
    set(&mut s.method, method);
    set(&mut s.features, flags.features);
    set(&mut s.c_reg, flags.c_reg);
    set(&mut s.tol, flags.tol);
    set(&mut s.max_passes, flags.max_passes);
    set(&mut s.poly_c, flags.poly_c);
    set(&mut s.poly_p, flags.poly_p);
    if flags.rbf_c.is_some() {
        s.rbf_c = flags.rbf_c;
    }
    set(&mut s.k, flags.k);
    set(&mut s.scaling.papr_unit, flags.papr_unit);
    if flags.no_standardize {
        s.scaling.standardize = false;
    }
    s
}

#[derive(Serialize)]
struct GenerateSettings {
    sample_rate_hz: f64,
    generator: GeneratorConfig,
}

fn cmd_generate(a: GenerateArgs, file: FileConfig) -> CliResult {
    let mut g = file.generator.unwrap_or_default();
    set(&mut g.scenario, a.scenario);
    set(&mut g.duration_s, a.duration);
    set(&mut g.seed, a.seed);
    set(&mut g.amplitude, a.amplitude);
    set(&mut g.bt_idle_gap_us, a.bt_idle_us);
    let mut rate = file.sample_rate_hz.unwrap_or(DEFAULT_SAMPLE_RATE_HZ);
    set(&mut rate, a.sample_rate);
    g.validate(rate)?;

    let (rec, truth) = generate(&g, rate)?;
    write_iq(&a.out, &rec)?;
    write_truth(&truth_path(&a.out), &truth)?;
    write_snapshot(
        &a.out,
        "generate",
        GenerateSettings {
            sample_rate_hz: rate,
            generator: g,
        },
    )?;
    println!(
        "{} bursts, {} samples -> {}",
        truth.len(),
        rec.len(),
        a.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct DetectSettings<'a> {
    input: &'a Path,
    detector: &'a DetectorConfig,
}

fn cmd_detect(a: DetectArgs, file: FileConfig) -> CliResult {
    let det = detector_config(a.detector, file.detector)?;
    let rec = read_iq(&a.input)?;
    let bursts = detect_bursts(&rec, &det)?;
    let out = a
        .out
        .unwrap_or_else(|| a.input.with_extension("detections.json"));
    write_detections(&out, &bursts)?;
    write_snapshot(
        &out,
        "detect",
        DetectSettings {
            input: &a.input,
            detector: &det,
        },
    )?;
    println!("{} bursts -> {}", bursts.len(), out.display());
    if let Some(tp) = a.score_against {
        let s = score_detections(&bursts, &read_truth(&tp)?);
        println!(
            "precision {:.6} recall {:.6} max boundary error {} samples",
            s.precision, s.recall, s.max_boundary_error
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct ExtractSettings<'a> {
    input: &'a Path,
    source: String,
    labels: String,
    detector: Option<&'a DetectorConfig>,
}

fn cmd_extract(a: ExtractArgs, file: FileConfig) -> CliResult {
    let rec = read_iq(&a.input)?;
    let fixed = a
        .label
        .as_deref()
        .map(|l| l.parse::<ProtocolLabel>())
        .transpose()?;
    let truth_file = a.truth.clone().unwrap_or_else(|| truth_path(&a.input));
    let truth = if fixed.is_none() || a.use_truth {
        Some(read_truth(&truth_file)?)
    } else {
        None
    };

    let mut det_cfg = None;
    let (ds, source) = if a.use_truth {
        let truth = truth.as_ref().expect("truth loaded above");
        let labels: Vec<_> = truth
            .iter()
            .map(|b| Some(fixed.unwrap_or(b.label)))
            .collect();
        (
            extract_dataset(&rec, &truth.bursts, &labels)?,
            format!("truth {}", truth_file.display()),
        )
    } else {
        let (bursts, source) = match &a.detections {
            Some(p) => (read_detections(p)?, format!("detections {}", p.display())),
            None => {
                let d = detector_config(a.detector, file.detector)?;
                let bursts = detect_bursts(&rec, &d)?;
                det_cfg = Some(d);
                (bursts, "detector".to_owned())
            }
        };
        let labels = match (fixed, &truth) {
            (Some(l), _) => vec![Some(l); bursts.len()],
            (None, Some(t)) => label_detections(&bursts, t),
            (None, None) => unreachable!("truth is loaded whenever no fixed label is given"),
        };
        (extract_dataset(&rec, &bursts, &labels)?, source)
    };

    if ds.is_empty() {
        eprintln!("warning: no usable frames; writing an empty dataset");
    }
    save_dataset(&a.out, &ds)?;
    let labels = match fixed {
        Some(l) => format!("fixed {l}"),
        None => format!("truth {}", truth_file.display()),
    };
    write_snapshot(
        &a.out,
        "extract",
        ExtractSettings {
            input: &a.input,
            source,
            labels,
            detector: det_cfg.as_ref(),
        },
    )?;
    println!("{} rows -> {}", ds.len(), a.out.display());
    Ok(())
}

fn cmd_split(a: SplitArgs, file: FileConfig) -> CliResult {
    let mut s = file.split.unwrap_or_default();
    set(&mut s.test_fraction, a.test_fraction);
    set(&mut s.seed, a.seed);
    if a.unstratified {
        s.stratified = false;
    }
    let ds = load_dataset(&a.input)?;
    if ds.standardization.is_some() {
        return Err(CliError::Usage(format!(
            "{} is already standardized",
            a.input.display()
        )));
    }
    let (mut train, mut test) = split_train_test(&ds, s.test_fraction, s.seed, s.stratified)?;
    if a.standardize {
        let stats = Standardization::fit(&train.features())?;
        train = standardize(&train, Some(&stats))?;
        test = standardize(&test, Some(&stats))?;
    }
    save_dataset(&a.train_out, &train)?;
    save_dataset(&a.test_out, &test)?;
    #[derive(Serialize)]
    struct S<'a> {
        input: &'a Path,
        split: SplitSettings,
        standardize: bool,
    }
    write_snapshot(
        &a.train_out,
        "split",
        S {
            input: &a.input,
            split: s,
            standardize: a.standardize,
        },
    )?;
    println!("{} train rows, {} test rows", train.len(), test.len());
    Ok(())
}

fn cmd_train(a: TrainArgs, file: FileConfig) -> CliResult {
    let mut spec = method_spec(a.method, &a.spec, file.method);
    let ds = load_dataset(&a.train)?;
    if let Some(s) = &ds.standardization {
        // Pre-scaled rows fix the scaling; only explicit conflicting flags are errors.
        if a.spec.papr_unit.is_none() && !a.spec.no_standardize {
            spec.scaling = s.options();
        }
    }
    let model = train_model(&spec, &ds)?;
    write_json(&a.out, &model)?;
    #[derive(Serialize)]
    struct S<'a> {
        train: &'a Path,
        spec: &'a MethodSpec,
    }
    write_snapshot(
        &a.out,
        "train",
        S {
            train: &a.train,
            spec: &model.spec,
        },
    )?;
    println!(
        "{} on {} rows ({}), converged {} -> {}",
        model.method(),
        model.n_train,
        model.features(),
        model.converged(),
        a.out.display()
    );
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> CliResult {
    let model: TrainedModel = ismclass::io::read_json(&a.model)?;
    let mut test = load_dataset(&a.test)?;
    if test.standardization.is_none() {
        test = standardize(&test, Some(model.standardization()))?;
    }
    let report = evaluate(&model, &test)?;
    let bytes = emit_report(std::slice::from_ref(&report), a.format)?;
    match &a.out {
        Some(p) => {
            write_bytes(p, &bytes)?;
            #[derive(Serialize)]
            struct S<'a> {
                model: &'a Path,
                test: &'a Path,
            }
            write_snapshot(
                p,
                "eval",
                S {
                    model: &a.model,
                    test: &a.test,
                },
            )?;
            println!(
                "accuracy {:.4} on {} rows -> {}",
                report.accuracy,
                report.n_test,
                p.display()
            );
        }
        None => print!("{}", String::from_utf8_lossy(&bytes)),
    }
    Ok(())
}

fn load_test_recordings(paths: &[PathBuf]) -> CliResult<Vec<TestRecording>> {
    paths
        .iter()
        .map(|p| {
            Ok(TestRecording {
                recording: read_iq(p)?,
                truth: read_truth(&truth_path(p))?,
            })
        })
        .collect()
}

fn cmd_sweep(a: SweepArgs, file: FileConfig) -> CliResult {
    let mut study = file.sweep.unwrap_or_default();
    if !a.snr.is_empty() {
        study.snr_grid_db = a.snr.clone();
    }
    set(&mut study.seed, a.seed);
    study.detector = detector_config(a.detector, Some(study.detector))?;
    let base = method_spec(None, &a.spec, file.method);
    let methods: Vec<Method> = if a.methods.is_empty() {
        Method::ALL.to_vec()
    } else {
        a.methods.clone()
    };
    let specs: Vec<MethodSpec> = methods
        .iter()
        .map(|&m| MethodSpec { method: m, ..base })
        .collect();

    let train = load_dataset(&a.train)?;
    let tests = load_test_recordings(&a.recordings)?;
    let reports = run_noise_study(&train, &specs, &tests, &study)?;
    write_bytes(&a.out, &emit_report(&reports, a.format)?)?;
    #[derive(Serialize)]
    struct S<'a> {
        train: &'a Path,
        recordings: &'a [PathBuf],
        methods: &'a [MethodSpec],
        study: &'a NoiseStudyConfig,
    }
    write_snapshot(
        &a.out,
        "sweep",
        S {
            train: &a.train,
            recordings: &a.recordings,
            methods: &specs,
            study: &study,
        },
    )?;
    for r in &reports {
        let curve: Vec<String> = r
            .per_snr
            .iter()
            .map(|p| {
                let acc = p.accuracy.map_or("-".into(), |v| format!("{:.3}", v));
                format!("{}dB:{}/{}", p.snr_db, p.detected_frames, acc)
            })
            .collect();
        println!("{:<10} {}", r.method, curve.join(" "));
    }
    Ok(())
}

#[derive(Serialize)]
struct CorpusSettings<'a> {
    corpus: &'a CorpusConfig,
    split: SplitSettings,
    method: &'a MethodSpec,
}

fn cmd_corpus(a: CorpusArgs, file: FileConfig) -> CliResult {
    let mut c = file.corpus.unwrap_or_default();
    set(&mut c.frames_per_class, a.frames_per_class);
    set(&mut c.seed, a.seed);
    if a.use_truth {
        c.use_truth = true;
    }
    if a.capture_snr.is_some() {
        c.capture_snr_db = a.capture_snr;
    }
    let mut s = file.split.unwrap_or_default();
    set(&mut s.test_fraction, a.test_fraction);
    set(&mut s.seed, a.split_seed);
    set(&mut s.repeats, a.repeats);
    if s.repeats == 0 {
        return Err(CliError::Usage("repeats must be at least 1".into()));
    }
    let base = method_spec(None, &a.spec, file.method);

    fs::create_dir_all(&a.out_dir)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", a.out_dir.display())))?;
    let (ds, summary) = build_corpus(&c)?;
    save_dataset(&a.out_dir.join("corpus.csv"), &ds)?;
    write_json(&a.out_dir.join("summary.json"), &summary)?;
    println!(
        "{} rows from {} recordings ({} false alarms excluded)",
        ds.len(),
        summary.recordings,
        summary.false_alarms
    );

    let feature_sets: Vec<FeatureSet> = match a.spec.features {
        Some(f) => vec![f],
        None => vec![FeatureSet::TimeOnly, FeatureSet::TimePlusPapr],
    };
    let specs: Vec<MethodSpec> = feature_sets
        .iter()
        .flat_map(|&f| {
            Method::ALL.map(|m| MethodSpec {
                method: m,
                features: f,
                ..base
            })
        })
        .collect();

    let mut all: Vec<EvalReport> = Vec::new();
    let mut sums = vec![0.0; specs.len()];
    for r in 0..s.repeats {
        let seed = s.seed.wrapping_add(r as u64);
        let (train, test) = split_train_test(&ds, s.test_fraction, seed, s.stratified)?;
        let reports = compare_methods(&train, &test, &specs)?;
        for (sum, rep) in sums.iter_mut().zip(&reports) {
            *sum += rep.accuracy;
        }
        all.extend(reports);
    }
    let reports_path = a.out_dir.join("reports.json");
    write_bytes(&reports_path, &emit_report(&all, ReportFormat::Json)?)?;
    write_bytes(
        &a.out_dir.join("reports.csv"),
        &emit_report(&all, ReportFormat::Csv)?,
    )?;
    write_snapshot(
        &a.out_dir.join("corpus.csv"),
        "corpus",
        CorpusSettings {
            corpus: &c,
            split: s,
            method: &base,
        },
    )?;

    for (spec, sum) in specs.iter().zip(sums) {
        println!(
            "{:<10} {:<10} {:.2}%",
            spec.method,
            spec.features,
            100.0 * sum / s.repeats as f64
        );
    }
    Ok(())
}
