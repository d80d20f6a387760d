//! Command-line front end. `main.rs` only forwards `std::env::args_os`.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O, 3 data or format errors.
//! A `--config FILE` of `key = value` lines supplies flags that are not
//! given explicitly on the command line.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use crate::bench::benchmark;
use crate::error::{Error, Result};
use crate::eval::{self, LabeledId};
use crate::hopfield::{DynamicsConfig, MatchKind};
use crate::model::{load_model, save_model, TrainedModel};
use crate::pipeline::{self, classify, classify_batch, discover_wavs, write_results_csv, write_trace_csv};
use crate::spectrum::{compute_spectrum, EncodingConfig};
use crate::wav::{read_wav, Waveform};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "echomem", version, about = "Hopfield associative-memory classifier for echolocation fragments")]
pub struct Cli {
    /// key = value file supplying defaults for flags not given explicitly [default: none]
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Store one exemplar recording per class in a new model file
    Train(TrainArgs),
    /// Label every .wav fragment under a file or directory
    Classify(ClassifyArgs),
    /// Score predictions against ground truth
    Evaluate(EvaluateArgs),
    /// Show the network state and energy at each iteration for one fragment
    Trace(TraceArgs),
    /// Export the power spectrum of one fragment
    Spectrum(SpectrumArgs),
    /// Time training and batch classification, and sample peak memory
    Bench(BenchArgs),
}

#[derive(Debug, clap::Args)]
pub struct TrainArgs {
    /// Class exemplar as LABEL=PATH; repeat once per class [default: required]
    #[arg(long = "exemplar", value_name = "LABEL=PATH", required = true)]
    pub exemplars: Vec<String>,
    /// Output model file [default: required]
    #[arg(long, value_name = "MODEL")]
    pub out: PathBuf,
    /// Lower edge of the neuron band, Hz
    #[arg(long, value_name = "HZ", default_value_t = 35_000.0)]
    pub band_lo: f64,
    /// Upper edge of the neuron band, Hz
    #[arg(long, value_name = "HZ", default_value_t = 75_000.0)]
    pub band_hi: f64,
    /// Number of neurons (equal-width frequency bands)
    #[arg(long, value_name = "N", default_value_t = 64)]
    pub neurons: usize,
    /// Peak activation threshold as a fraction of the in-band maximum
    #[arg(long, value_name = "F", default_value_t = 0.5)]
    pub threshold: f64,
    /// Absolute in-band power below which a fragment is silence
    #[arg(long, value_name = "POWER", default_value_t = 1e-5)]
    pub silence_floor: f64,
    /// Transform length, a power of two >= 64; 0 adapts to each fragment
    #[arg(long, value_name = "LEN", default_value_t = 0)]
    pub fft_length: usize,
    /// Iteration cap for recall
    #[arg(long, value_name = "K", default_value_t = 100)]
    pub max_iterations: usize,
}

#[derive(Debug, clap::Args)]
pub struct ClassifyArgs {
    /// Model file written by `train` [default: required]
    #[arg(long, value_name = "MODEL")]
    pub model: PathBuf,
    /// A .wav file or a directory searched recursively [default: required]
    #[arg(long, value_name = "DIR_OR_FILE")]
    pub input: PathBuf,
    /// Output CSV, `-` for standard output
    #[arg(long, value_name = "CSV", default_value = "-")]
    pub out: String,
    /// Label fragments whose peak-energy frequency is in 49-51 kHz as Filtered [default: off]
    #[arg(long = "band-reject-49-51")]
    pub band_reject: bool,
    /// Write one trace CSV per fragment under this directory [default: none]
    #[arg(long, value_name = "DIR")]
    pub trace_dir: Option<PathBuf>,
    /// Worker threads; 0 uses every available core
    #[arg(long, value_name = "K", default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, clap::Args)]
pub struct EvaluateArgs {
    /// Predictions CSV written by `classify` [default: required]
    #[arg(long, value_name = "CSV")]
    pub pred: PathBuf,
    /// Truth CSV with columns source_id,label [default: required]
    #[arg(long, value_name = "CSV")]
    pub truth: PathBuf,
    /// Plain-text report, `-` for standard output
    #[arg(long, value_name = "TXT", default_value = "-")]
    pub out_report: String,
    /// Confusion matrix CSV [default: none]
    #[arg(long, value_name = "CSV")]
    pub out_cm: Option<PathBuf>,
    /// Machine-readable report CSV [default: none]
    #[arg(long, value_name = "CSV")]
    pub out_report_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceFormat {
    Text,
    Csv,
}

#[derive(Debug, clap::Args)]
pub struct TraceArgs {
    /// Model file [default: required]
    #[arg(long, value_name = "MODEL")]
    pub model: PathBuf,
    /// Fragment to trace [default: required]
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Output layout
    #[arg(long, value_enum, default_value_t = TraceFormat::Text)]
    pub format: TraceFormat,
    /// Output file, `-` for standard output
    #[arg(long, value_name = "PATH", default_value = "-")]
    pub out: String,
}

#[derive(Debug, clap::Args)]
pub struct SpectrumArgs {
    /// Fragment to analyse [default: required]
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Output CSV (freq_hz,power), `-` for standard output
    #[arg(long, value_name = "CSV", default_value = "-")]
    pub out: String,
    /// Transform length, a power of two >= 64; 0 adapts to the fragment
    #[arg(long, value_name = "LEN", default_value_t = 0)]
    pub fft_length: usize,
}

#[derive(Debug, clap::Args)]
pub struct BenchArgs {
    /// Model file [default: required]
    #[arg(long, value_name = "MODEL")]
    pub model: PathBuf,
    /// A .wav file or directory [default: required]
    #[arg(long, value_name = "DIR")]
    pub input: PathBuf,
    /// Repetitions averaged in the report
    #[arg(long, value_name = "K", default_value_t = 5)]
    pub runs: usize,
    /// Worker threads; 0 uses every available core
    #[arg(long, value_name = "K", default_value_t = 0)]
    pub jobs: usize,
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match apply_config(args) {
        Ok(a) => a,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
        Err(Failure::Run(e)) => return report_error(&e, stderr),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Train(a) => cmd_train(a, stdout),
        Command::Classify(a) => cmd_classify(a, stdout, stderr),
        Command::Evaluate(a) => cmd_evaluate(a, stdout),
        Command::Trace(a) => cmd_trace(a, stdout),
        Command::Spectrum(a) => cmd_spectrum(a, stdout),
        Command::Bench(a) => cmd_bench(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(e)) => report_error(&e, stderr),
    }
}

fn report_error(e: &Error, stderr: &mut dyn Write) -> i32 {
    let _ = writeln!(stderr, "error: {e}");
    if e.is_io() {
        EXIT_IO
    } else {
        EXIT_DATA
    }
}

/// Finds `--config FILE` and splices its entries in right after the
/// subcommand, skipping keys already present on the command line.
fn apply_config(args: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut config_path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            config_path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            config_path = Some(p.to_string());
        }
    }
    let Some(config_path) = config_path else {
        return Ok(args);
    };
    let root = Cli::command();
    let Some((sub_pos, sub)) = strs
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, a)| root.find_subcommand(a).map(|s| (i, s)))
    else {
        return Ok(args);
    };
    let text = fs::read_to_string(&config_path).map_err(|e| Error::io(&config_path, e))?;
    let mut injected: Vec<OsString> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| Failure::Usage(format!("{config_path}:{}: expected key = value", lineno + 1)))?;
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key) && key != "config")
            .ok_or_else(|| Failure::Usage(format!("{config_path}:{}: unknown flag `{key}`", lineno + 1)))?;
        let flag = format!("--{key}");
        let explicit = strs[sub_pos + 1..]
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if explicit {
            continue;
        }
        if arg.get_action().takes_values() {
            injected.push(flag.into());
            injected.push(value.into());
        } else {
            match value {
                "true" | "1" | "yes" | "on" => injected.push(flag.into()),
                "false" | "0" | "no" | "off" => {}
                other => {
                    return Err(Failure::Usage(format!(
                        "{config_path}:{}: `{key}` expects true or false, got `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
    }
    let mut merged = args;
    let tail = merged.split_off(sub_pos + 1);
    merged.extend(injected);
    merged.extend(tail);
    Ok(merged)
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn read_wave(path: &Path) -> Result<Waveform> {
    let id = path
        .file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    read_wav(&read_file(path)?, id.clone()).map_err(|e| e.in_fragment(&id))
}

fn load_model_file(path: &Path) -> Result<TrainedModel> {
    load_model(&read_file(path)?)
}

/// Writes to `target`, or to `stdout` when it is `-`.
fn emit(target: &str, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    if target == "-" {
        return f(stdout);
    }
    let file = fs::File::create(target).map_err(|e| Error::io(target, e))?;
    let mut buf = io::BufWriter::new(file);
    f(&mut buf)?;
    buf.flush().map_err(|e| Error::io(target, e))
}

fn jobs_or_default(jobs: usize) -> usize {
    if jobs > 0 {
        jobs
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}

fn fft_length_opt(len: usize) -> Option<usize> {
    (len > 0).then_some(len)
}

fn cmd_train(a: TrainArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let mut exemplars = Vec::with_capacity(a.exemplars.len());
    for spec in &a.exemplars {
        let (label, path) = spec
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--exemplar expects LABEL=PATH, got `{spec}`")))?;
        exemplars.push((label.to_string(), read_wave(Path::new(path))?));
    }
    let encoding = EncodingConfig {
        band_lo: a.band_lo,
        band_hi: a.band_hi,
        n_neurons: a.neurons,
        activation_threshold: a.threshold,
        silence_power_floor: a.silence_floor,
        fft_length: fft_length_opt(a.fft_length),
    };
    let dynamics = DynamicsConfig {
        max_iterations: a.max_iterations,
        bias: None,
    };
    let model = pipeline::train(&exemplars, &encoding, &dynamics)?;
    fs::write(&a.out, save_model(&model)).map_err(|e| Error::io(&a.out, e))?;
    let _ = writeln!(
        stdout,
        "stored {} classes on {} neurons: {}",
        model.n_patterns(),
        model.n_neurons(),
        model.class_labels.join(", ")
    );
    Ok(EXIT_OK)
}

fn cmd_classify(a: ClassifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, Failure> {
    let model = load_model_file(&a.model)?.with_band_reject(a.band_reject);
    let inputs = discover_wavs(&a.input)?;
    let want_trace = a.trace_dir.is_some();
    let out = classify_batch(&model, &inputs, jobs_or_default(a.jobs), want_trace)?;
    emit(&a.out, stdout, |w| write_results_csv(&out.entries, w))?;

    if let Some(dir) = &a.trace_dir {
        for entry in &out.entries {
            let Ok(result) = &entry.outcome else { continue };
            let Some(trace) = &result.trace else { continue };
            let path = dir.join(format!("{}.trace.csv", entry.source_id));
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            let mut buf = Vec::new();
            write_trace_csv(trace, &mut buf)?;
            fs::write(&path, buf).map_err(|e| Error::io(&path, e))?;
        }
    }

    let mut failed = false;
    for entry in &out.entries {
        if let Err(e) = &entry.outcome {
            failed = true;
            let _ = writeln!(stderr, "error: {e}");
        }
    }
    let counts: Vec<String> = out
        .summary
        .counts
        .iter()
        .filter(|(_, c)| *c > 0)
        .map(|(l, c)| format!("{l}={c}"))
        .collect();
    let _ = writeln!(stderr, "classified {} fragments: {}", out.summary.total, counts.join(" "));
    Ok(if failed { EXIT_DATA } else { EXIT_OK })
}

fn read_labeled_csv(path: &Path) -> Result<Vec<LabeledId>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(io::BufReader::new(file));
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidConfig(format!("{}: missing `{name}` column", path.display())))
    };
    let (id_col, label_col) = (col("source_id")?, col("label")?);
    reader
        .records()
        .map(|rec| {
            let rec = rec?;
            Ok(LabeledId::new(
                rec.get(id_col).unwrap_or_default(),
                rec.get(label_col).unwrap_or_default(),
            ))
        })
        .collect()
}

fn cmd_evaluate(a: EvaluateArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let predictions = read_labeled_csv(&a.pred)?;
    let truth = read_labeled_csv(&a.truth)?;
    let cm = eval::score(&predictions, &truth)?;
    let report = eval::report(&cm)?;
    emit(&a.out_report, stdout, |w| {
        w.write_all(report.render_text().as_bytes())
            .map_err(|e| Error::io(&a.out_report, e))
    })?;
    if let Some(path) = &a.out_cm {
        let mut buf = Vec::new();
        cm.write_csv(&mut buf)?;
        fs::write(path, buf).map_err(|e| Error::io(path, e))?;
    }
    if let Some(path) = &a.out_report_csv {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        fs::write(path, buf).map_err(|e| Error::io(path, e))?;
    }
    Ok(EXIT_OK)
}

fn cmd_trace(a: TraceArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let model = load_model_file(&a.model)?;
    let wave = read_wave(&a.input)?;
    let result = classify(&model, &wave, true)?;
    emit(&a.out, stdout, |w| {
        let io_err = |e| Error::io("<trace output>", e);
        let Some(trace) = &result.trace else {
            return writeln!(w, "{}: {} (network not run)", result.source_id, result.label).map_err(io_err);
        };
        match a.format {
            TraceFormat::Csv => write_trace_csv(trace, w),
            TraceFormat::Text => {
                writeln!(w, "fragment: {}", result.source_id).map_err(io_err)?;
                for (k, (label, p)) in model.class_labels.iter().zip(&model.stored_patterns).enumerate() {
                    writeln!(w, "stored {k:>2}   {p}  {label}").map_err(io_err)?;
                }
                for (i, (s, e)) in trace.states.iter().zip(&trace.energies).enumerate() {
                    writeln!(w, "iter {i:>3}   {s}  E={e:.6}").map_err(io_err)?;
                }
                let verdict = match result.matched.map(|m| m.kind) {
                    Some(MatchKind::Retrieval(k)) => format!("retrieval state {k}"),
                    Some(MatchKind::Reversed(k)) => format!("reversed state of {k}"),
                    _ if !trace.converged => "no convergence".to_string(),
                    _ => "spurious state".to_string(),
                };
                writeln!(
                    w,
                    "converged: {}  iterations: {}  final: {verdict}  label: {}",
                    trace.converged,
                    trace.iterations(),
                    result.label
                )
                .map_err(io_err)
            }
        }
    })?;
    Ok(EXIT_OK)
}

fn cmd_spectrum(a: SpectrumArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let wave = read_wave(&a.input)?;
    let cfg = EncodingConfig {
        fft_length: fft_length_opt(a.fft_length),
        ..Default::default()
    };
    let spec = compute_spectrum(&wave, &cfg)?;
    emit(&a.out, stdout, |w| {
        let mut csv = pipeline::csv_writer(w);
        csv.write_record(["freq_hz", "power"])?;
        for (f, p) in spec.bin_freqs.iter().zip(&spec.power) {
            csv.write_record([f.to_string(), p.to_string()])?;
        }
        csv.flush().map_err(|e| Error::io(&a.out, e))
    })?;
    Ok(EXIT_OK)
}

fn cmd_bench(a: BenchArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let model = load_model_file(&a.model)?;
    let inputs = discover_wavs(&a.input)?;
    let report = benchmark(&model, &inputs, a.runs, jobs_or_default(a.jobs))?;
    let _ = write!(stdout, "{}", report.render_text());
    Ok(EXIT_OK)
}

/// Rendered `--help` text of a subcommand.
pub fn subcommand_help(name: &str) -> Option<String> {
    let mut root = Cli::command();
    root.build();
    let sub = root.find_subcommand_mut(name)?;
    Some(sub.render_long_help().to_string())
}
