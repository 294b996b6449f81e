//! Subcommands of the `imbalance` executable.
//!
//! Each command is a plain function over its parsed arguments so that the binary
//! stays a thin shell and tests can drive the same code paths in-process.

use std::ffi::OsString;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::collapse::{
    class_statistics, nc1, nc2, nc2_nn, per_class_nc1_all, per_class_nc2, CenterSet, CollapseError,
    FeatureMatrix, DEFAULT_RTOL,
};
use crate::frequency::{FrequencyError, FrequencyTable};
use crate::matcher::{read_concepts, scan_corpus, CompiledVocabulary, LemmaError, LemmaTable, MatchError};
use crate::sampler::{sample_vocabulary, SamplerError, SamplingMode};
use crate::stats::{
    binned_summary, correlation_report, format_float, write_bins_csv, PerClassTable, StatsError,
};
use crate::toy::{run_experiment, write_run_dir, ExperimentConfig, ToyError};

#[derive(Debug, Parser)]
#[command(
    name = "imbalance",
    version,
    about = "Class-imbalance diagnostics and vocabulary-subsampling experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count, per concept, the caption records that mention it.
    Scan(ScanArgs),
    /// Rank and linear correlations of per-class accuracy and prediction counts with frequency.
    Correlate(CorrelateArgs),
    /// Neural-collapse metrics of labeled embeddings.
    Nc(NcArgs),
    /// Train the synthetic prototype classifier and write a run directory.
    Train(TrainArgs),
    /// Draw one training vocabulary and print it.
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Concept list (JSON array of {class_id, names, negatives?}).
    #[arg(long)]
    pub concepts: PathBuf,
    /// Newline-delimited JSON caption records {id, text}.
    #[arg(long)]
    pub captions: PathBuf,
    /// Irregular lemma table, one `surface<TAB>lemma` per line.
    #[arg(long)]
    pub lemma: Option<PathBuf>,
    /// Number of worker shards.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Output frequency CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Per-class table with class_id, frequency, accuracy and pred_count columns.
    #[arg(long)]
    pub table: PathBuf,
    /// Also write accuracy binned by frequency to `<out stem>_binned.csv`.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Use log10(frequency + 1) for Pearson terms and log-spaced bins.
    #[arg(long)]
    pub log_freq: bool,
    /// Output report CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct NcArgs {
    /// Labeled embeddings (binary or CSV).
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Classifier vectors, one labeled row per class (binary or CSV).
    #[arg(long)]
    pub centers: Option<PathBuf>,
    /// Add one row per class.
    #[arg(long)]
    pub per_class: bool,
    /// Output metric CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Experiment config (JSON with `data` and `train` sections).
    #[arg(long)]
    pub config: PathBuf,
    /// Run directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Frequency CSV with contiguous class ids from 0.
    #[arg(long)]
    pub freq: PathBuf,
    /// Comma-separated ground-truth class ids of the batch.
    #[arg(long, value_delimiter = ',', required = true)]
    pub gt: Vec<u32>,
    /// Vocabulary size.
    #[arg(long)]
    pub size: usize,
    /// frequency or uniform.
    #[arg(long, default_value = "frequency")]
    pub mode: SamplingMode,
    /// Sampler seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Numerical,
}

/// A command failure with its exit status.
#[derive(Debug)]
pub struct CommandError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CommandError {
    pub fn input(message: impl fmt::Display) -> Self {
        Self { kind: ErrorKind::Input, message: message.to_string() }
    }

    pub fn numerical(message: impl fmt::Display) -> Self {
        Self { kind: ErrorKind::Numerical, message: message.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Input => 1,
            ErrorKind::Numerical => 2,
        }
    }
}

impl fmt::Display for CommandError {
    /// One line: `error: <input|numerical>: <reason>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ErrorKind::Input => "input",
            ErrorKind::Numerical => "numerical",
        };
        let flat = self.message.split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "error: {kind}: {flat}")
    }
}

impl std::error::Error for CommandError {}

macro_rules! input_errors {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CommandError {
            fn from(e: $ty) -> Self {
                CommandError::input(e)
            }
        }
    )*};
}

input_errors!(
    std::io::Error,
    csv::Error,
    MatchError,
    LemmaError,
    FrequencyError,
    StatsError,
    CollapseError,
    SamplerError
);

impl From<ToyError> for CommandError {
    fn from(e: ToyError) -> Self {
        match e {
            ToyError::Diverged { .. } => CommandError::numerical(e),
            other => CommandError::input(other),
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CommandError> {
    File::open(path).map(BufReader::new).map_err(|e| CommandError::input(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CommandError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CommandError::input(format!("{}: {e}", path.display())))
}

fn read_features(path: &Path) -> Result<FeatureMatrix, CommandError> {
    let bytes = fs::read(path).map_err(|e| CommandError::input(format!("{}: {e}", path.display())))?;
    FeatureMatrix::read_any(&bytes).map_err(|e| CommandError::input(format!("{}: {e}", path.display())))
}

/// Sibling of `out` named `<stem>_binned.csv`.
pub fn binned_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}_binned.csv"))
}

pub fn cmd_scan(args: &ScanArgs, stdout: &mut dyn Write) -> Result<FrequencyTable, CommandError> {
    let lemmas = match &args.lemma {
        Some(path) => LemmaTable::read(open(path)?)?,
        None => LemmaTable::new(),
    };
    let entries = read_concepts(open(&args.concepts)?)?;
    let vocab = CompiledVocabulary::compile(entries, &lemmas)?;
    let summary = scan_corpus(&vocab, &lemmas, open(&args.captions)?, args.threads)?;

    let names: std::collections::HashMap<u32, String> =
        vocab.entries().iter().map(|e| (e.class_id, e.canonical_name().to_string())).collect();
    summary.table.write_csv(create(&args.out)?, |c| names.get(&c).cloned())?;
    writeln!(
        stdout,
        "records={} malformed={} matched={}",
        summary.table.total_records, summary.malformed, summary.matched
    )?;
    Ok(summary.table)
}

pub fn cmd_correlate(args: &CorrelateArgs, stdout: &mut dyn Write) -> Result<(), CommandError> {
    let table = PerClassTable::read_csv(open(&args.table)?)?;
    let report = correlation_report(&table, args.log_freq)?;
    report.write_csv(create(&args.out)?)?;
    if let Some(n_bins) = args.bins {
        let bins = binned_summary(&table.frequencies(), &table.accuracies(), n_bins, args.log_freq)?;
        write_bins_csv(&bins, create(&binned_path(&args.out))?)?;
    }
    for (name, value) in report.rows() {
        writeln!(stdout, "{name}={value}")?;
    }
    Ok(())
}

pub fn cmd_nc(args: &NcArgs, stdout: &mut dyn Write) -> Result<(), CommandError> {
    let fm = read_features(&args.embeddings)?;
    let stats = class_statistics(&fm)?;
    let global = nc1(&stats, DEFAULT_RTOL)?;
    let means = CenterSet::from_class_means(&stats)?;
    let classes = stats.num_classes();

    let centers = match &args.centers {
        Some(path) => {
            let rows = read_features(path)?;
            if rows.dim() != fm.dim() {
                return Err(CommandError::input(format!(
                    "centers have dimension {} but embeddings have {}",
                    rows.dim(),
                    fm.dim()
                )));
            }
            if rows.len() != classes {
                return Err(CommandError::input(format!("{} centers for {classes} classes", rows.len())));
            }
            Some(CenterSet::from_feature_rows(&rows)?)
        }
        None => None,
    };

    let mut header = vec!["class_id", "nc1", "nc2", "nc2_nn"];
    if centers.is_some() {
        header.extend(["nc2_w", "nc2_nn_w"]);
    }
    let mut w = csv::Writer::from_writer(create(&args.out)?);
    w.write_record(&header)?;

    let mean_nn = |cs: &CenterSet| -> Result<f64, CollapseError> {
        let mut sum = 0.0;
        for c in 0..cs.len() {
            sum += nc2_nn(cs, c as u32)?;
        }
        Ok(sum / cs.len() as f64)
    };

    if args.per_class {
        let per_nc1 = per_class_nc1_all(&stats, &fm, DEFAULT_RTOL)?;
        for (c, v) in per_nc1.iter().enumerate() {
            let class = c as u32;
            let mut row = vec![
                class.to_string(),
                format_float(Some(v.value)),
                format_float(Some(per_class_nc2(&means, class)?)),
                format_float(Some(nc2_nn(&means, class)?)),
            ];
            if let Some(cs) = &centers {
                row.push(format_float(Some(per_class_nc2(cs, class)?)));
                row.push(format_float(Some(nc2_nn(cs, class)?)));
            }
            w.write_record(&row)?;
        }
    }

    let nc2_m = nc2(&means)?;
    let mut row = vec![
        "all".to_string(),
        format_float(Some(global.value)),
        format_float(Some(nc2_m)),
        format_float(Some(mean_nn(&means)?)),
    ];
    if let Some(cs) = &centers {
        row.push(format_float(Some(nc2(cs)?)));
        row.push(format_float(Some(mean_nn(cs)?)));
    }
    w.write_record(&row)?;
    w.flush()?;

    if global.degenerate {
        log::warn!("between-class covariance is numerically zero; nc1 reported as 0");
    }
    writeln!(stdout, "nc1={} nc2={}", format_float(Some(global.value)), format_float(Some(nc2_m)))?;
    Ok(())
}

pub fn cmd_train(args: &TrainArgs, stdout: &mut dyn Write) -> Result<(), CommandError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CommandError::input(format!("{}: {e}", args.config.display())))?;
    let config = ExperimentConfig::from_json(&text)?;
    let run = run_experiment(&config)?;
    let eval = run.evaluate()?;
    write_run_dir(&args.out, &run, &eval)?;
    writeln!(
        stdout,
        "epochs={} mean_acc={} tail_acc={} rho_pred_freq={}",
        run.history.len(),
        format_float(Some(eval.mean_acc)),
        format_float(Some(eval.tail_acc)),
        format_float(eval.report.rho_pred_freq)
    )?;
    Ok(())
}

pub fn cmd_sample(args: &SampleArgs, stdout: &mut dyn Write) -> Result<(), CommandError> {
    let freq = FrequencyTable::read_csv(open(&args.freq)?)?.dense()?;
    let vocab = sample_vocabulary(&args.gt, &freq, args.size, args.mode, args.seed)?;
    writeln!(stdout, "class_id,forced")?;
    for &c in &vocab.class_ids {
        writeln!(stdout, "{c},{}", u8::from(vocab.is_forced(c)))?;
    }
    Ok(())
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CommandError> {
    match &cli.command {
        Command::Scan(a) => cmd_scan(a, stdout).map(|_| ()),
        Command::Correlate(a) => cmd_correlate(a, stdout),
        Command::Nc(a) => cmd_nc(a, stdout),
        Command::Train(a) => cmd_train(a, stdout),
        Command::Sample(a) => cmd_sample(a, stdout),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// status. Help and version go to `stdout` with status 0; every failure is one
/// line on `stderr`.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as Clap;
            if matches!(e.kind(), Clap::DisplayHelp | Clap::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            let reason = e
                .render()
                .to_string()
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ")
                .to_string();
            let _ = writeln!(stderr, "{}", CommandError::input(reason));
            return 1;
        }
    };
    match run(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}
