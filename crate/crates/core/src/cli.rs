//! Command-line front end: `synth`, `extract`, `experiment`, `oracle` and
//! `table`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage, 3 data error, 4 oracle
//! mismatch.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::barcode::{Bar, Barcode};
use crate::error::Error;
use crate::imaging::{save_pgm, synth_texture, DatasetManifest, ManifestRecord, SplitTag, SynthClass};
use crate::persistence::oracle::{check_cubical, check_rips, trial_seed, Mismatch};
use crate::persistence::{cubical_persistence, rips_persistence, Diagram};
use crate::pipeline::experiment::{format_table, ClassifierKind, Selection, TableRow};
use crate::pipeline::learn::gradient_check;
use crate::pipeline::{
    build_feature_matrix, extract_subjects, run_experiment, split, Combine, ExperimentConfig, ExtractConfig,
    FeatureGrids, FeatureMatrix, Filtration, MetricsReport,
};
use crate::ulbp::Pattern;
use crate::vectorize::{Method, VectorizerConfig, DEFAULT_GAMMA, DEFAULT_LEVELS, DEFAULT_TROPICAL_R};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

/// Relative tolerance for the gradient check.
pub const GRADIENT_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Parser)]
#[command(
    name = "phfeat",
    version,
    about = "Persistent-homology features from grayscale images"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic two-class dataset (PGM images plus manifest.jsonl).
    Synth(SynthArgs),
    /// Compute barcodes for every subject and write the feature matrix.
    Extract(ExtractArgs),
    /// Split, standardize, optionally select, classify and score.
    Experiment(ExperimentArgs),
    /// Randomized equivalence checks against reference implementations.
    Oracle(OracleArgs),
    /// Print experiment reports side by side.
    Table(TableArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Number of subjects; must be even.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Images per subject.
    #[arg(long, default_value_t = 1)]
    pub slices: usize,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

fn parse_pattern(s: &str) -> std::result::Result<Pattern, String> {
    s.parse::<Pattern>().map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_enum, default_value_t = Filtration::Cubical)]
    pub filtration: Filtration,
    /// Landmark patterns such as G4R1,G2R3 (rips only).
    #[arg(long, value_delimiter = ',', value_parser = parse_pattern)]
    pub patterns: Vec<Pattern>,
    /// One of bc, ps, es, pl, tc.
    #[arg(long, value_parser = parse_method, default_value = "bc")]
    pub vectorizer: Method,
    #[arg(long, value_enum, default_value_t = Combine::Concat)]
    pub combine: Combine,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    pub gamma: usize,
    #[arg(long, default_value_t = DEFAULT_LEVELS)]
    pub levels: usize,
    #[arg(long, default_value_t = DEFAULT_TROPICAL_R)]
    pub r: u32,
    /// Rips scale cap; defaults to the largest pairwise distance.
    #[arg(long)]
    pub max_scale: Option<f64>,
    /// Fit grid bounds on the training part of this split only.
    #[arg(long)]
    pub split_seed: Option<u64>,
    #[arg(long, default_value_t = 0.2)]
    pub test_frac: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, value_enum, default_value_t = ClassifierKind::Logreg)]
    pub classifier: ClassifierKind,
    #[arg(long, value_enum, default_value_t = Selection::None)]
    pub select: Selection,
    /// L1 penalty for lasso; searched over a fixed grid when omitted.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 0.2)]
    pub test_frac: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Neighbours for knn.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// L2 penalty for logreg.
    #[arg(long, default_value_t = 1e-2)]
    pub l2: f64,
    /// Row label in the printed table; defaults to the features file stem.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Cubical,
    Rips,
    Gradients,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub check: Check,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shift every finite death by one to confirm the harness notices.
    #[arg(long, hide = true)]
    pub mutate: bool,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
}

/// Written by `experiment`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub name: String,
    pub features: PathBuf,
    pub vectorizer: String,
    pub config: ExperimentConfig,
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    pub positive_label: String,
    pub lambda: Option<f64>,
    pub selected_features: Vec<String>,
    pub metrics: MetricsReport,
    pub predictions: Vec<crate::pipeline::experiment::Prediction>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn table_row(&self) -> TableRow {
        TableRow {
            method: self.name.clone(),
            vectorizer: self.vectorizer.clone(),
            classifier: self.config.classifier.short_name().to_string(),
            metrics: self.metrics,
        }
    }
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_) => EXIT_USAGE,
            Error::File { .. } | Error::Io(_) => EXIT_IO,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> CmdResult {
    match cli.command {
        Command::Synth(a) => synth(&a, out),
        Command::Extract(a) => extract(&a, out),
        Command::Experiment(a) => experiment(&a, out),
        Command::Oracle(a) => oracle(&a, out),
        Command::Table(a) => table(&a, out),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Failure + '_ {
    move |e| Error::file(path, e).into()
}

fn say(out: &mut dyn Write, text: &str) -> CmdResult {
    out.write_all(text.as_bytes()).map_err(|e| Failure::from(Error::Io(e)))
}

pub fn synth(a: &SynthArgs, out: &mut dyn Write) -> CmdResult {
    if a.n == 0 || !a.n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("--n must be a positive even number, got {}", a.n)).into());
    }
    if a.slices == 0 {
        return Err(Error::InvalidArgument("--slices must be at least 1".into()).into());
    }
    fs::create_dir_all(&a.out).map_err(io_err(&a.out))?;
    let mut records = Vec::with_capacity(a.n);
    for i in 0..a.n {
        let class = if i % 2 == 0 {
            SynthClass::Holes1
        } else {
            SynthClass::Holes2
        };
        let id = format!("s{i:04}");
        let mut images = Vec::with_capacity(a.slices);
        for k in 0..a.slices {
            let file = if a.slices == 1 {
                format!("{id}.pgm")
            } else {
                format!("{id}_{k:02}.pgm")
            };
            let img = synth_texture(class, a.size, trial_seed(a.seed, i * a.slices + k))?;
            let path = a.out.join(&file);
            fs::write(&path, save_pgm(&img)?).map_err(io_err(&path))?;
            images.push(PathBuf::from(file));
        }
        records.push(ManifestRecord {
            id,
            label: class.name().to_string(),
            images,
            split: None,
        });
    }
    let manifest = DatasetManifest::new(records, &a.out)?;
    let path = a.out.join("manifest.jsonl");
    let mut buf = Vec::new();
    manifest.write_jsonl(&mut buf)?;
    fs::write(&path, buf).map_err(io_err(&path))?;
    say(out, &format!("wrote {} subjects to {}\n", a.n, path.display()))
}

pub fn extract(a: &ExtractArgs, out: &mut dyn Write) -> CmdResult {
    let vectorizer = VectorizerConfig {
        method: a.vectorizer,
        gamma: a.gamma,
        levels: a.levels,
        r: a.r,
    };
    let mut cfg = ExtractConfig::new(a.filtration, vectorizer, a.combine).with_patterns(a.patterns.clone());
    cfg.max_scale = a.max_scale;
    cfg.validate()?;

    let clock = Instant::now();
    let manifest = DatasetManifest::read(&a.manifest)?;
    let subjects = extract_subjects(&manifest, &cfg)?;
    log::info!("barcodes for {} subjects in {:?}", subjects.len(), clock.elapsed());

    let labels: Vec<String> = manifest.records.iter().map(|r| r.label.clone()).collect();
    let grid_rows: Vec<usize> = match a.split_seed {
        Some(seed) => split(&labels, a.test_frac, seed)?.0,
        None if manifest.records.iter().any(|r| r.split.is_some()) => manifest
            .records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.split == Some(SplitTag::Train))
            .map(|(i, _)| i)
            .collect(),
        None => (0..subjects.len()).collect(),
    };
    let grids = FeatureGrids::fit(grid_rows.iter().map(|&i| &subjects[i]));
    let matrix = build_feature_matrix(&subjects, &cfg, &grids)?;

    let mut buf = Vec::new();
    matrix.write_csv(&mut buf)?;
    fs::write(&a.out, buf).map_err(io_err(&a.out))?;
    say(
        out,
        &format!(
            "wrote {} x {} feature matrix to {}\n",
            matrix.n_rows(),
            matrix.n_cols(),
            a.out.display()
        ),
    )
}

/// Human name of the vectorizer behind a matrix's column labels.
fn vectorizer_name(columns: &[String]) -> String {
    let codes: std::collections::BTreeSet<&str> = columns.iter().filter_map(|c| c.split('_').nth(1)).collect();
    let names: Vec<&str> = codes
        .iter()
        .map(|c| c.parse::<Method>().map(Method::name).unwrap_or(c))
        .collect();
    names.join("+")
}

pub fn experiment(a: &ExperimentArgs, out: &mut dyn Write) -> CmdResult {
    let file = fs::File::open(&a.features).map_err(io_err(&a.features))?;
    let matrix = FeatureMatrix::read_csv(std::io::BufReader::new(file))?;
    let cfg = ExperimentConfig {
        classifier: a.classifier,
        selection: a.select,
        test_fraction: a.test_frac,
        seed: a.seed,
        lambda: a.lambda,
        knn_k: a.k,
        l2: a.l2,
    };
    let outcome = run_experiment(&matrix, &cfg)?;
    let name = a.name.clone().unwrap_or_else(|| {
        a.features
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let report = RunReport {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        name,
        features: a.features.clone(),
        vectorizer: vectorizer_name(&matrix.columns),
        config: cfg,
        n_train: outcome.n_train,
        n_test: outcome.n_test,
        n_features: outcome.n_features,
        positive_label: outcome.positive_label,
        lambda: outcome.lambda,
        selected_features: outcome.selected_features,
        metrics: outcome.metrics,
        predictions: outcome.predictions,
        timings_ms: outcome.timings_ms,
    };
    if let Some(path) = &a.out {
        let mut text = serde_json::to_string_pretty(&report).map_err(Error::from)?;
        text.push('\n');
        fs::write(path, text).map_err(io_err(path))?;
    }
    say(out, &format_table(&[report.table_row()]))
}

pub fn table(a: &TableArgs, out: &mut dyn Write) -> CmdResult {
    let mut rows = Vec::with_capacity(a.reports.len());
    for path in &a.reports {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let report: RunReport = serde_json::from_str(&text).map_err(Error::from)?;
        rows.push(report.table_row());
    }
    say(out, &format_table(&rows))
}

fn shift_deaths(b: &Barcode) -> Barcode {
    let bars = b
        .iter()
        .map(|bar| {
            if bar.essential {
                *bar
            } else {
                Bar::new(bar.birth, bar.death + 1.0).expect("death grows")
            }
        })
        .collect();
    Barcode::from_bars(b.dim(), bars)
}

fn mutated(d: Diagram) -> Diagram {
    Diagram {
        dim0: shift_deaths(&d.dim0),
        dim1: shift_deaths(&d.dim1),
    }
}

pub fn oracle(a: &OracleArgs, out: &mut dyn Write) -> CmdResult {
    let result: std::result::Result<usize, Mismatch> = match (a.check, a.mutate) {
        (Check::Cubical, false) => check_cubical(a.trials, a.seed, cubical_persistence),
        (Check::Cubical, true) => check_cubical(a.trials, a.seed, |img| mutated(cubical_persistence(img))),
        (Check::Rips, false) => check_rips(a.trials, a.seed, rips_persistence),
        (Check::Rips, true) => check_rips(a.trials, a.seed, |c, s| mutated(rips_persistence(c, s))),
        (Check::Gradients, true) => {
            return Err(Error::InvalidArgument("--mutate applies to cubical and rips only".into()).into())
        }
        (Check::Gradients, false) => (0..a.trials)
            .map(|i| (i, trial_seed(a.seed, i)))
            .find_map(|(i, s)| {
                let err = gradient_check(s);
                (err.is_nan() || err >= GRADIENT_TOLERANCE).then(|| Mismatch {
                    trial: i,
                    seed: s,
                    detail: format!("relative gradient error {err:e}"),
                })
            })
            .map_or(Ok(a.trials), Err),
    };
    let name = format!("{:?}", a.check).to_lowercase();
    match result {
        Ok(n) => say(out, &format!("{name}: {n} trials, 0 mismatches (seed {})\n", a.seed)),
        Err(m) => Err(Failure {
            code: EXIT_MISMATCH,
            message: format!(
                "{name} mismatch at {m}; rerun with --seed {} --trials {}",
                a.seed,
                m.trial + 1
            ),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let code = run_from(std::iter::once("phfeat").chain(args.iter().copied()), &mut out);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(
            run_args(&["extract", "--manifest", "m", "--vectorizer", "xx", "--out", "o"]).0,
            2
        );
        assert_eq!(run_args(&["bogus"]).0, 2);
        assert_eq!(run_args(&["oracle", "--check", "gradients", "--mutate"]).0, 2);
    }

    #[test]
    fn oracle_passes_and_mutation_fails() {
        let (code, text) = run_args(&["oracle", "--check", "cubical", "--trials", "20", "--seed", "1"]);
        assert_eq!(code, 0, "{text}");
        assert!(text.contains("0 mismatches"));
        assert_eq!(
            run_args(&["oracle", "--check", "cubical", "--trials", "20", "--mutate"]).0,
            4
        );
        assert_eq!(
            run_args(&["oracle", "--check", "rips", "--trials", "20", "--mutate"]).0,
            4
        );
        assert_eq!(run_args(&["oracle", "--check", "gradients", "--trials", "10"]).0, 0);
    }

    #[test]
    fn odd_subject_count_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(run_args(&["synth", "--out", out, "--n", "3"]).0, 2);
    }

    #[test]
    fn vectorizer_names() {
        let cols: Vec<String> = vec!["d0_bc_000".into(), "d1_bc_000".into()];
        assert_eq!(vectorizer_name(&cols), "Betti Curve");
    }
}
