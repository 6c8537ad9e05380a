//! Command-line front end.
//!
//! Exit codes: 0 success, 1 partial benchmark failure, 2 dataset error,
//! 3 usage or parameter error.

pub mod benchmark;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::{DataError, Dataset, LabelColumn};
use crate::eval::{repeated_eval, ClassifierConfig, ClassifierKind, EvalConfig, EvalError, DEFAULT_SEED};
use crate::rankers::{rank_features, Method, RankError};
use crate::selection::{filter_order, repeated_wrapper_order, SelectionError, SelectionMode};
use crate::stats::wilcoxon_rank_sum;

use report::{
    file_sha256, mode_str, to_json, AnyReport, DatasetInfo, FilterOutcome, Parameters, RankReport, RunManifest,
    SelectReport, SCHEMA_VERSION, TOOLKIT,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_DATASET: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

/// Environment variable holding the worker-pool size.
pub const THREADS_ENV: &str = "CROWDFS_THREADS";

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }

    pub fn dataset(message: impl Into<String>) -> Self {
        CliError { code: EXIT_DATASET, message: message.into() }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::dataset(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<RankError> for CliError {
    fn from(e: RankError) -> Self {
        CliError::usage(e.to_string())
    }
}

impl From<SelectionError> for CliError {
    fn from(e: SelectionError) -> Self {
        CliError::usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "crowdfs", version, about = "Crowding-distance feature ranking and selection")]
pub struct Cli {
    /// Worker threads (defaults to $CROWDFS_THREADS, then the number of CPUs).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank all features of a dataset.
    Rank(RankArgs),
    /// Select features with the filter or wrapper method and evaluate them.
    Select(SelectArgs),
    /// Run filter methods and the wrapper over several datasets.
    Benchmark(benchmark::BenchmarkArgs),
    /// Rank-sum test between the per-run accuracies of two reports.
    Compare(CompareArgs),
    /// Re-run the command recorded in a report's manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Crowding,
    Pearson,
    Relieff,
    Variance,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Crowding => Method::Crowding,
            MethodArg::Pearson => Method::Pearson,
            MethodArg::Relieff => Method::Relieff,
            MethodArg::Variance => Method::Variance,
        }
    }
}

impl From<Method> for MethodArg {
    fn from(m: Method) -> Self {
        match m {
            Method::Crowding => MethodArg::Crowding,
            Method::Pearson => MethodArg::Pearson,
            Method::Relieff => MethodArg::Relieff,
            Method::Variance => MethodArg::Variance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Filter,
    Wrapper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifierArg {
    Knn,
    LinearSvm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Json,
    Markdown,
    Csv,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// CSV file with a header row.
    pub dataset: PathBuf,
    /// Label column: a header name, `last`, or `auto` (`class`, else last).
    #[arg(long, default_value = "auto")]
    pub label_col: String,
    /// Key naming the dataset in reports (defaults to the file stem).
    #[arg(long)]
    pub name: Option<String>,
}

impl DatasetArgs {
    fn key(&self) -> String {
        self.name.clone().unwrap_or_else(|| dataset_key(&self.dataset))
    }

    fn load(&self) -> Result<(Dataset, DatasetInfo), CliError> {
        let ds = Dataset::load_csv(&self.dataset, &LabelColumn::parse(&self.label_col))?;
        let info = DatasetInfo::for_file(&self.key(), &self.dataset, &self.label_col)
            .map_err(|e| CliError::dataset(e.to_string()))?;
        Ok((ds, info))
    }
}

pub fn dataset_key(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "dataset".into())
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Crowding)]
    pub method: MethodArg,
    /// ReliefF neighbours (default 10, clamped to the smallest class).
    #[arg(long)]
    pub relieff_k: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    /// Number of features kept by the filter (required for --mode filter).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value_t = MethodArg::Crowding)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = ClassifierArg::Knn)]
    pub classifier: ClassifierArg,
    #[arg(long, default_value_t = 5)]
    pub knn_k: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub svm_lambda: f64,
    #[arg(long, default_value_t = 50)]
    pub svm_epochs: usize,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 30)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Wrapper early-stop accuracy in percent, in (0, 100].
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub relieff_k: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub report_a: PathBuf,
    pub report_b: PathBuf,
    /// Dataset key present in both reports.
    #[arg(long)]
    pub dataset: String,
    /// Pick the result with this method in report A.
    #[arg(long, value_enum)]
    pub method_a: Option<MethodArg>,
    #[arg(long, value_enum)]
    pub method_b: Option<MethodArg>,
    #[arg(long, value_enum)]
    pub mode_a: Option<ModeArg>,
    #[arg(long, value_enum)]
    pub mode_b: Option<ModeArg>,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    /// A rank or select report (JSON).
    pub report: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl SelectArgs {
    fn classifier(&self) -> ClassifierConfig {
        ClassifierConfig {
            kind: match self.classifier {
                ClassifierArg::Knn => ClassifierKind::Knn,
                ClassifierArg::LinearSvm => ClassifierKind::LinearSvm,
            },
            knn_k: self.knn_k,
            svm_lambda: self.svm_lambda,
            svm_epochs: self.svm_epochs,
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Reports go to `out`, diagnostics to `err`; returns the exit code.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let threads = match cli.threads.map(Ok).or_else(threads_from_env) {
        Some(Ok(0)) => return report_error(err, CliError::usage("thread count must be positive")),
        Some(Ok(t)) => Some(t),
        Some(Err(e)) => return report_error(err, e),
        None => None,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => return report_error(err, CliError::usage(e.to_string())),
    };
    match pool.install(|| dispatch(cli.command, out, err)) {
        Ok(code) => code,
        Err(e) => report_error(err, e),
    }
}

fn threads_from_env() -> Option<Result<usize, CliError>> {
    let v = std::env::var(THREADS_ENV).ok()?;
    Some(v.trim().parse().map_err(|_| CliError::usage(format!("{THREADS_ENV}={v} is not a thread count"))))
}

fn report_error(err: &mut (dyn Write + Send), e: CliError) -> i32 {
    let _ = writeln!(err, "error: {}", e.message);
    e.code
}

fn dispatch(command: Command, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32, CliError> {
    match command {
        Command::Rank(args) => {
            let report = cmd_rank(&args)?;
            emit(out, &args.output, || to_json(&report), || report.to_markdown(), || report.to_csv())?;
            Ok(EXIT_OK)
        }
        Command::Select(args) => {
            let report = cmd_select(&args)?;
            let _ = writeln!(err, "runtime: {:.3} s", report.runtime_secs());
            emit(out, &args.output, || to_json(&report), || report.to_markdown(), || report.to_csv())?;
            Ok(EXIT_OK)
        }
        Command::Benchmark(args) => benchmark::cmd_benchmark(&args, out, err),
        Command::Compare(args) => {
            let text = cmd_compare(&args)?;
            out.write_all(text.as_bytes()).map_err(|e| CliError::usage(e.to_string()))?;
            Ok(EXIT_OK)
        }
        Command::Rerun(args) => cmd_rerun(&args, out),
    }
}

fn emit(
    out: &mut (dyn Write + Send),
    output: &OutputArgs,
    json: impl FnOnce() -> String,
    markdown: impl FnOnce() -> String,
    csv: impl FnOnce() -> String,
) -> Result<(), CliError> {
    let text = match output.format {
        Format::Json => json(),
        Format::Markdown => markdown(),
        Format::Csv => csv(),
    };
    match &output.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::usage(e.to_string())),
    }
}

pub fn cmd_rank(args: &RankArgs) -> Result<RankReport, CliError> {
    let (ds, info) = args.data.load()?;
    let method: Method = args.method.into();
    let ranking = rank_features(&ds, method, args.relieff_k)?;
    let manifest = RunManifest {
        toolkit: TOOLKIT.into(),
        version: crate::VERSION.into(),
        command: "rank".into(),
        dataset: info,
        method,
        mode: None,
        parameters: args.relieff_k.map(|k| Parameters {
            k: None,
            classifier: ClassifierConfig::default(),
            folds: 0,
            repetitions: 0,
            seed: 0,
            threshold: None,
            relieff_k: Some(k),
        }),
    };
    Ok(RankReport::new(manifest, &ds, &ranking))
}

pub fn cmd_select(args: &SelectArgs) -> Result<SelectReport, CliError> {
    let classifier = args.classifier();
    classifier.validate()?;
    let eval_config = EvalConfig { folds: args.folds, repetitions: args.reps, seed: args.seed };
    eval_config.validate()?;
    let mode = match args.mode {
        ModeArg::Filter => SelectionMode::Filter,
        ModeArg::Wrapper => SelectionMode::Wrapper,
    };
    if mode == SelectionMode::Filter && args.k.is_none() {
        return Err(CliError::usage("--mode filter requires --k"));
    }
    if let Some(t) = args.threshold {
        if !(t > 0.0 && t <= 100.0) {
            return Err(SelectionError::BadThreshold(t).into());
        }
    }
    let (ds, info) = args.data.load()?;
    let method: Method = args.method.into();
    let manifest = RunManifest {
        toolkit: TOOLKIT.into(),
        version: crate::VERSION.into(),
        command: "select".into(),
        dataset: info,
        method,
        mode: Some(mode),
        parameters: Some(Parameters {
            k: if mode == SelectionMode::Filter { args.k } else { None },
            classifier,
            folds: args.folds,
            repetitions: args.reps,
            seed: args.seed,
            threshold: if mode == SelectionMode::Wrapper { args.threshold } else { None },
            relieff_k: args.relieff_k,
        }),
    };
    let key = manifest.dataset.key.clone();
    run_selection(&ds, key, manifest, args.k, args.threshold, args.relieff_k)
}

/// Shared by `select` and `benchmark`.
pub(crate) fn run_selection(
    ds: &Dataset,
    key: String,
    manifest: RunManifest,
    k: Option<usize>,
    threshold: Option<f64>,
    relieff_k: Option<usize>,
) -> Result<SelectReport, CliError> {
    let params = manifest.parameters.clone().expect("select manifests carry parameters");
    let mode = manifest.mode.expect("select manifests carry a mode");
    let method = manifest.method;
    let eval_config = EvalConfig { folds: params.folds, repetitions: params.repetitions, seed: params.seed };
    let ranking = rank_features(ds, method, relieff_k)?;
    let (filter, wrapper) = match mode {
        SelectionMode::Filter => {
            let k = k.ok_or_else(|| CliError::usage("filter selection requires k"))?;
            let sel = filter_order(ranking.order(), k)?;
            let evaluation = repeated_eval(ds, &sel.selected, &params.classifier, &eval_config)?;
            let selected_names = sel.selected.iter().map(|&j| ds.feature_names()[j].clone()).collect();
            (Some(FilterOutcome { selected: sel.selected, selected_names, evaluation }), None)
        }
        SelectionMode::Wrapper => {
            let rep = repeated_wrapper_order(ds, ranking.order(), &params.classifier, &eval_config, threshold)?;
            (None, Some(rep))
        }
    };
    Ok(SelectReport {
        schema_version: SCHEMA_VERSION,
        manifest,
        dataset: key,
        mode,
        method,
        n_samples: ds.n_samples(),
        n_features: ds.n_features(),
        filter,
        wrapper,
    })
}

fn read_report(path: &Path) -> Result<AnyReport, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{} is not a report: {e}", path.display())))
}

fn pick<'a>(
    report: &'a AnyReport,
    which: &str,
    dataset: &str,
    method: Option<MethodArg>,
    mode: Option<ModeArg>,
) -> Result<&'a SelectReport, CliError> {
    let matches: Vec<&SelectReport> = report
        .results()
        .into_iter()
        .filter(|r| r.dataset == dataset)
        .filter(|r| method.is_none_or(|m| r.method == Method::from(m)))
        .filter(|r| {
            mode.is_none_or(|m| {
                r.mode == if m == ModeArg::Filter { SelectionMode::Filter } else { SelectionMode::Wrapper }
            })
        })
        .collect();
    match matches.as_slice() {
        [one] if !one.per_run().is_empty() => Ok(one),
        [_] => Err(CliError::usage(format!("report {which} has no per-run accuracies for `{dataset}`"))),
        [] => Err(CliError::usage(format!("report {which} has no result for dataset `{dataset}`"))),
        _ => Err(CliError::usage(format!(
            "report {which} has several results for `{dataset}`; narrow with --method-{which}/--mode-{which}"
        ))),
    }
}

pub fn cmd_compare(args: &CompareArgs) -> Result<String, CliError> {
    let a = read_report(&args.report_a)?;
    let b = read_report(&args.report_b)?;
    let ra = pick(&a, "a", &args.dataset, args.method_a, args.mode_a)?;
    let rb = pick(&b, "b", &args.dataset, args.method_b, args.mode_b)?;
    let outcome = wilcoxon_rank_sum(ra.per_run(), rb.per_run()).map_err(|e| CliError::usage(e.to_string()))?;
    let label = |r: &SelectReport| format!("{} {}", r.method, mode_str(r.mode));
    Ok(match args.format {
        Format::Json => to_json(&serde_json::json!({
            "dataset": args.dataset,
            "a": label(ra),
            "b": label(rb),
            "outcome": outcome,
        })),
        Format::Markdown => format!(
            "| dataset | a | b | U | p | method | significant at 0.05 |\n|---|---|---|---:|---:|---|---|\n| {} | {} | {} | {} | {:.4} | {} | {} |\n",
            args.dataset,
            label(ra),
            label(rb),
            outcome.statistic,
            outcome.p_value,
            match outcome.method {
                crate::stats::TestMethod::Exact => "exact",
                crate::stats::TestMethod::NormalApproximation => "normal",
            },
            if outcome.significant_at_005 { "yes" } else { "no" }
        ),
        Format::Csv => format!(
            "dataset,a,b,u,p,significant\n{},{},{},{},{},{}\n",
            args.dataset,
            label(ra),
            label(rb),
            outcome.statistic,
            outcome.p_value,
            outcome.significant_at_005
        ),
    })
}

/// Rebuilds the original command from a report manifest and runs it.
fn cmd_rerun(args: &RerunArgs, out: &mut (dyn Write + Send)) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.report)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", args.report.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("not a report: {e}")))?;
    let manifest: RunManifest = serde_json::from_value(value["manifest"].clone())
        .map_err(|e| CliError::usage(format!("report has no usable manifest: {e}")))?;
    let path = PathBuf::from(&manifest.dataset.path);
    let digest = file_sha256(&path).map_err(|e| CliError::dataset(format!("{}: {e}", path.display())))?;
    if digest != manifest.dataset.sha256 {
        return Err(CliError::dataset(format!("{} changed since the report was written", path.display())));
    }
    let data = DatasetArgs {
        dataset: path,
        label_col: manifest.dataset.label_column.clone(),
        name: Some(manifest.dataset.key.clone()),
    };
    let output = OutputArgs { format: args.output.format, out: args.output.out.clone() };
    match manifest.command.as_str() {
        "rank" => {
            let rank = RankArgs {
                data,
                method: manifest.method.into(),
                relieff_k: manifest.parameters.as_ref().and_then(|p| p.relieff_k),
                output,
            };
            let report = cmd_rank(&rank)?;
            emit(out, &rank.output, || to_json(&report), || report.to_markdown(), || report.to_csv())?;
        }
        "select" => {
            let p = manifest.parameters.clone().ok_or_else(|| CliError::usage("manifest has no parameters"))?;
            let select = SelectArgs {
                data,
                mode: match manifest.mode {
                    Some(SelectionMode::Wrapper) => ModeArg::Wrapper,
                    _ => ModeArg::Filter,
                },
                k: p.k,
                method: manifest.method.into(),
                classifier: match p.classifier.kind {
                    ClassifierKind::Knn => ClassifierArg::Knn,
                    ClassifierKind::LinearSvm => ClassifierArg::LinearSvm,
                },
                knn_k: p.classifier.knn_k,
                svm_lambda: p.classifier.svm_lambda,
                svm_epochs: p.classifier.svm_epochs,
                folds: p.folds,
                reps: p.repetitions,
                seed: p.seed,
                threshold: p.threshold,
                relieff_k: p.relieff_k,
                output,
            };
            let report = cmd_select(&select)?;
            emit(out, &select.output, || to_json(&report), || report.to_markdown(), || report.to_csv())?;
        }
        other => return Err(CliError::usage(format!("cannot rerun a `{other}` report"))),
    }
    Ok(EXIT_OK)
}

/// Entry point for the binary.
pub fn main_entry() -> i32 {
    let mut stdout = std::io::stdout();
    let mut stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout, &mut stderr)
}
