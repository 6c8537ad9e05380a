//! `benchmark`: filter methods and the wrapper over a list of datasets.
//!
//! The configuration is TOML:
//!
//! ```toml
//! folds = 5
//! repetitions = 30
//! seed = 7
//! methods = ["crowding", "pearson", "relieff", "variance"]
//! wrapper = true
//!
//! [classifier]
//! kind = "knn"
//! knn_k = 5
//!
//! [[datasets]]
//! name = "Ionosphere"
//! path = "ionosphere.csv"   # relative to the config file
//! k = 10
//! ```

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{to_json, BenchmarkEntry, BenchmarkReport, DatasetInfo, Parameters, RunManifest, SCHEMA_VERSION, TOOLKIT};
use super::{run_selection, CliError, Format, EXIT_OK, EXIT_PARTIAL};
use crate::data::{Dataset, LabelColumn};
use crate::eval::{ClassifierConfig, EvalConfig, DEFAULT_SEED};
use crate::rankers::Method;
use crate::selection::SelectionMode;

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// TOML configuration listing datasets and methods.
    pub config: PathBuf,
    /// Directory receiving benchmark.json and benchmark.md.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Format printed on stdout.
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,
}

fn default_folds() -> usize {
    5
}

fn default_reps() -> usize {
    30
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_wrapper() -> bool {
    true
}

fn default_wrapper_method() -> Method {
    Method::Crowding
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_wrapper")]
    pub wrapper: bool,
    #[serde(default = "default_wrapper_method")]
    pub wrapper_method: Method,
    pub threshold: Option<f64>,
    pub relieff_k: Option<usize>,
    #[serde(default)]
    pub classifier: ClassifierConfig,
    #[serde(default)]
    pub datasets: Vec<DatasetEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub path: PathBuf,
    /// Features kept by the filter methods.
    pub k: usize,
    pub label_column: Option<String>,
}

impl BenchmarkConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: BenchmarkConfig =
            toml::from_str(text).map_err(|e| CliError::usage(format!("invalid benchmark config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.datasets.is_empty() {
            return Err(CliError::usage("benchmark config lists no datasets"));
        }
        if self.methods.is_empty() && !self.wrapper {
            return Err(CliError::usage("benchmark config runs no methods"));
        }
        EvalConfig { folds: self.folds, repetitions: self.repetitions, seed: self.seed }.validate()?;
        self.classifier.validate()?;
        if let Some(t) = self.threshold {
            if !(t > 0.0 && t <= 100.0) {
                return Err(CliError::usage(format!("threshold {t} is outside (0, 100]")));
            }
        }
        Ok(())
    }
}

pub fn cmd_benchmark(args: &BenchmarkArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", args.config.display())))?;
    let config = BenchmarkConfig::from_toml(&text)?;
    let base = args.config.parent().unwrap_or(Path::new("")).to_path_buf();
    let report = run_benchmark(&config, &base);

    for e in &report.entries {
        if let Some(msg) = &e.error {
            let _ = writeln!(err, "error: {}: {msg}", e.dataset);
        }
    }
    let markdown = report.to_markdown();
    let json = to_json(&report);
    if let Some(dir) = &args.out_dir {
        let write = |name: &str, body: &str| {
            std::fs::write(dir.join(name), body)
                .map_err(|e| CliError::usage(format!("cannot write {}: {e}", dir.join(name).display())))
        };
        std::fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("{}: {e}", dir.display())))?;
        write("benchmark.json", &json)?;
        write("benchmark.md", &markdown)?;
    }
    let stdout = match args.format {
        Format::Json => json,
        _ => markdown,
    };
    out.write_all(stdout.as_bytes()).map_err(|e| CliError::usage(e.to_string()))?;
    Ok(if report.failures() > 0 { EXIT_PARTIAL } else { EXIT_OK })
}

/// Runs every configured dataset; entries come back in config order.
pub fn run_benchmark(config: &BenchmarkConfig, base: &Path) -> BenchmarkReport {
    let entries = config.datasets.par_iter().map(|entry| run_entry(config, entry, base)).collect();
    BenchmarkReport { schema_version: SCHEMA_VERSION, toolkit: TOOLKIT.into(), version: crate::VERSION.into(), entries }
}

fn run_entry(config: &BenchmarkConfig, entry: &DatasetEntry, base: &Path) -> BenchmarkEntry {
    let path = base.join(&entry.path);
    let mut result = BenchmarkEntry {
        dataset: entry.name.clone(),
        path: path.to_string_lossy().into_owned(),
        k: entry.k,
        error: None,
        results: Vec::new(),
    };
    if let Err(e) = run_entry_inner(config, entry, &path, &mut result) {
        result.error = Some(e.message);
    }
    result
}

fn run_entry_inner(
    config: &BenchmarkConfig,
    entry: &DatasetEntry,
    path: &Path,
    result: &mut BenchmarkEntry,
) -> Result<(), CliError> {
    let label_col = entry.label_column.clone().unwrap_or_else(|| "auto".into());
    let ds = Dataset::load_csv(path, &LabelColumn::parse(&label_col))?;
    let info = DatasetInfo::for_file(&entry.name, path, &label_col).map_err(|e| CliError::dataset(e.to_string()))?;
    let manifest = |method: Method, mode: SelectionMode| RunManifest {
        toolkit: TOOLKIT.into(),
        version: crate::VERSION.into(),
        command: "select".into(),
        dataset: info.clone(),
        method,
        mode: Some(mode),
        parameters: Some(Parameters {
            k: (mode == SelectionMode::Filter).then_some(entry.k),
            classifier: config.classifier,
            folds: config.folds,
            repetitions: config.repetitions,
            seed: config.seed,
            threshold: if mode == SelectionMode::Wrapper { config.threshold } else { None },
            relieff_k: config.relieff_k,
        }),
    };
    for &method in &config.methods {
        let m = manifest(method, SelectionMode::Filter);
        result.results.push(run_selection(&ds, entry.name.clone(), m, Some(entry.k), None, config.relieff_k)?);
    }
    if config.wrapper {
        let m = manifest(config.wrapper_method, SelectionMode::Wrapper);
        result
            .results
            .push(run_selection(&ds, entry.name.clone(), m, None, config.threshold, config.relieff_k)?);
    }
    Ok(())
}
