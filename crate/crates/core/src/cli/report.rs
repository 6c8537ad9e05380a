//! Report documents emitted by the command-line tool.
//!
//! JSON is the canonical form: struct fields serialize in declaration order
//! and floats use the shortest round-trip representation, so parsing a
//! report and emitting it again reproduces the same bytes. Markdown and CSV
//! renderings print accuracies with two decimals.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::crowding::CrowdingScore;
use crate::data::Dataset;
use crate::eval::{ClassifierConfig, EvalReport};
use crate::rankers::{Method, MethodRanking};
use crate::selection::{SelectionMode, WrapperReport};

/// Bumped whenever a report field changes meaning or shape.
pub const SCHEMA_VERSION: u32 = 1;

pub const TOOLKIT: &str = "crowdfs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub key: String,
    pub path: String,
    pub sha256: String,
    pub label_column: String,
}

impl DatasetInfo {
    pub fn for_file(key: &str, path: &Path, label_column: &str) -> std::io::Result<Self> {
        Ok(DatasetInfo {
            key: key.to_string(),
            path: path.to_string_lossy().into_owned(),
            sha256: file_sha256(path)?,
            label_column: label_column.to_string(),
        })
    }
}

pub fn file_sha256(path: &Path) -> std::io::Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub k: Option<usize>,
    pub classifier: ClassifierConfig,
    pub folds: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub threshold: Option<f64>,
    pub relieff_k: Option<usize>,
}

/// Everything needed to reproduce a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub toolkit: String,
    pub version: String,
    pub command: String,
    pub dataset: DatasetInfo,
    pub method: Method,
    pub mode: Option<SelectionMode>,
    pub parameters: Option<Parameters>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFeature {
    pub rank: usize,
    pub index: usize,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite_sum: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub schema_version: u32,
    pub manifest: RunManifest,
    pub n_samples: usize,
    pub n_features: usize,
    pub ranking: Vec<RankedFeature>,
}

impl RankReport {
    pub fn new(manifest: RunManifest, dataset: &Dataset, ranking: &MethodRanking) -> Self {
        let names = dataset.feature_names();
        let entry = |rank: usize, index: usize| RankedFeature {
            rank: rank + 1,
            index,
            name: names[index].clone(),
            score: None,
            boundary_count: None,
            finite_sum: None,
        };
        let ranking = match ranking {
            MethodRanking::Crowding(r) => r
                .order
                .iter()
                .enumerate()
                .map(|(rank, &j)| {
                    let CrowdingScore { boundary_count, finite_sum } = r.scores[j];
                    RankedFeature { boundary_count: Some(boundary_count), finite_sum: Some(finite_sum), ..entry(rank, j) }
                })
                .collect(),
            MethodRanking::Pearson(r) | MethodRanking::Relieff(r) | MethodRanking::Variance(r) => r
                .order
                .iter()
                .enumerate()
                .map(|(rank, &j)| RankedFeature { score: Some(r.scores[j]), ..entry(rank, j) })
                .collect(),
        };
        RankReport {
            schema_version: SCHEMA_VERSION,
            manifest,
            n_samples: dataset.n_samples(),
            n_features: dataset.n_features(),
            ranking,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,index,name,score,boundary_count,finite_sum\n");
        for f in &self.ranking {
            let opt = |v: Option<String>| v.unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                f.rank,
                f.index,
                f.name,
                opt(f.score.map(|v| v.to_string())),
                opt(f.boundary_count.map(|v| v.to_string())),
                opt(f.finite_sum.map(|v| v.to_string()))
            );
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "Ranking of `{}` by {} ({} samples, {} features)\n\n",
            self.manifest.dataset.key, self.manifest.method, self.n_samples, self.n_features
        );
        let crowding = self.manifest.method == Method::Crowding;
        if crowding {
            out.push_str("| rank | feature | boundary count | finite sum |\n|---:|---|---:|---:|\n");
        } else {
            out.push_str("| rank | feature | score |\n|---:|---|---:|\n");
        }
        for f in &self.ranking {
            if crowding {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {:.6} |",
                    f.rank,
                    f.name,
                    f.boundary_count.unwrap_or(0),
                    f.finite_sum.unwrap_or(0.0)
                );
            } else {
                let _ = writeln!(out, "| {} | {} | {:.6} |", f.rank, f.name, f.score.unwrap_or(0.0));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub selected: Vec<usize>,
    pub selected_names: Vec<String>,
    pub evaluation: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectReport {
    pub schema_version: u32,
    pub manifest: RunManifest,
    pub dataset: String,
    pub mode: SelectionMode,
    pub method: Method,
    pub n_samples: usize,
    pub n_features: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wrapper: Option<WrapperReport>,
}

/// Accuracy row shared by filter and wrapper results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyRow {
    pub mean: f64,
    pub std: f64,
    pub worst: f64,
    pub best: f64,
}

impl SelectReport {
    pub fn per_run(&self) -> &[f64] {
        match (&self.filter, &self.wrapper) {
            (Some(f), _) => &f.evaluation.per_run,
            (None, Some(w)) => &w.per_run,
            (None, None) => &[],
        }
    }

    pub fn row(&self) -> Option<AccuracyRow> {
        match (&self.filter, &self.wrapper) {
            (Some(f), _) => {
                let e = &f.evaluation;
                Some(AccuracyRow { mean: e.mean, std: e.std, worst: e.worst, best: e.best })
            }
            (None, Some(w)) => Some(AccuracyRow { mean: w.mean, std: w.std, worst: w.worst, best: w.best }),
            (None, None) => None,
        }
    }

    /// "# features" column: the filter's k, or `size/n` for the wrapper's
    /// best repetition.
    pub fn features_column(&self) -> String {
        match (&self.filter, &self.wrapper) {
            (Some(f), _) => f.selected.len().to_string(),
            (None, Some(w)) => format!("{}/{}", w.features_for_best, w.n_features),
            (None, None) => String::new(),
        }
    }

    pub fn runtime_secs(&self) -> f64 {
        match (&self.filter, &self.wrapper) {
            (Some(f), _) => f.evaluation.runtime_secs,
            (None, Some(w)) => w.runtime_secs,
            (None, None) => 0.0,
        }
    }

    pub fn to_markdown(&self) -> String {
        let feature_header = match self.mode {
            SelectionMode::Filter => "# features selected",
            SelectionMode::Wrapper => "# features for best accuracy",
        };
        let mut out = format!("| dataset | method | {feature_header} | mean | std | worst | best |\n");
        out.push_str("|---|---|---:|---:|---:|---:|---:|\n");
        if let Some(r) = self.row() {
            let _ = writeln!(
                out,
                "| {} | {} {} | {} | {:.2} | {:.2} | {:.2} | {:.2} |",
                self.dataset,
                self.method,
                mode_str(self.mode),
                self.features_column(),
                r.mean,
                r.std,
                r.worst,
                r.best
            );
        }
        if let Some(f) = &self.filter {
            let _ = writeln!(out, "\nselected: {}", f.selected_names.join(", "));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,mode,method,features,mean,std,worst,best\n");
        if let Some(r) = self.row() {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.2},{:.2},{:.2},{:.2}",
                self.dataset,
                mode_str(self.mode),
                self.method,
                self.features_column(),
                r.mean,
                r.std,
                r.worst,
                r.best
            );
        }
        out
    }
}

pub fn mode_str(mode: SelectionMode) -> &'static str {
    match mode {
        SelectionMode::Filter => "filter",
        SelectionMode::Wrapper => "wrapper",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkEntry {
    pub dataset: String,
    pub path: String,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub results: Vec<SelectReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub schema_version: u32,
    pub toolkit: String,
    pub version: String,
    pub entries: Vec<BenchmarkEntry>,
}

impl BenchmarkReport {
    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.error.is_some()).count()
    }

    /// Filter table (one column group per method) followed by the wrapper
    /// table.
    pub fn to_markdown(&self) -> String {
        let mut methods: Vec<Method> = Vec::new();
        for e in &self.entries {
            for r in e.results.iter().filter(|r| r.mode == SelectionMode::Filter) {
                if !methods.contains(&r.method) {
                    methods.push(r.method);
                }
            }
        }
        let mut out = String::new();
        if !methods.is_empty() {
            out.push_str("## Filter methods\n\n| dataset | # features selected |");
            for m in &methods {
                let _ = write!(out, " {0} mean | {0} std | {0} worst | {0} best |", m.title());
            }
            out.push_str("\n|---|---:|");
            out.push_str(&"---:|".repeat(4 * methods.len()));
            out.push('\n');
            for e in &self.entries {
                if e.error.is_some() {
                    continue;
                }
                let _ = write!(out, "| {} | {} |", e.dataset, e.k);
                for m in &methods {
                    match e.results.iter().find(|r| r.mode == SelectionMode::Filter && r.method == *m) {
                        Some(r) => {
                            let row = r.row().expect("filter report has an evaluation");
                            let _ = write!(out, " {:.2} | {:.2} | {:.2} | {:.2} |", row.mean, row.std, row.worst, row.best);
                        }
                        None => out.push_str(" | | | |"),
                    }
                }
                out.push('\n');
            }
        }
        let wrappers: Vec<(&BenchmarkEntry, &SelectReport)> = self
            .entries
            .iter()
            .flat_map(|e| e.results.iter().filter(|r| r.mode == SelectionMode::Wrapper).map(move |r| (e, r)))
            .collect();
        if !wrappers.is_empty() {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str("## Wrapper\n\n| dataset | method | # features for best accuracy | mean | std | worst | best |\n");
            out.push_str("|---|---|---:|---:|---:|---:|---:|\n");
            for (e, r) in wrappers {
                let row = r.row().expect("wrapper report has runs");
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {:.2} | {:.2} | {:.2} | {:.2} |",
                    e.dataset,
                    r.method,
                    r.features_column(),
                    row.mean,
                    row.std,
                    row.worst,
                    row.best
                );
            }
        }
        let failed: Vec<&BenchmarkEntry> = self.entries.iter().filter(|e| e.error.is_some()).collect();
        if !failed.is_empty() {
            out.push_str("\n## Failures\n\n");
            for e in failed {
                let _ = writeln!(out, "- {}: {}", e.dataset, e.error.as_deref().unwrap_or(""));
            }
        }
        out
    }
}

/// Either kind of accuracy report, for `compare`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnyReport {
    Benchmark(BenchmarkReport),
    Select(Box<SelectReport>),
}

impl AnyReport {
    pub fn results(&self) -> Vec<&SelectReport> {
        match self {
            AnyReport::Benchmark(b) => b.entries.iter().flat_map(|e| e.results.iter()).collect(),
            AnyReport::Select(s) => vec![s.as_ref()],
        }
    }
}

/// Canonical JSON text (pretty-printed, trailing newline).
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}
