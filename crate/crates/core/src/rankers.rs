//! Baseline filter scorers: absolute Pearson correlation with the encoded
//! label, ReliefF, and column variance.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crowding::{crowding_scores, order_by_key, CrowdingError, CrowdingScore, FeatureRanking};
use crate::data::Dataset;

/// Default ReliefF neighbour count, clamped to what the smallest class allows.
pub const DEFAULT_RELIEFF_NEIGHBORS: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum RankError {
    #[error("class `{class}` has {count} samples; ReliefF with k={k} needs at least {}", k + 1)]
    ClassTooSmall { class: String, count: usize, k: usize },
    #[error("ReliefF neighbour count must be positive")]
    ZeroNeighbors,
    #[error("unknown ranking method `{0}` (expected crowding, pearson, relieff or variance)")]
    UnknownMethod(String),
    #[error(transparent)]
    Crowding(#[from] CrowdingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Crowding,
    Pearson,
    Relieff,
    Variance,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Crowding, Method::Pearson, Method::Relieff, Method::Variance];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Crowding => "crowding",
            Method::Pearson => "pearson",
            Method::Relieff => "relieff",
            Method::Variance => "variance",
        }
    }

    /// Column-group title used in report tables.
    pub fn title(self) -> &'static str {
        match self {
            Method::Crowding => "Crowding",
            Method::Pearson => "Pearson",
            Method::Relieff => "ReliefF",
            Method::Variance => "Variance",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = RankError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "crowding" => Ok(Method::Crowding),
            "pearson" => Ok(Method::Pearson),
            "relieff" => Ok(Method::Relieff),
            "variance" => Ok(Method::Variance),
            other => Err(RankError::UnknownMethod(other.to_string())),
        }
    }
}

/// Real-valued per-feature scores; higher is better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub method: Method,
    pub values: Vec<f64>,
}

impl ScoreVector {
    /// Descending ranking. Constant features carry no information and are
    /// placed after every non-constant feature, whatever their score.
    pub fn ranking(&self, dataset: &Dataset) -> FeatureRanking<f64> {
        let keys: Vec<(bool, f64)> = self
            .values
            .iter()
            .enumerate()
            .map(|(j, &v)| (!dataset.is_constant(j), v))
            .collect();
        let order = order_by_key(&keys).expect("datasets have at least one feature");
        FeatureRanking { order, scores: self.values.clone() }
    }
}

/// Ranking from any of the supported methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum MethodRanking {
    Crowding(FeatureRanking<CrowdingScore>),
    Pearson(FeatureRanking<f64>),
    Relieff(FeatureRanking<f64>),
    Variance(FeatureRanking<f64>),
}

impl MethodRanking {
    pub fn method(&self) -> Method {
        match self {
            MethodRanking::Crowding(_) => Method::Crowding,
            MethodRanking::Pearson(_) => Method::Pearson,
            MethodRanking::Relieff(_) => Method::Relieff,
            MethodRanking::Variance(_) => Method::Variance,
        }
    }

    pub fn order(&self) -> &[usize] {
        match self {
            MethodRanking::Crowding(r) => &r.order,
            MethodRanking::Pearson(r) | MethodRanking::Relieff(r) | MethodRanking::Variance(r) => &r.order,
        }
    }
}

/// Ranks the features of `dataset` with `method`. `relieff_k = None` uses
/// [`DEFAULT_RELIEFF_NEIGHBORS`] clamped to the smallest class.
pub fn rank_features(
    dataset: &Dataset,
    method: Method,
    relieff_k: Option<usize>,
) -> Result<MethodRanking, RankError> {
    Ok(match method {
        Method::Crowding => {
            let scores = crowding_scores(dataset)?;
            MethodRanking::Crowding(crate::crowding::rank_descending(&scores)?)
        }
        Method::Pearson => MethodRanking::Pearson(pearson_scores(dataset).ranking(dataset)),
        Method::Variance => MethodRanking::Variance(variance_scores(dataset).ranking(dataset)),
        Method::Relieff => {
            let k = match relieff_k {
                Some(k) => k,
                None => default_relieff_neighbors(dataset),
            };
            MethodRanking::Relieff(relieff_scores(dataset, k)?.ranking(dataset))
        }
    })
}

/// `|r|` between each feature and the encoded label (population Pearson).
pub fn pearson_scores(dataset: &Dataset) -> ScoreVector {
    let m = dataset.n_samples() as f64;
    let y: Vec<f64> = dataset.labels().iter().map(|&l| l as f64).collect();
    let y_mean = y.iter().sum::<f64>() / m;
    let y_dev: Vec<f64> = y.iter().map(|v| v - y_mean).collect();
    let y_ss: f64 = y_dev.iter().map(|d| d * d).sum();

    let values = (0..dataset.n_features())
        .map(|j| {
            if dataset.is_constant(j) {
                return 0.0;
            }
            let x_mean = dataset.features().column(j).sum::<f64>() / m;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (x, dy) in dataset.features().column(j).zip(&y_dev) {
                let dx = x - x_mean;
                sxy += dx * dy;
                sxx += dx * dx;
            }
            if sxx == 0.0 || y_ss == 0.0 {
                0.0
            } else {
                (sxy / (sxx.sqrt() * y_ss.sqrt())).abs().min(1.0)
            }
        })
        .collect();
    ScoreVector { method: Method::Pearson, values }
}

/// Population variance of each column.
pub fn variance_scores(dataset: &Dataset) -> ScoreVector {
    let m = dataset.n_samples() as f64;
    let values = (0..dataset.n_features())
        .map(|j| {
            // the mean of a constant column can be off by an ulp
            if dataset.is_constant(j) {
                return 0.0;
            }
            let mean = dataset.features().column(j).sum::<f64>() / m;
            dataset.features().column(j).map(|x| (x - mean) * (x - mean)).sum::<f64>() / m
        })
        .collect();
    ScoreVector { method: Method::Variance, values }
}

/// Largest feasible neighbour count not above the default.
pub fn default_relieff_neighbors(dataset: &Dataset) -> usize {
    let smallest = dataset.class_counts().into_iter().filter(|&c| c > 0).min().unwrap_or(1);
    DEFAULT_RELIEFF_NEIGHBORS.min(smallest.saturating_sub(1)).max(1)
}

/// ReliefF weights using every instance as a target.
///
/// `diff_j(a, b) = |a_j - b_j| / (max_j - min_j)` over the whole dataset and
/// neighbours are found by the sum of those diffs. For each instance the `k`
/// nearest hits and, per other class, the `k` nearest misses are taken
/// (distance ties by ascending sample index); misses are weighted by
/// `P(C) / (1 - P(class))`.
pub fn relieff_scores(dataset: &Dataset, k: usize) -> Result<ScoreVector, RankError> {
    if k == 0 {
        return Err(RankError::ZeroNeighbors);
    }
    let counts = dataset.class_counts();
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 && count < k + 1 {
            return Err(RankError::ClassTooSmall {
                class: dataset.label_names()[c].clone(),
                count,
                k,
            });
        }
    }

    let m = dataset.n_samples();
    let n = dataset.n_features();
    let labels = dataset.labels();
    let spans: Vec<f64> = (0..n)
        .map(|j| {
            let (lo, hi) = dataset
                .features()
                .column(j)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
            hi - lo
        })
        .collect();
    let diff = |a: usize, b: usize, j: usize| -> f64 {
        if spans[j] > 0.0 {
            (dataset.value(a, j) - dataset.value(b, j)).abs() / spans[j]
        } else {
            0.0
        }
    };
    let priors: Vec<f64> = counts.iter().map(|&c| c as f64 / m as f64).collect();

    let mut weights = vec![0.0; n];
    let mut by_class: Vec<Vec<(f64, usize)>> = vec![Vec::new(); counts.len()];
    for i in 0..m {
        for bucket in by_class.iter_mut() {
            bucket.clear();
        }
        for other in (0..m).filter(|&o| o != i) {
            let d: f64 = (0..n).map(|j| diff(i, other, j)).sum();
            by_class[labels[other]].push((d, other));
        }
        let own = labels[i];
        let mut delta = vec![0.0; n];
        for (c, bucket) in by_class.iter_mut().enumerate() {
            if bucket.is_empty() {
                continue;
            }
            bucket.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let near = &bucket[..k];
            let factor = if c == own { -1.0 } else { priors[c] / (1.0 - priors[own]) };
            for (j, d) in delta.iter_mut().enumerate() {
                let mean = near.iter().map(|&(_, o)| diff(i, o, j)).sum::<f64>() / k as f64;
                *d += factor * mean;
            }
        }
        for (w, d) in weights.iter_mut().zip(&delta) {
            *w += d;
        }
    }
    for w in weights.iter_mut() {
        *w /= m as f64;
    }
    Ok(ScoreVector { method: Method::Relieff, values: weights })
}
