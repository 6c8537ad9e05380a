//! Crowding distance of features, with samples playing the role of
//! objectives.
//!
//! For every sample the features are sorted by value. The two features at
//! the ends of the sorted order are boundary features for that sample; every
//! interior feature accumulates the gap between its two sorted neighbours,
//! normalised by the sample's value range. Boundary features would get an
//! infinite distance in the NSGA-II formulation. Here they are counted
//! instead, and scores compare lexicographically on
//! `(boundary_count, finite_sum)` so that features remain totally ordered.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;

#[derive(Debug, Error, PartialEq)]
pub enum CrowdingError {
    #[error("crowding distance needs at least 2 features, got {0}")]
    TooFewFeatures(usize),
    #[error("matrix of {len} values is not a whole number of {n_features}-wide rows")]
    Shape { len: usize, n_features: usize },
    #[error("non-finite value at sample {sample}, feature {feature}")]
    NonFinite { sample: usize, feature: usize },
    #[error("cannot rank an empty score list")]
    EmptyScores,
}

/// Crowding distance of one feature summed over all samples.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CrowdingScore {
    /// Number of samples in which the feature is the first or last in
    /// sorted order.
    pub boundary_count: u32,
    /// Sum of normalised neighbour gaps over the samples where the feature
    /// is interior.
    pub finite_sum: f64,
}

impl CrowdingScore {
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.boundary_count
            .cmp(&other.boundary_count)
            .then_with(|| self.finite_sum.total_cmp(&other.finite_sum))
    }
}

/// Total order used by [`rank_descending`]; greater means more preferred.
pub trait RankKey {
    fn rank_cmp(&self, other: &Self) -> Ordering;
}

impl RankKey for CrowdingScore {
    fn rank_cmp(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
}

impl RankKey for f64 {
    fn rank_cmp(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }
}

impl<A: RankKey, B: RankKey> RankKey for (A, B) {
    fn rank_cmp(&self, other: &Self) -> Ordering {
        self.0.rank_cmp(&other.0).then_with(|| self.1.rank_cmp(&other.1))
    }
}

impl RankKey for bool {
    fn rank_cmp(&self, other: &Self) -> Ordering {
        self.cmp(other)
    }
}

/// Features ordered from most to least preferred, with the scores that
/// produced the order (indexed by original feature position).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking<S> {
    pub order: Vec<usize>,
    pub scores: Vec<S>,
}

impl<S> FeatureRanking<S> {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Position of each feature in `order`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (rank, &f) in self.order.iter().enumerate() {
            pos[f] = rank;
        }
        pos
    }
}

/// Sorts features by descending score; equal scores keep ascending index.
pub fn rank_descending<S: RankKey + Clone>(scores: &[S]) -> Result<FeatureRanking<S>, CrowdingError> {
    let keys: Vec<&S> = scores.iter().collect();
    let order = order_by_key(&keys)?;
    Ok(FeatureRanking { order, scores: scores.to_vec() })
}

/// Descending order of arbitrary keys, ties by ascending index.
pub(crate) fn order_by_key<K: RankKey>(keys: &[K]) -> Result<Vec<usize>, CrowdingError> {
    if keys.is_empty() {
        return Err(CrowdingError::EmptyScores);
    }
    let mut order: Vec<usize> = (0..keys.len()).collect();
    // stable sort keeps ascending index among equal keys
    order.sort_by(|&a, &b| keys[b].rank_cmp(&keys[a]));
    Ok(order)
}

impl<K: RankKey> RankKey for &K {
    fn rank_cmp(&self, other: &Self) -> Ordering {
        (**self).rank_cmp(*other)
    }
}

/// Crowding scores of every feature of `dataset`.
pub fn crowding_scores(dataset: &Dataset) -> Result<Vec<CrowdingScore>, CrowdingError> {
    crowding_scores_of(dataset.features().as_slice(), dataset.n_features())
}

/// Crowding scores over a raw row-major matrix with `n_features` columns.
/// Each row is one sample. Any number of rows (including zero) is accepted.
pub fn crowding_scores_of(values: &[f64], n_features: usize) -> Result<Vec<CrowdingScore>, CrowdingError> {
    if n_features < 2 {
        return Err(CrowdingError::TooFewFeatures(n_features));
    }
    if !values.len().is_multiple_of(n_features) {
        return Err(CrowdingError::Shape { len: values.len(), n_features });
    }
    if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
        return Err(CrowdingError::NonFinite { sample: idx / n_features, feature: idx % n_features });
    }

    let mut scores = vec![CrowdingScore::default(); n_features];
    // Samples are processed in parallel in blocks; each block's per-sample
    // contributions are folded into `scores` strictly in sample order so the
    // floating-point sums match a sequential pass bit for bit.
    const BLOCK: usize = 64;
    for block in values.chunks(n_features * BLOCK) {
        let contributions: Vec<Option<SampleContribution>> =
            block.par_chunks(n_features).map(sample_contribution).collect();
        for c in contributions.into_iter().flatten() {
            scores[c.low].boundary_count += 1;
            scores[c.high].boundary_count += 1;
            for (&feature, &term) in c.interior.iter().zip(&c.terms) {
                scores[feature].finite_sum += term;
            }
        }
    }
    Ok(scores)
}

struct SampleContribution {
    low: usize,
    high: usize,
    interior: Vec<usize>,
    terms: Vec<f64>,
}

/// Contribution of one sample, or `None` when its values are all equal.
fn sample_contribution(row: &[f64]) -> Option<SampleContribution> {
    let n = row.len();
    let mut sorted: Vec<usize> = (0..n).collect();
    // values are finite, so partial_cmp is total here; stable on index
    sorted.sort_by(|&a, &b| row[a].partial_cmp(&row[b]).unwrap_or(Ordering::Equal));
    let range = row[sorted[n - 1]] - row[sorted[0]];
    if range == 0.0 {
        return None;
    }
    let interior = sorted[1..n - 1].to_vec();
    let terms = sorted
        .windows(3)
        .map(|w| (row[w[2]] - row[w[0]]) / range)
        .collect();
    Some(SampleContribution { low: sorted[0], high: sorted[n - 1], interior, terms })
}
