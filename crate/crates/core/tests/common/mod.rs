#![allow(dead_code)]

pub mod oracles;
pub mod surrogate;

use std::path::PathBuf;

use crowdfs::{Dataset, LabelColumn};

/// Path of a bundled dataset under the workspace `data/` directory.
pub fn data_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(file)
}

pub fn load(file: &str) -> Dataset {
    Dataset::load_csv(data_path(file), &LabelColumn::Auto).unwrap_or_else(|e| panic!("{file}: {e}"))
}

/// Random value on a 1/256 grid in [-64, 64), so `3x + 7` and differences
/// of such values are exact in f64.
pub fn dyadic<R: rand::Rng>(rng: &mut R) -> f64 {
    rng.random_range(-16384i32..16384) as f64 / 256.0
}
