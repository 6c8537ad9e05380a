//! Seeded stand-ins for the two microarray-scale datasets.
//!
//! Values are log-normal "expression levels"; a small block of genes is
//! shifted between the classes and everything else is noise.

use crowdfs::{Dataset, Matrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

#[derive(Debug, Clone, Copy)]
pub struct SurrogateSpec {
    pub name: &'static str,
    pub n_features: usize,
    pub class_sizes: [usize; 2],
    pub class_names: [&'static str; 2],
    pub informative: usize,
    pub seed: u64,
}

pub const COLON: SurrogateSpec = SurrogateSpec {
    name: "colon",
    n_features: 2000,
    class_sizes: [40, 22],
    class_names: ["tumor", "normal"],
    informative: 30,
    seed: 2000,
};

pub const OVARIAN: SurrogateSpec = SurrogateSpec {
    name: "ovarian",
    n_features: 4000,
    class_sizes: [121, 95],
    class_names: ["cancer", "normal"],
    informative: 40,
    seed: 4000,
};

pub fn generate(spec: &SurrogateSpec) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_features;
    let level = Normal::new(6.0, 1.5).unwrap();
    let spread = Uniform::new(0.3, 0.9).unwrap();
    let mu: Vec<f64> = (0..n).map(|_| level.sample(&mut rng)).collect();
    let sigma: Vec<f64> = (0..n).map(|_| spread.sample(&mut rng)).collect();

    let mut genes: Vec<usize> = (0..n).collect();
    genes.shuffle(&mut rng);
    let mut shift = vec![0.0; n];
    for &g in &genes[..spec.informative] {
        let size = rng.random_range(0.6..1.2) * sigma[g];
        shift[g] = if rng.random_bool(0.5) { size } else { -size };
    }

    let mut labels: Vec<usize> = spec
        .class_sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &count)| std::iter::repeat_n(c, count))
        .collect();
    labels.shuffle(&mut rng);

    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut values = Vec::with_capacity(labels.len() * n);
    for &label in &labels {
        for j in 0..n {
            let z: f64 = noise.sample(&mut rng);
            let v = (mu[j] + shift[j] * label as f64 + sigma[j] * z).exp();
            values.push((v * 100.0).round() / 100.0);
        }
    }
    let features = Matrix::new(labels.len(), n, values).unwrap();
    let names = (1..=n).map(|j| format!("g{j}")).collect();
    let classes = spec.class_names.iter().map(|s| s.to_string()).collect();
    Dataset::new(features, labels, names, classes).unwrap()
}
