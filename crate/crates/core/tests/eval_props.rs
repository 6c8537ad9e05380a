mod common;

use crowdfs::eval::{
    classify_knn, cv_accuracy, repeated_eval, stratified_folds, train_linear_svm, ClassifierConfig, EvalConfig,
    FoldAssignment, IncrementalFitness,
};
use crowdfs::{Dataset, Matrix, Scaler};
use proptest::prelude::*;

fn random_dataset() -> impl Strategy<Value = Dataset> {
    (2usize..=6, 12usize..=40).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop::collection::vec(-5.0..5.0f64, n), m),
            prop::collection::vec(0usize..2, m - 8),
        )
            .prop_map(|(rows, extra)| {
                let mut labels = vec![0, 1, 0, 1, 0, 1, 0, 1];
                labels.extend(extra);
                Dataset::from_rows(&rows, labels).unwrap()
            })
    })
}

fn poison(ds: &Dataset, rows: &[usize]) -> Dataset {
    let mut values = ds.features().as_slice().to_vec();
    for &r in rows {
        for j in 0..ds.n_features() {
            values[r * ds.n_features() + j] = if j % 2 == 0 { 1e9 } else { -1e9 };
        }
    }
    ds.with_features(Matrix::new(ds.n_samples(), ds.n_features(), values).unwrap()).unwrap()
}

#[test]
fn folds_ten_and_five() {
    let labels: Vec<usize> = [vec![0; 10], vec![1; 5]].concat();
    let f = stratified_folds(&labels, 5, 3).unwrap();
    for fold in 0..5 {
        let test = f.test_rows(fold);
        assert_eq!(test.iter().filter(|&&r| labels[r] == 0).count(), 2);
        assert_eq!(test.iter().filter(|&&r| labels[r] == 1).count(), 1);
    }
}

#[test]
fn knn_examples() {
    assert_eq!(classify_knn(&[[3.0]], &[1], &[-8.0], 1).unwrap(), 1);
    assert_eq!(classify_knn(&[[0.0], [2.0]], &[0, 1], &[1.0], 1).unwrap(), 0);
    assert_eq!(classify_knn(&[[0.0], [1.0], [2.0]], &[0, 0, 1], &[1.6], 3).unwrap(), 0);
    assert!(classify_knn(&[[0.0]], &[0], &[1.0], 2).is_err());
}

#[test]
fn interleaved_duplicates_score_fifty() {
    let ds = Dataset::from_rows(&[[1.0], [1.0], [1.0], [1.0]], vec![0, 1, 0, 1]).unwrap();
    let folds = FoldAssignment::new(2, vec![0, 0, 1, 1]).unwrap();
    assert_eq!(cv_accuracy(&ds, &[0], &ClassifierConfig::knn(1), &folds, 0).unwrap(), 50.0);
}

#[test]
fn svm_separates_margin_data() {
    let xs: Vec<f64> = (1..=20).map(|i| f64::from(i) * 0.25 + 1.0).collect();
    let rows: Vec<[f64; 1]> = xs.iter().map(|&x| [-x]).chain(xs.iter().map(|&x| [x])).collect();
    let labels: Vec<usize> = [vec![0; 20], vec![1; 20]].concat();
    let ds = Dataset::from_rows(&rows, labels.clone()).unwrap();
    let all: Vec<usize> = (0..40).collect();
    let svm = train_linear_svm(&ds, &all, &ClassifierConfig::linear_svm(), 5).unwrap();
    let correct = (0..40).filter(|&i| svm.predict(ds.sample(i)) == labels[i]).count();
    assert_eq!(correct, 40);
    let again = train_linear_svm(&ds, &all, &ClassifierConfig::linear_svm(), 5).unwrap();
    assert_eq!(svm, again);
}

#[test]
fn repeated_eval_is_pool_independent() {
    let ds = common::load("ionosphere.csv");
    let subset: Vec<usize> = (0..8).collect();
    let cfg = EvalConfig { folds: 5, repetitions: 6, seed: 11 };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| repeated_eval(&ds, &subset, &ClassifierConfig::knn(5), &cfg).unwrap())
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a, b);
    assert_eq!(a.per_run.len(), 6);
    let single = repeated_eval(&ds, &subset, &ClassifierConfig::knn(5), &EvalConfig { repetitions: 1, ..cfg }).unwrap();
    assert_eq!((single.mean, single.worst, single.best, single.std), (a.per_run[0], a.per_run[0], a.per_run[0], 0.0));
}

proptest! {
    #[test]
    fn fold_class_counts_are_balanced(
        counts in prop::collection::vec(5usize..30, 2..4),
        folds in 2usize..=5,
        seed in any::<u64>(),
    ) {
        let labels: Vec<usize> = counts.iter().enumerate().flat_map(|(c, &k)| std::iter::repeat_n(c, k)).collect();
        let f = stratified_folds(&labels, folds, seed).unwrap();
        prop_assert_eq!(&f, &stratified_folds(&labels, folds, seed).unwrap());
        for c in 0..counts.len() {
            let per_fold: Vec<usize> = (0..folds)
                .map(|k| f.test_rows(k).iter().filter(|&&r| labels[r] == c).count())
                .collect();
            prop_assert!(per_fold.iter().max().unwrap() - per_fold.iter().min().unwrap() <= 1);
        }
    }

    #[test]
    fn training_state_ignores_test_rows(ds in random_dataset(), seed in any::<u64>()) {
        let folds = stratified_folds(ds.labels(), 2, seed).unwrap();
        let (train, test) = (folds.train_rows(0), folds.test_rows(0));
        let poisoned = poison(&ds, &test);
        prop_assert_eq!(Scaler::fit(&ds, &train).unwrap(), Scaler::fit(&poisoned, &train).unwrap());
        let cfg = ClassifierConfig::linear_svm();
        let a = train_linear_svm(&ds, &train, &cfg, seed).unwrap();
        let b = train_linear_svm(&poisoned, &train, &cfg, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn scaled_training_rows_lie_in_unit_interval(ds in random_dataset(), seed in any::<u64>()) {
        let folds = stratified_folds(ds.labels(), 3, seed).unwrap();
        let train = folds.train_rows(1);
        let scaler = Scaler::fit(&ds, &train).unwrap();
        for &r in &train {
            for v in scaler.transform(ds.sample(r)) {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn knn_recovers_training_point(ds in random_dataset(), pick in any::<prop::sample::Index>()) {
        let rows: Vec<&[f64]> = (0..ds.n_samples()).map(|i| ds.sample(i)).collect();
        let i = pick.index(rows.len());
        // a duplicate of row i earlier in the table would win the tie
        prop_assume!(rows[..i].iter().all(|r| *r != rows[i]));
        prop_assert_eq!(classify_knn(&rows, ds.labels(), rows[i], 1).unwrap(), ds.labels()[i]);
    }

    #[test]
    fn incremental_fitness_is_bit_identical(
        ds in random_dataset(),
        seed in any::<u64>(),
        k in prop::sample::select(vec![1usize, 3, 5]),
        order_seed in any::<u64>(),
    ) {
        let folds = stratified_folds(ds.labels(), 3, seed).unwrap();
        let cfg = ClassifierConfig::knn(k);
        let mut inc = IncrementalFitness::new(&ds, cfg, folds.clone(), seed).unwrap();
        let n = ds.n_features();
        let mut order: Vec<usize> = (0..n).collect();
        order.rotate_left((order_seed % n as u64) as usize);
        for (step, &f) in order.iter().enumerate() {
            let mut subset = inc.accepted().to_vec();
            subset.push(f);
            let full = cv_accuracy(&ds, &subset, &cfg, &folds, seed).unwrap();
            prop_assert_eq!(inc.evaluate(f).unwrap().to_bits(), full.to_bits());
            if (order_seed >> step) & 1 == 1 || step == 0 {
                inc.accept(f);
            }
        }
    }
}
