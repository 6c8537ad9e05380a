mod common;

use crowdfs::stats::{exact_u_distribution, summary_stats, wilcoxon_rank_sum, TestMethod};
use proptest::prelude::*;

fn distinct(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max, 1..=max).prop_flat_map(|(na, nb)| {
        Just((0..(na + nb) as u32).collect::<Vec<_>>()).prop_shuffle().prop_map(move |perm| {
            let vals: Vec<f64> = perm.iter().map(|&v| f64::from(v) * 1.5 - 3.0).collect();
            (vals[..na].to_vec(), vals[na..].to_vec())
        })
    })
}

fn samples() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    let side = || prop::collection::vec((0u8..10).prop_map(f64::from), 1..25);
    (side(), side())
}

#[test]
fn separated_triples() {
    let t = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
    assert_eq!(t.p_value, 0.1);
    assert_eq!(t.method, TestMethod::Exact);
    assert!(!t.significant_at_005);
}

#[test]
fn normal_path_matches_reference_values() {
    // reference p-values from an independent statistics package
    let a: Vec<f64> = (1..=20).map(f64::from).collect();
    let b: Vec<f64> = (21..=40).map(f64::from).collect();
    let t = wilcoxon_rank_sum(&a, &b).unwrap();
    assert_eq!(t.method, TestMethod::NormalApproximation);
    assert!((t.p_value - 6.795615128173387e-08).abs() < 1e-15);

    let a: Vec<f64> = [1.0, 1.0, 2.0, 2.0, 3.0].repeat(3);
    let b: Vec<f64> = [2.0, 3.0, 3.0, 4.0, 4.0].repeat(3);
    let t = wilcoxon_rank_sum(&a, &b).unwrap();
    assert_eq!(t.statistic, 27.0);
    assert!((t.p_value - 0.00025830466174590867).abs() < 1e-12, "{}", t.p_value);
    assert!(t.significant_at_005);
}

#[test]
fn exact_distribution_totals_are_binomial() {
    for na in 1..=12u64 {
        for nb in 1..=12u64 {
            let total: u64 = exact_u_distribution(na as usize, nb as usize).iter().sum();
            let binom = (1..=na).fold(1u64, |acc, i| acc * (nb + i) / i);
            assert_eq!(total, binom, "{na} {nb}");
        }
    }
}

#[test]
fn summary_of_two_runs() {
    let s = summary_stats(&[90.0, 94.0]).unwrap();
    assert_eq!((s.mean, s.worst, s.best), (92.0, 90.0, 94.0));
    assert!((s.std - 2.0 * 2f64.sqrt()).abs() < 1e-12);
}

proptest! {
    #[test]
    fn exact_matches_enumeration((a, b) in distinct(7)) {
        let t = wilcoxon_rank_sum(&a, &b).unwrap();
        let (u, p) = common::oracles::rank_sum_enumeration(&a, &b);
        prop_assert_eq!(t.method, TestMethod::Exact);
        prop_assert_eq!(t.statistic, u);
        prop_assert!((t.p_value - p).abs() < 1e-12, "{} vs {}", t.p_value, p);
    }

    #[test]
    fn u_statistics_sum_to_product((a, b) in samples()) {
        let t = wilcoxon_rank_sum(&a, &b).unwrap();
        let r = wilcoxon_rank_sum(&b, &a).unwrap();
        let product = (a.len() * b.len()) as f64;
        prop_assert_eq!(t.statistic + t.u_other, product);
        prop_assert_eq!(t.statistic + r.statistic, product);
        prop_assert_eq!(t.p_value, r.p_value);
        prop_assert!((0.0..=1.0).contains(&t.p_value));
        prop_assert_eq!(t.significant_at_005, t.p_value < 0.05);
    }

    #[test]
    fn summary_orders_its_fields(v in prop::collection::vec(0.0..100.0f64, 1..40)) {
        let s = summary_stats(&v).unwrap();
        prop_assert!(s.worst <= s.mean && s.mean <= s.best);
        prop_assert!(s.std >= 0.0);
    }
}
