mod common;

use crowdfs::crowding::{crowding_scores_of, rank_descending, CrowdingScore};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn flat(rows: &[Vec<f64>]) -> Vec<f64> {
    rows.iter().flatten().copied().collect()
}

fn as_pairs(scores: &[CrowdingScore]) -> Vec<(u32, f64)> {
    scores.iter().map(|s| (s.boundary_count, s.finite_sum)).collect()
}

fn matrix(max_n: usize, max_m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (3..=max_n, 1..=max_m).prop_flat_map(|(n, m)| prop::collection::vec(prop::collection::vec(0.0..1.0f64, n), m))
}

fn dyadic_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (3usize..=10, 1usize..=5, any::<u64>()).prop_map(|(n, m, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m).map(|_| (0..n).map(|_| common::dyadic(&mut rng)).collect()).collect()
    })
}

proptest! {
    #[test]
    fn matches_naive_oracle(rows in matrix(10, 5)) {
        let n = rows[0].len();
        let got = crowding_scores_of(&flat(&rows), n).unwrap();
        prop_assert_eq!(as_pairs(&got), common::oracles::crowding(&rows));
    }

    #[test]
    fn matches_oracle_with_ties(rows in (3usize..=8, 1usize..=6).prop_flat_map(|(n, m)| {
        prop::collection::vec(prop::collection::vec((0u8..4).prop_map(f64::from), n), m)
    })) {
        let n = rows[0].len();
        let got = crowding_scores_of(&flat(&rows), n).unwrap();
        prop_assert_eq!(as_pairs(&got), common::oracles::crowding(&rows));
    }

    #[test]
    fn column_permutation_permutes_scores(rows in matrix(10, 5), seed in any::<u64>()) {
        let n = rows[0].len();
        for row in &rows {
            let mut sorted = row.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.dedup();
            prop_assume!(sorted.len() == n);
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        // new column j holds old column perm[j]
        let permuted: Vec<Vec<f64>> = rows.iter().map(|r| perm.iter().map(|&p| r[p]).collect()).collect();
        let base = crowding_scores_of(&flat(&rows), n).unwrap();
        let moved = crowding_scores_of(&flat(&permuted), n).unwrap();
        for j in 0..n {
            prop_assert_eq!(moved[j], base[perm[j]]);
        }
    }

    #[test]
    fn affine_row_transform_is_exact_on_dyadic_grid(rows in dyadic_matrix(), pick in any::<prop::sample::Index>()) {
        let n = rows[0].len();
        let mut changed = rows.clone();
        let r = pick.index(rows.len());
        for v in changed[r].iter_mut() {
            *v = 3.0 * *v + 7.0;
        }
        prop_assert_eq!(
            crowding_scores_of(&flat(&rows), n).unwrap(),
            crowding_scores_of(&flat(&changed), n).unwrap()
        );
    }

    #[test]
    fn affine_row_transform_general(rows in matrix(10, 5), a in 0.01..100.0f64, b in -100.0..100.0f64) {
        let n = rows[0].len();
        let changed: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| a * v + b).collect()).collect();
        let before = crowding_scores_of(&flat(&rows), n).unwrap();
        let after = crowding_scores_of(&flat(&changed), n).unwrap();
        for (x, y) in before.iter().zip(&after) {
            prop_assert_eq!(x.boundary_count, y.boundary_count);
            prop_assert!((x.finite_sum - y.finite_sum).abs() <= 1e-9 * (1.0 + x.finite_sum));
        }
    }

    #[test]
    fn terms_are_bounded(rows in matrix(10, 5)) {
        let n = rows[0].len();
        let m = rows.len() as f64;
        for s in crowding_scores_of(&flat(&rows), n).unwrap() {
            prop_assert!(s.finite_sum >= 0.0);
            prop_assert!(s.finite_sum <= m * (1.0 + 1e-12));
        }
        for row in &rows {
            for s in crowding_scores_of(row, n).unwrap() {
                prop_assert!((0.0..=1.0).contains(&s.finite_sum));
            }
        }
    }

    #[test]
    fn ranking_is_a_permutation(rows in matrix(10, 5)) {
        let n = rows[0].len();
        let ranking = rank_descending(&crowding_scores_of(&flat(&rows), n).unwrap()).unwrap();
        let mut seen = ranking.order.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
        for w in ranking.order.windows(2) {
            let (a, b) = (ranking.scores[w[0]], ranking.scores[w[1]]);
            prop_assert!(a.total_cmp(&b).is_ge());
        }
    }
}

#[test]
fn two_sample_half_perimeter() {
    // feature 2 sits strictly inside both samples: each side of its cuboid
    // spans the whole normalised range, so the half-perimeter is 1 + 1
    let s = crowding_scores_of(&[0.0, 5.0, 10.0, 10.0, 5.0, 0.0], 3).unwrap();
    assert_eq!(s[1].finite_sum, 2.0);
    assert_eq!([s[0].boundary_count, s[1].boundary_count, s[2].boundary_count], [2, 0, 2]);
}

#[test]
fn large_parallel_blocks_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let rows: Vec<Vec<f64>> = (0..300).map(|_| (0..40).map(|_| rng.random::<f64>()).collect()).collect();
    let got = crowding_scores_of(&flat(&rows), 40).unwrap();
    assert_eq!(as_pairs(&got), common::oracles::crowding(&rows));
}
