//! Straightforward re-derivations used to check the library.

#![allow(clippy::needless_range_loop)]

/// Crowding scores as `(boundary_count, finite_sum)`, computed row by row
/// with an insertion sort on `(value, index)`.
pub fn crowding(rows: &[Vec<f64>]) -> Vec<(u32, f64)> {
    let n = rows[0].len();
    let mut out = vec![(0u32, 0.0f64); n];
    for row in rows {
        let mut idx: Vec<usize> = Vec::with_capacity(n);
        for j in 0..n {
            let mut pos = idx.len();
            while pos > 0 && row[idx[pos - 1]] > row[j] {
                pos -= 1;
            }
            idx.insert(pos, j);
        }
        let lo = row[idx[0]];
        let hi = row[idx[n - 1]];
        if hi == lo {
            continue;
        }
        out[idx[0]].0 += 1;
        out[idx[n - 1]].0 += 1;
        for p in 1..n - 1 {
            out[idx[p]].1 += (row[idx[p + 1]] - row[idx[p - 1]]) / (hi - lo);
        }
    }
    out
}

/// ReliefF weights by brute force: every pair distance is recomputed and
/// neighbours are picked one at a time by minimum `(distance, index)`.
pub fn relieff(rows: &[Vec<f64>], labels: &[usize], k: usize) -> Vec<f64> {
    let m = rows.len();
    let n = rows[0].len();
    let classes = labels.iter().max().unwrap() + 1;
    let span: Vec<f64> = (0..n)
        .map(|j| {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            col.iter().cloned().fold(f64::MIN, f64::max) - col.iter().cloned().fold(f64::MAX, f64::min)
        })
        .collect();
    let diff = |a: usize, b: usize, j: usize| {
        if span[j] == 0.0 {
            0.0
        } else {
            (rows[a][j] - rows[b][j]).abs() / span[j]
        }
    };
    let dist = |a: usize, b: usize| (0..n).map(|j| diff(a, b, j)).sum::<f64>();
    let prior = |c: usize| labels.iter().filter(|&&l| l == c).count() as f64 / m as f64;

    let mut w = vec![0.0; n];
    for i in 0..m {
        let mut delta = vec![0.0; n];
        for c in 0..classes {
            let mut taken: Vec<usize> = Vec::new();
            for _ in 0..k {
                let mut best: Option<usize> = None;
                for o in 0..m {
                    if o == i || labels[o] != c || taken.contains(&o) {
                        continue;
                    }
                    best = match best {
                        Some(b) if dist(i, b) <= dist(i, o) => Some(b),
                        _ => Some(o),
                    };
                }
                taken.push(best.expect("class has enough members"));
            }
            let factor = if c == labels[i] { -1.0 } else { prior(c) / (1.0 - prior(labels[i])) };
            for j in 0..n {
                let mean = taken.iter().map(|&o| diff(i, o, j)).sum::<f64>() / k as f64;
                delta[j] += factor * mean;
            }
        }
        for j in 0..n {
            w[j] += delta[j];
        }
    }
    w.iter().map(|v| v / m as f64).collect()
}

/// Two-sided rank-sum p-value by enumerating every way of drawing `a.len()`
/// ranks out of the pooled sample. Inputs must be tie-free.
pub fn rank_sum_enumeration(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut pooled: Vec<f64> = a.iter().chain(b).cloned().collect();
    pooled.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let rank = |v: f64| pooled.iter().position(|&p| p == v).unwrap() + 1;
    let na = a.len();
    let total_n = na + b.len();
    let observed_rank_sum: usize = a.iter().map(|&v| rank(v)).sum();
    let u_obs = observed_rank_sum - na * (na + 1) / 2;

    let (mut le, mut ge, mut count) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << total_n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        let r: usize = (0..total_n).filter(|&i| mask & (1 << i) != 0).map(|i| i + 1).sum();
        let u = r - na * (na + 1) / 2;
        count += 1;
        if u <= u_obs {
            le += 1;
        }
        if u >= u_obs {
            ge += 1;
        }
    }
    let p = (2.0 * le.min(ge) as f64 / count as f64).min(1.0);
    (u_obs as f64, p)
}
