use std::collections::BTreeMap;

use lingbias::analytics::{correlate_sp_silhouette, pearson, silhouette_scores, Distance};
use lingbias::triplet_eval::SpValue;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Textbook O(n^2) silhouette over integer labels.
fn reference(points: &[Vec<f64>], labels: &[usize]) -> Vec<f64> {
    let n = points.len();
    let n_labels = labels.iter().max().unwrap() + 1;
    (0..n)
        .map(|i| {
            let mut sum = vec![0.0; n_labels];
            let mut count = vec![0usize; n_labels];
            for j in 0..n {
                if j != i {
                    sum[labels[j]] += euclid(&points[i], &points[j]);
                    count[labels[j]] += 1;
                }
            }
            let own = labels[i];
            if count[own] == 0 {
                return 0.0;
            }
            let a = sum[own] / count[own] as f64;
            let b = (0..n_labels)
                .filter(|&l| l != own && count[l] > 0)
                .map(|l| sum[l] / count[l] as f64)
                .fold(f64::INFINITY, f64::min);
            if a.max(b) == 0.0 {
                0.0
            } else {
                (b - a) / a.max(b)
            }
        })
        .collect()
}

fn clusters(seed: u64, per: usize, dim: usize, spread: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spread).unwrap();
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    for c in 0..3 {
        let centre: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        for _ in 0..per {
            pts.push(centre.iter().map(|x| x + noise.sample(&mut rng)).collect());
            labels.push(c);
        }
    }
    (pts, labels)
}

#[test]
fn three_clusters_of_300_points_match_reference() {
    for seed in 0..3 {
        let (pts, labels) = clusters(seed, 100, 8, 1.0);
        let got = silhouette_scores(&pts, &labels, Distance::Euclidean).unwrap();
        for (g, w) in got.iter().zip(reference(&pts, &labels)) {
            assert!((g - w).abs() < 1e-9);
        }
    }
}

#[test]
fn planted_linear_relation_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut sp = BTreeMap::new();
    let mut ts = BTreeMap::new();
    for g in 0..16 {
        let s: f64 = rng.gen_range(0.0..3.0);
        sp.insert(format!("G{g:02}"), SpValue::Finite(s));
        ts.insert(format!("G{g:02}"), 0.1 * s - 0.05 + noise.sample(&mut rng));
    }
    let c = correlate_sp_silhouette(&sp, &ts, None);
    let r = c.text.unwrap();
    assert_eq!(r.n, 16);
    assert!(r.r > 0.99, "{}", r.r);
}

fn rotate(points: &[Vec<f64>], theta: f64, shift: &[f64]) -> Vec<Vec<f64>> {
    let (s, c) = theta.sin_cos();
    points
        .iter()
        .map(|p| {
            let mut q = p.clone();
            q[0] = c * p[0] - s * p[1];
            q[1] = s * p[0] + c * p[1];
            q.iter().zip(shift).map(|(x, t)| x + t).collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn silhouette_is_isometry_invariant(seed in any::<u64>(), theta in -3.0f64..3.0, dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
        let (pts, labels) = clusters(seed, 10, 3, 0.8);
        let moved = rotate(&pts, theta, &[dx, dy, -dx]);
        let a = silhouette_scores(&pts, &labels, Distance::Euclidean).unwrap();
        let b = silhouette_scores(&moved, &labels, Distance::Euclidean).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn silhouette_values_are_bounded_and_means_consistent(seed in any::<u64>()) {
        let (pts, labels) = clusters(seed, 7, 4, 2.0);
        let s = silhouette_scores(&pts, &labels, Distance::CosineDistance).unwrap();
        prop_assert!(s.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn pearson_is_positive_affine_invariant(
        xs in prop::collection::vec(-100.0f64..100.0, 3..30),
        a in 0.1f64..10.0, b in -50.0f64..50.0, seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 * x + rng.gen_range(-40.0..40.0)).collect();
        if let Ok(r) = pearson(&xs, &ys) {
            let xs2: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let r2 = pearson(&xs2, &ys).unwrap();
            prop_assert!((r.r - r2.r).abs() < 1e-9);
            prop_assert!(r.r.abs() <= 1.0);
        }
    }
}
