//! Distribution checks on the seeded samplers. Seeds are fixed, so these
//! are deterministic; the thresholds are the 0.1% upper chi-square and
//! 4-sigma normal quantiles.

use leafwood::geometry::{Class, LabelVector, Point3, PointCloud};
use leafwood::sampling::{random_class_seeds, select_candidates, training_from_labels};
use leafwood::spatial::SpatialIndex;

/// Upper 0.1% point of chi-square with 9 degrees of freedom.
const CHI2_9_999: f64 = 27.877;

fn chi_square(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let e = total as f64 / counts.len() as f64;
    counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum()
}

#[test]
fn candidates_are_uniform_over_points() {
    let (n_points, n, runs) = (1000, 200, 500u64);
    let mut buckets = [0u64; 10];
    for seed in 0..runs {
        let c = select_candidates(n_points, n, seed).unwrap();
        let mut sorted = c.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), n, "duplicates for seed {seed}");
        for i in c {
            buckets[i * 10 / n_points] += 1;
        }
    }
    let x2 = chi_square(&buckets);
    assert!(x2 < CHI2_9_999, "chi-square {x2} over {buckets:?}");
}

#[test]
fn candidate_draw_position_is_uniform() {
    // The first draw of each run must not favor any region either.
    let mut buckets = [0u64; 10];
    for seed in 0..5000u64 {
        buckets[select_candidates(100, 10, seed).unwrap()[0] / 10] += 1;
    }
    assert!(chi_square(&buckets) < CHI2_9_999, "{buckets:?}");
}

#[test]
fn class_seeds_are_uniform_within_each_class() {
    let labels: LabelVector = (0..2000)
        .map(|i| if i % 3 == 0 { Class::Leaf } else { Class::Wood })
        .collect();
    let mut leaf_buckets = [0u64; 10];
    let mut wood_buckets = [0u64; 10];
    for seed in 0..400u64 {
        let (leaf, wood) = random_class_seeds(&labels, 20, 20, seed).unwrap();
        for i in leaf {
            assert_eq!(labels[i], Class::Leaf);
            leaf_buckets[i * 10 / 2000] += 1;
        }
        for i in wood {
            assert_eq!(labels[i], Class::Wood);
            wood_buckets[i * 10 / 2000] += 1;
        }
    }
    assert!(chi_square(&leaf_buckets) < CHI2_9_999, "{leaf_buckets:?}");
    assert!(chi_square(&wood_buckets) < CHI2_9_999, "{wood_buckets:?}");
}

#[test]
fn labeled_subsets_keep_class_proportions() {
    let n = 5000usize;
    let pts: Vec<Point3> = (0..n)
        .map(|i| Point3::new((i % 50) as f64, ((i / 50) % 50) as f64, (i / 2500) as f64))
        .collect();
    let cloud = PointCloud::new(pts).unwrap();
    let index = SpatialIndex::build(&cloud).unwrap();
    let p = 0.3;
    let labels: LabelVector = (0..n)
        .map(|i| if (i * 7919) % 1000 < 300 { Class::Leaf } else { Class::Wood })
        .collect();
    let m = 1000usize;
    // Sampling without replacement: hypergeometric variance.
    let sd = (m as f64 * p * (1.0 - p) * (n - m) as f64 / (n - 1) as f64).sqrt();
    for seed in 0..20u64 {
        let ts = training_from_labels(&cloud, &index, &labels, m, seed, 6, None).unwrap();
        let leaf = ts.count(Class::Leaf) as f64;
        assert!((leaf - p * m as f64).abs() < 4.0 * sd, "seed {seed}: {leaf} leaf of {m}");
        for e in ts.entries() {
            assert_eq!(e.class, labels[e.index]);
        }
    }
}
