//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use leafwood::cli::{run_pipeline, RunConfig};
use leafwood::eval::{kappa, ConfusionMatrix, KappaVariant, Metrics};
use leafwood::features::{change_of_curvature, eigenvalues_sym3, local_covariance, FeatureVector};
use leafwood::sampling::{fit_plane, SampleProfile, TrainingEntry};
use leafwood::spatial::{NeighborSet, SpatialIndex};
use leafwood::svm::{rbf, train_entries, SvmHyperparams};
use leafwood::synthgen::{generate_suite, SuitePreset, SuiteTree, TreeSpec};
use leafwood::{Class, Point3, PointCloud};

const SUITE_SEED: u64 = 42;
const SUITE_TREES: usize = 10;
const SUITE_POINTS: usize = 100_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn profile_for(p: SuitePreset) -> SampleProfile {
    match p {
        SuitePreset::Leafy => SampleProfile::LEAFY,
        SuitePreset::Woody => SampleProfile::WOODY,
        _ => SampleProfile::BALANCED,
    }
}

fn suite(planar: bool) -> Vec<SuiteTree> {
    let base = TreeSpec {
        total_points: Some(SUITE_POINTS),
        planar_leaves: planar,
        ..TreeSpec::default()
    };
    generate_suite(SuitePreset::Cycle, SUITE_TREES, SUITE_SEED, &base).expect("suite generates")
}

struct SuiteResult {
    auto: Vec<Metrics>,
    baseline: Vec<Metrics>,
    elapsed: Duration,
}

fn run_suite(trees: &[SuiteTree], planar: bool) -> leafwood::Result<SuiteResult> {
    let start = Instant::now();
    let mut auto = Vec::new();
    let mut baseline = Vec::new();
    for t in trees {
        let cfg = RunConfig {
            profile: profile_for(t.preset),
            profile_name: t.preset.name().into(),
            planar_leaves: planar,
            ..RunConfig::default()
        };
        let out = run_pipeline(&cfg, &t.cloud, Some(&t.labels), None, true)?;
        let m = out.main.metrics().expect("truth given");
        let b = out.baseline.as_ref().and_then(|b| b.metrics()).expect("baseline ran");
        println!(
            "    {} {:<8} auto p_o={:.4} kappa_std={:.4} kappa_paper={:.4} | seed-sphere kappa_std={:.4}",
            t.name,
            t.preset.name(),
            m.p_o,
            m.kappa_standard,
            m.kappa_paper,
            b.kappa_standard
        );
        auto.push(m);
        baseline.push(b);
    }
    Ok(SuiteResult {
        auto,
        baseline,
        elapsed: start.elapsed(),
    })
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn criteria_1_and_2() -> (Outcome, Outcome) {
    let trees = suite(false);
    let r = match run_suite(&trees, false) {
        Ok(r) => r,
        Err(e) => {
            let o = || outcome(false, format!("pipeline error: {e}"));
            return (o(), o());
        }
    };
    let p_o = mean(r.auto.iter().map(|m| m.p_o));
    let k_std = mean(r.auto.iter().map(|m| m.kappa_standard));
    let k_paper = mean(r.auto.iter().map(|m| m.kappa_paper));
    let b_std = mean(r.baseline.iter().map(|m| m.kappa_standard));
    let b_paper = mean(r.baseline.iter().map(|m| m.kappa_paper));
    let secs = r.elapsed.as_secs_f64();
    let wins = r
        .auto
        .iter()
        .zip(&r.baseline)
        .filter(|(a, b)| a.kappa_standard > b.kappa_standard)
        .count();
    let c1 = outcome(
        p_o >= 0.90 && k_std >= 0.70 && secs <= 300.0,
        format!(
            "mean p_o={p_o:.4} (>=0.90), mean kappa_std={k_std:.4} (>=0.70), kappa_paper={k_paper:.4}, runtime={secs:.1}s (<=300s, includes baseline)"
        ),
    );
    let c2 = outcome(
        k_std - b_std >= 0.0,
        format!(
            "auto-baseline mean kappa_std={:+.4} (>=0), kappa_paper={:+.4}, auto better on {wins}/{} trees",
            k_std - b_std,
            k_paper - b_paper,
            r.auto.len()
        ),
    );
    (c1, c2)
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point3> {
    (0..n)
        .map(|_| Point3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let k = 100;
    let mut mismatches = 0usize;
    let mut checked = 0usize;
    for _ in 0..5 {
        let pts = random_cloud(&mut rng, 2000);
        let cloud = PointCloud::new(pts.clone()).unwrap();
        let index = SpatialIndex::build(&cloud).unwrap();
        mismatches += (0..pts.len())
            .into_par_iter()
            .filter(|&c| {
                let mut all: Vec<(f64, usize)> = (0..pts.len())
                    .filter(|&j| j != c)
                    .map(|j| (pts[c].dist_sq(&pts[j]), j))
                    .collect();
                all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let want: Vec<usize> = all[..k].iter().map(|a| a.1).collect();
                let got = index.knn(c, k).unwrap();
                let dist_ok = got
                    .distances
                    .iter()
                    .zip(&all[..k])
                    .all(|(d, a)| *d == a.0.sqrt());
                got.indices != want || !dist_ok
            })
            .count();
        checked += pts.len();
    }
    outcome(mismatches == 0, format!("{checked} centers, {mismatches} differ from brute force"))
}

fn whole(n: usize) -> NeighborSet {
    NeighborSet {
        center: 0,
        indices: (1..n).collect(),
        distances: vec![1.0; n - 1],
    }
}

/// A neighborhood of `n` points of a random shape: isotropic, planar,
/// linear, or nearly degenerate, at a random scale and offset.
fn random_neighborhood(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point3> {
    let shape = rng.gen_range(0..4);
    let scale = 10f64.powf(rng.gen_range(-3.0..1.0));
    let axes = match shape {
        0 => [1.0, 1.0, 1.0],
        1 => [1.0, 1.0, 1e-3],
        2 => [1.0, 1e-3, 1e-3],
        _ => [1.0, 1e-7, 1e-7],
    };
    let off = Point3::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(0.0..20.0));
    (0..n)
        .map(|_| {
            Point3::new(
                rng.gen_range(-1.0..1.0) * axes[0],
                rng.gen_range(-1.0..1.0) * axes[1],
                rng.gen_range(-1.0..1.0) * axes[2],
            ) * scale
                + off
        })
        .collect()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let pts = random_cloud(&mut rng, 101);
        let cloud = PointCloud::new(pts).unwrap();
        let nbh = whole(101);
        let l3 = eigenvalues_sym3(&local_covariance(&cloud, &nbh).unwrap()).unwrap().l3;
        let sigma = fit_plane(&cloud, &nbh).unwrap().sigma;
        worst = worst.max((sigma * sigma - l3).abs() / l3);
    }
    outcome(worst <= 1e-9, format!("1000 neighborhoods of 101 points, max relative error {worst:.2e} (<=1e-9)"))
}

fn rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let tau = std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (w, x, y, z) = (a * (tau * u2).sin(), a * (tau * u2).cos(), b * (tau * u3).sin(), b * (tau * u3).cos());
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

fn criterion_5() -> Outcome {
    const NEIGHBORHOODS: u64 = 1_000_000;
    const CHUNK: u64 = 10_000;
    let (bad, count) = (0..NEIGHBORHOODS / CHUNK)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            rng.set_stream(chunk);
            let mut bad = 0u64;
            for _ in 0..CHUNK {
                let n = rng.gen_range(4..=101);
                let cloud = PointCloud::new(random_neighborhood(&mut rng, n)).unwrap();
                let c = local_covariance(&cloud, &whole(n))
                    .and_then(|m| eigenvalues_sym3(&m))
                    .map(|e| change_of_curvature(&e));
                if !matches!(c, Ok(c) if (0.0..=1.0 / 3.0).contains(&c)) {
                    bad += 1;
                }
            }
            (bad, CHUNK)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    // Rigid motions of one synthetic tree; compare per-point features over
    // kNN neighborhoods.
    let spec = TreeSpec {
        total_points: Some(5000),
        ..TreeSpec::default()
    };
    let (tree, _) = leafwood::synthgen::generate_tree(&spec).unwrap();
    let k = 30;
    let probes: Vec<usize> = (0..tree.len()).step_by(100).collect();
    let features = |cloud: &PointCloud| -> Vec<(f64, f64, f64)> {
        let index = SpatialIndex::build(cloud).unwrap();
        probes
            .iter()
            .map(|&i| {
                let nbh = index.knn(i, k).unwrap();
                let e = eigenvalues_sym3(&local_covariance(cloud, &nbh).unwrap()).unwrap();
                (change_of_curvature(&e), fit_plane(cloud, &nbh).unwrap().sigma, e.l1.sqrt())
            })
            .collect()
    };
    let reference = features(&tree);
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let (mut worst_c, mut worst_s) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let r = rotation(&mut rng);
        let t = Point3::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let moved = PointCloud::new(
            tree.iter()
                .map(|p| {
                    let v = p.to_array();
                    let row = |i: usize| r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2];
                    Point3::new(row(0), row(1), row(2)) + t
                })
                .collect(),
        )
        .unwrap();
        for (a, b) in reference.iter().zip(features(&moved)) {
            worst_c = worst_c.max((a.0 - b.0).abs());
            // sigma relative to the neighborhood extent
            worst_s = worst_s.max((a.1 - b.1).abs() / a.2);
        }
    }
    outcome(
        bad == 0 && worst_c <= 1e-9 && worst_s <= 1e-9,
        format!(
            "{count} neighborhoods, {bad} c_lambda outside [0,1/3]; 100 rigid motions: max |dc_lambda|={worst_c:.2e}, max |dsigma|/extent={worst_s:.2e} (<=1e-9)"
        ),
    )
}

/// Reference dual solver: accelerated projected gradient followed by an
/// exact solve of the KKT system on the identified active set.
mod oracle {
    pub struct Solution {
        pub alpha: Vec<f64>,
        pub bias: f64,
        pub objective: f64,
    }

    /// Projection onto {0 <= a <= c, y'a = 0} by bisection on the multiplier.
    fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
        let at = |mu: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - mu * yi).clamp(0.0, c)).collect() };
        let g = |mu: f64| -> f64 { at(mu).iter().zip(y).map(|(a, yi)| a * yi).sum() };
        let bound = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
        let (mut lo, mut hi) = (-bound, bound);
        // g is non-increasing in mu.
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi))
    }

    fn objective(q: &[Vec<f64>], a: &[f64]) -> f64 {
        let n = a.len();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += a[i] * q[i][j] * a[j];
            }
        }
        a.iter().sum::<f64>() - 0.5 * quad
    }

    fn solve_linear(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
            if m[piv][col].abs() < 1e-14 {
                return None;
            }
            m.swap(col, piv);
            b.swap(col, piv);
            for r in col + 1..n {
                let f = m[r][col] / m[col][col];
                for c in col..n {
                    m[r][c] -= f * m[col][c];
                }
                b[r] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
            x[r] = (b[r] - s) / m[r][r];
        }
        Some(x)
    }

    pub fn solve(k: &[Vec<f64>], y: &[f64], c: f64) -> Solution {
        let n = y.len();
        let q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j]).collect()).collect();
        let lip = (0..n).map(|i| q[i].iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let step = 1.0 / lip;
        let grad = |a: &[f64]| -> Vec<f64> { (0..n).map(|i| 1.0 - (0..n).map(|j| q[i][j] * a[j]).sum::<f64>()).collect() };
        let mut a = vec![0.0; n];
        let mut z = a.clone();
        let mut t = 1.0f64;
        let mut best = objective(&q, &a);
        for _ in 0..200_000 {
            let g = grad(&z);
            let cand: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi + step * gi).collect();
            let next = project(&cand, y, c);
            let obj = objective(&q, &next);
            if obj < best {
                // Restart momentum on non-monotone steps.
                t = 1.0;
                z = a.clone();
                continue;
            }
            best = obj;
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            z = next.iter().zip(&a).map(|(x, xo)| x + (t - 1.0) / t_next * (x - xo)).collect();
            let moved = next.iter().zip(&a).map(|(x, xo)| (x - xo).abs()).fold(0.0, f64::max);
            a = next;
            t = t_next;
            if moved < 1e-15 {
                break;
            }
        }
        polish(&q, y, c, a)
    }

    /// Solves Q_FF a_F + y_F b = 1 - Q_FB a_B, y'a = 0 on the free set F.
    fn polish(q: &[Vec<f64>], y: &[f64], c: f64, a: Vec<f64>) -> Solution {
        let n = y.len();
        let eps = 1e-7 * c;
        let free: Vec<usize> = (0..n).filter(|&i| a[i] > eps && a[i] < c - eps).collect();
        let bound: Vec<f64> = (0..n).map(|i| if a[i] >= c - eps { c } else { 0.0 }).collect();
        let bias_from = |a: &[f64]| -> f64 {
            // f(x_i) = sum_j a_j y_j K_ij + b; grad_i = 1 - y_i (f_i - b)
            let g: Vec<f64> = (0..n).map(|i| 1.0 - (0..n).map(|j| q[i][j] * a[j]).sum::<f64>()).collect();
            let fr: Vec<usize> = (0..n).filter(|&i| a[i] > eps && a[i] < c - eps).collect();
            if !fr.is_empty() {
                fr.iter().map(|&i| y[i] * g[i]).sum::<f64>() / fr.len() as f64
            } else {
                let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
                for i in 0..n {
                    let v = y[i] * g[i];
                    let upper = (y[i] > 0.0 && a[i] <= eps) || (y[i] < 0.0 && a[i] >= c - eps);
                    if upper {
                        lo = lo.max(v);
                    } else {
                        hi = hi.min(v);
                    }
                }
                0.5 * (lo + hi)
            }
        };
        if !free.is_empty() {
            let m = free.len();
            let mut mat = vec![vec![0.0; m + 1]; m + 1];
            let mut rhs = vec![0.0; m + 1];
            for (r, &i) in free.iter().enumerate() {
                for (cidx, &j) in free.iter().enumerate() {
                    mat[r][cidx] = q[i][j];
                }
                mat[r][m] = y[i];
                rhs[r] = 1.0 - (0..n).filter(|j| !free.contains(j)).map(|j| q[i][j] * bound[j]).sum::<f64>();
                mat[m][r] = y[i];
            }
            rhs[m] = -(0..n).filter(|j| !free.contains(j)).map(|j| y[j] * bound[j]).sum::<f64>();
            if let Some(sol) = solve_linear(mat, rhs) {
                let mut exact = bound.clone();
                for (r, &i) in free.iter().enumerate() {
                    exact[i] = sol[r];
                }
                if exact.iter().all(|&v| (-1e-12..=c + 1e-12).contains(&v)) {
                    let exact: Vec<f64> = exact.iter().map(|v| v.clamp(0.0, c)).collect();
                    if objective(q, &exact) >= objective(q, &a) - 1e-12 {
                        return Solution {
                            bias: bias_from(&exact),
                            objective: objective(q, &exact),
                            alpha: exact,
                        };
                    }
                }
            }
        }
        Solution {
            bias: bias_from(&a),
            objective: objective(q, &a),
            alpha: a,
        }
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_obj = 0.0f64;
    let (mut probes, mut agree, mut skipped) = (0usize, 0usize, 0usize);
    let grid: Vec<[f64; 5]> = (0..4usize.pow(5))
        .map(|mut i| {
            let mut p = [0.0; 5];
            for v in &mut p {
                *v = -1.8 + 1.2 * (i % 4) as f64;
                i /= 4;
            }
            p
        })
        .collect();
    for set in 0..50 {
        let n = rng.gen_range(4..=20);
        let c = [0.5, 1.0, 10.0, 100.0][set % 4];
        let gamma = [0.05, 0.2, 1.0][set % 3];
        let mut entries: Vec<TrainingEntry> = (0..n)
            .map(|i| {
                let f: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
                let class = if f[0] + 0.5 * f[3] + rng.gen_range(-0.8..0.8) >= 0.0 { Class::Leaf } else { Class::Wood };
                TrainingEntry {
                    index: i,
                    class,
                    features: FeatureVector { x: f[0], y: f[1], z: f[2], c_lambda: f[3], rho: f[4] },
                }
            })
            .collect();
        entries[0].class = Class::Leaf;
        entries[1].class = Class::Wood;
        let hp = SvmHyperparams { c, gamma, tol: 1e-9, scaling: false, ..SvmHyperparams::default() };
        let (model, report) = train_entries(&entries, &hp, set as u64).expect("training succeeds");
        let x: Vec<[f64; 5]> = entries.iter().map(|e| e.features.to_array()).collect();
        let y: Vec<f64> = entries.iter().map(|e| e.class.sign()).collect();
        let kmat: Vec<Vec<f64>> = x.iter().map(|a| x.iter().map(|b| rbf(a, b, gamma)).collect()).collect();
        let reference = oracle::solve(&kmat, &y, c);
        let rel = (report.objective - reference.objective).abs() / reference.objective.abs().max(1e-12);
        worst_obj = worst_obj.max(rel);
        for p in &grid {
            let dv_ref: f64 = (0..n).map(|j| reference.alpha[j] * y[j] * rbf(p, &x[j], gamma)).sum::<f64>() + reference.bias;
            let fv = FeatureVector { x: p[0], y: p[1], z: p[2], c_lambda: p[3], rho: p[4] };
            let dv = model.decision_value(&fv);
            if dv.abs() < 1e-6 || dv_ref.abs() < 1e-6 {
                skipped += 1;
                continue;
            }
            probes += 1;
            if (dv >= 0.0) == (dv_ref >= 0.0) {
                agree += 1;
            }
        }
    }
    outcome(
        worst_obj <= 1e-6 && agree == probes,
        format!(
            "50 sets: max relative objective gap {worst_obj:.2e} (<=1e-6); probe agreement {agree}/{probes} ({skipped} near-zero probes excluded)"
        ),
    )
}

fn criterion_7() -> Outcome {
    let cm = |tp, tn, fp, fn_| ConfusionMatrix { tp, tn, fp, fn_ };
    let both = |m: &ConfusionMatrix| (kappa(m, KappaVariant::Paper), kappa(m, KappaVariant::Standard));
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    check("40/40/10/10 -> 0.6", both(&cm(40, 40, 10, 10)) == (0.6, 0.6));
    check("50/0/50/0 -> 0", both(&cm(50, 0, 50, 0)) == (0.0, 0.0));
    check("40/40/10/10 p_o 0.8", Metrics::from_confusion(&cm(40, 40, 10, 10)).p_o == 0.8);
    check("all wrong p_o 0", Metrics::from_confusion(&cm(0, 0, 3, 4)).p_o == 0.0);
    for (tp, tn) in [(1, 0), (0, 1), (5, 5), (1000, 1), (123_456, 654_321)] {
        check(&format!("perfect {tp}/{tn}"), both(&cm(tp, tn, 0, 0)) == (1.0, 1.0));
    }
    // Symmetric matrices (TP=TN, FP=FN), checked against hand-derived
    // values: p_e = 1/2, so kappa = 2 p_o - 1.
    for (a, b, want) in [(40, 10, 0.6), (25, 25, 0.0), (10, 40, -0.6), (45, 5, 0.8), (1, 0, 1.0), (0, 7, -1.0)] {
        let m = cm(a, a, b, b);
        let (p, s) = both(&m);
        check(&format!("symmetric {a}/{b}"), (p - want).abs() < 1e-15 && (s - want).abs() < 1e-15 && p == s);
    }
    let n = failures.len();
    outcome(n == 0, if n == 0 { "all module examples and symmetric cases hold".to_string() } else { format!("failed: {failures:?}") })
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_leafwood"))
        .args(args)
        .env_remove("LEAFWOOD_WORKERS")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).trim().to_string())
    }
}

fn criterion_8(tmp: &Path) -> Outcome {
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4).max(2).to_string();
    let runs = [("1", "a"), ("1", "b"), (cores.as_str(), "c")];
    for (w, name) in runs {
        let dir = tmp.join(format!("det_{name}"));
        if let Err(e) = run_cli(&["--workers", w, "pipeline", "--synth", "balanced", "--baseline", "--out-dir", dir.to_str().unwrap()]) {
            return outcome(false, format!("pipeline failed: {e}"));
        }
    }
    let files = ["classified.ply", "model.svm", "report.csv", "report.txt", "samples.csv", "training.csv", "summary.json"];
    let mut differing = Vec::new();
    for f in files {
        let a = std::fs::read(tmp.join("det_a").join(f)).unwrap_or_default();
        for other in ["det_b", "det_c"] {
            if a.is_empty() || std::fs::read(tmp.join(other).join(f)).unwrap_or_default() != a {
                differing.push(format!("{other}/{f}"));
            }
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "3 runs of 1e5 points (workers 1, 1, {cores}); {}",
            if differing.is_empty() { "all artifacts byte-identical".to_string() } else { format!("differ: {differing:?}") }
        ),
    )
}

fn criterion_9(tmp: &Path) -> Outcome {
    let trees = suite(true);
    let r = match run_suite(&trees, true) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("planar suite failed: {e}")),
    };
    let k_std = mean(r.auto.iter().map(|m| m.kappa_standard));
    let k_paper = mean(r.auto.iter().map(|m| m.kappa_paper));
    let dir = tmp.join("planar");
    if let Err(e) = run_cli(&["pipeline", "--synth", "cycle", "--planar-leaves", "--out-dir", dir.to_str().unwrap()]) {
        return outcome(false, format!("planar pipeline failed: {e}"));
    }
    let log = std::fs::read_to_string(dir.join("run.log")).unwrap_or_default();
    let flagged = log.contains("warning: planar leaves");
    outcome(
        flagged,
        format!("10 planar-leaf trees ran; mean kappa_std={k_std:.4}, kappa_paper={k_paper:.4} (reported only); run log caveat present: {flagged}"),
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    println!("acceptance criteria");
    let (c1, c2) = criteria_1_and_2();
    results.push((1, "end-to-end synthetic accuracy", c1));
    results.push((2, "automatic vs seed-sphere ordering", c2));
    results.push((3, "kNN exactness", criterion_3()));
    results.push((4, "plane-fit sigma^2 equals smallest eigenvalue", criterion_4()));
    results.push((5, "c_lambda bounds and rigid-motion invariance", criterion_5()));
    results.push((6, "SMO vs reference QP", criterion_6()));
    results.push((7, "kappa examples", criterion_7()));
    results.push((8, "determinism across runs and workers", criterion_8(tmp.path())));
    results.push((9, "planar-leaf negative case", criterion_9(tmp.path())));
    let mut failed = 0;
    for (id, name, o) in &results {
        println!("{} [{id}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
