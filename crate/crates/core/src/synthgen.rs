//! Labeled synthetic trees for end-to-end testing.
//!
//! A tree is a vertical trunk cylinder with two levels of branch cylinders;
//! wood points are drawn uniformly over the cylinder surfaces and jittered
//! along the surface normal. Leaf points fill ellipsoidal clusters placed
//! just beyond the branch tips, either as volumetric scatter (the default)
//! or as small planar disks that mimic broad leaves.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::{Class, Error, LabelVector, Point3, PointCloud, Result};

/// Wood noise is truncated to this many standard deviations.
pub const NOISE_CLIP: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TreeSpec {
    pub trunk_height: f64,
    pub trunk_radius: f64,
    /// First-level branches off the trunk. Each one carries two sub-branches.
    pub branch_count: usize,
    pub branch_length: (f64, f64),
    pub branch_radius: (f64, f64),
    pub leaf_clusters: usize,
    /// Mean cluster radius; clusters are flattened ellipsoids.
    pub cluster_radius: f64,
    /// Wood points per m² of cylinder surface. Ignored when `total_points`
    /// is set.
    pub wood_density: f64,
    pub total_points: Option<usize>,
    /// Target share of leaf points.
    pub leaf_fraction: f64,
    /// Surface noise standard deviation in meters.
    pub noise_std: f64,
    pub planar_leaves: bool,
    pub leaf_disk_radius: f64,
    pub seed: u64,
}

impl Default for TreeSpec {
    fn default() -> Self {
        TreeSpec {
            trunk_height: 6.0,
            trunk_radius: 0.15,
            branch_count: 8,
            branch_length: (1.2, 2.0),
            branch_radius: (0.035, 0.06),
            leaf_clusters: 24,
            cluster_radius: 0.35,
            wood_density: 2000.0,
            total_points: None,
            leaf_fraction: 0.5,
            noise_std: 0.002,
            planar_leaves: false,
            leaf_disk_radius: 0.04,
            seed: 42,
        }
    }
}

impl TreeSpec {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        let range = |r: (f64, f64)| pos(r.0) && pos(r.1) && r.0 <= r.1;
        if !(pos(self.trunk_height)
            && pos(self.trunk_radius)
            && range(self.branch_length)
            && range(self.branch_radius)
            && pos(self.cluster_radius)
            && pos(self.leaf_disk_radius))
        {
            return Err(Error::Config("tree dimensions must be positive".into()));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Config("noise_std must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.leaf_fraction) {
            return Err(Error::Config("leaf_fraction must be in [0, 1)".into()));
        }
        if self.leaf_fraction > 0.0 && self.leaf_clusters == 0 {
            return Err(Error::Config(
                "leaf_fraction > 0 requires at least one leaf cluster".into(),
            ));
        }
        if self.total_points.is_none() && !pos(self.wood_density) {
            return Err(Error::Config("wood_density must be positive".into()));
        }
        if self.total_points == Some(0) {
            return Err(Error::Config("total_points must be positive".into()));
        }
        Ok(())
    }
}

/// A cylinder of the wood skeleton.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub start: Point3,
    pub end: Point3,
    pub radius: f64,
}

impl Cylinder {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    pub fn area(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.radius * self.length()
    }

    /// `(axial parameter in [0,1] units of length, radial distance)` of `p`.
    pub fn project(&self, p: &Point3) -> (f64, f64) {
        let axis = self.end - self.start;
        let len = axis.norm();
        let u = axis * (1.0 / len);
        let rel = *p - self.start;
        let t = rel.dot(&u);
        let radial = (rel - u * t).norm();
        (t / len, radial)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafCluster {
    pub center: Point3,
    /// Semi-axes along x, y, z.
    pub semi_axes: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct SyntheticTree {
    pub cloud: PointCloud,
    pub labels: LabelVector,
    pub cylinders: Vec<Cylinder>,
    pub clusters: Vec<LeafCluster>,
    /// Generating cylinder of each wood point (None for leaf points).
    pub source: Vec<Option<usize>>,
}

fn unit(v: Point3) -> Point3 {
    v * (1.0 / v.norm())
}

fn basis(axis: Point3) -> (Point3, Point3) {
    let helper = if axis.x.abs() < 0.9 {
        Point3::new(1.0, 0.0, 0.0)
    } else {
        Point3::new(0.0, 1.0, 0.0)
    };
    let u = unit(axis.cross(&helper));
    let v = axis.cross(&u);
    (u, v)
}

fn direction(azimuth: f64, elevation: f64) -> Point3 {
    Point3::new(
        elevation.cos() * azimuth.cos(),
        elevation.cos() * azimuth.sin(),
        elevation.sin(),
    )
}

fn skeleton(spec: &TreeSpec, rng: &mut ChaCha8Rng) -> (Vec<Cylinder>, Vec<(Point3, Point3)>) {
    let h = spec.trunk_height;
    let mut cyl = vec![Cylinder {
        start: Point3::new(0.0, 0.0, 0.0),
        end: Point3::new(0.0, 0.0, h),
        radius: spec.trunk_radius,
    }];
    // (tip, outward direction)
    let mut tips = vec![(Point3::new(0.0, 0.0, h), Point3::new(0.0, 0.0, 1.0))];
    let nb = spec.branch_count;
    for b in 0..nb {
        let frac = if nb > 1 { b as f64 / (nb - 1) as f64 } else { 0.5 };
        let z = h * (0.4 + 0.5 * frac) + rng.gen_range(-0.05..0.05) * h;
        let az = b as f64 * 2.399_963 + rng.gen_range(-0.3..0.3);
        let el = rng.gen_range(0.35..0.85);
        let dir = direction(az, el);
        let len = rng.gen_range(spec.branch_length.0..=spec.branch_length.1);
        let radius = rng
            .gen_range(spec.branch_radius.0..=spec.branch_radius.1)
            .min(0.7 * spec.trunk_radius);
        let start = Point3::new(0.0, 0.0, z.min(h));
        let end = start + dir * len;
        cyl.push(Cylinder { start, end, radius });
        tips.push((end, dir));
        for side in [-1.0, 1.0] {
            let t = rng.gen_range(0.5..0.85);
            let s_start = start + dir * (len * t);
            let s_dir = direction(az + side * rng.gen_range(0.5..0.9), el + rng.gen_range(-0.2..0.3));
            let s_len = len * rng.gen_range(0.4..0.6);
            let s_end = s_start + s_dir * s_len;
            cyl.push(Cylinder {
                start: s_start,
                end: s_end,
                radius: radius * 0.6,
            });
            tips.push((s_end, s_dir));
        }
    }
    (cyl, tips)
}

/// Splits `total` proportionally to `weights` (largest remainder, ties to
/// the lower index).
fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut rest = total - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        counts[i] += 1;
        rest -= 1;
    }
    counts
}

fn truncated_normal(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    if std == 0.0 {
        return 0.0;
    }
    let n = Normal::new(0.0, std).expect("std is finite and positive");
    loop {
        let v = n.sample(rng);
        if v.abs() <= NOISE_CLIP * std {
            return v;
        }
    }
}

fn in_unit_ball(rng: &mut ChaCha8Rng) -> Point3 {
    loop {
        let p = Point3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if p.norm_sq() <= 1.0 {
            return p;
        }
    }
}

fn random_unit(rng: &mut ChaCha8Rng) -> Point3 {
    loop {
        let p = in_unit_ball(rng);
        let n = p.norm();
        if n > 1e-3 {
            return p * (1.0 / n);
        }
    }
}

fn scale_axes(p: Point3, a: &[f64; 3]) -> Point3 {
    Point3::new(p.x * a[0], p.y * a[1], p.z * a[2])
}

/// Generates one tree with full generating geometry.
pub fn generate_tree_detailed(spec: &TreeSpec) -> Result<SyntheticTree> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (cylinders, tips) = skeleton(spec, &mut rng);
    let areas: Vec<f64> = cylinders.iter().map(Cylinder::area).collect();
    let (n_wood, n_leaf) = match spec.total_points {
        Some(total) => {
            let n_leaf = (total as f64 * spec.leaf_fraction).round() as usize;
            (total - n_leaf, n_leaf)
        }
        None => {
            let n_wood = (areas.iter().sum::<f64>() * spec.wood_density).round() as usize;
            let n_leaf =
                (n_wood as f64 * spec.leaf_fraction / (1.0 - spec.leaf_fraction)).round() as usize;
            (n_wood, n_leaf)
        }
    };
    if n_wood == 0 {
        return Err(Error::Config("spec yields no wood points".into()));
    }

    let mut points = Vec::with_capacity(n_wood + n_leaf);
    let mut labels = Vec::with_capacity(n_wood + n_leaf);
    let mut source = Vec::with_capacity(n_wood + n_leaf);

    for (ci, (c, count)) in cylinders.iter().zip(apportion(n_wood, &areas)).enumerate() {
        let axis = unit(c.end - c.start);
        let (u, v) = basis(axis);
        let len = c.length();
        for _ in 0..count {
            let t = rng.gen_range(0.0..len);
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let radial = u * theta.cos() + v * theta.sin();
            let r = c.radius + truncated_normal(&mut rng, spec.noise_std);
            points.push(c.start + axis * t + radial * r);
            labels.push(Class::Wood);
            source.push(Some(ci));
        }
    }

    let mut clusters = Vec::with_capacity(spec.leaf_clusters);
    if n_leaf > 0 {
        for i in 0..spec.leaf_clusters {
            let (tip, dir) = tips[i % tips.len()];
            let r = spec.cluster_radius * rng.gen_range(0.8..1.2);
            let jitter = if i >= tips.len() {
                in_unit_ball(&mut rng) * r
            } else {
                Point3::default()
            };
            clusters.push(LeafCluster {
                center: tip + dir * (0.6 * r) + jitter,
                semi_axes: [r, r, 0.7 * r],
            });
        }
        let volumes: Vec<f64> = clusters
            .iter()
            .map(|c| c.semi_axes.iter().product::<f64>())
            .collect();
        let iso = Normal::new(0.0, spec.noise_std.max(f64::MIN_POSITIVE)).expect("valid std");
        let jitter = |rng: &mut ChaCha8Rng| {
            if spec.noise_std == 0.0 {
                Point3::default()
            } else {
                Point3::new(iso.sample(rng), iso.sample(rng), iso.sample(rng))
            }
        };
        for (cl, count) in clusters.iter().zip(apportion(n_leaf, &volumes)) {
            if spec.planar_leaves {
                let mut left = count;
                while left > 0 {
                    let m = left.min(40);
                    let center = cl.center + scale_axes(in_unit_ball(&mut rng), &cl.semi_axes);
                    let normal = random_unit(&mut rng);
                    let (du, dv) = basis(normal);
                    for _ in 0..m {
                        let rr = spec.leaf_disk_radius * rng.gen::<f64>().sqrt();
                        let th = rng.gen_range(0.0..std::f64::consts::TAU);
                        let off = normal * truncated_normal(&mut rng, spec.noise_std);
                        points.push(center + du * (rr * th.cos()) + dv * (rr * th.sin()) + off);
                        labels.push(Class::Leaf);
                        source.push(None);
                    }
                    left -= m;
                }
            } else {
                for _ in 0..count {
                    let p = cl.center + scale_axes(in_unit_ball(&mut rng), &cl.semi_axes);
                    points.push(p + jitter(&mut rng));
                    labels.push(Class::Leaf);
                    source.push(None);
                }
            }
        }
    }

    Ok(SyntheticTree {
        cloud: PointCloud::new(points)?,
        labels: LabelVector(labels),
        cylinders,
        clusters,
        source,
    })
}

/// Generates a labeled cloud from a spec.
pub fn generate_tree(spec: &TreeSpec) -> Result<(PointCloud, LabelVector)> {
    let t = generate_tree_detailed(spec)?;
    Ok((t.cloud, t.labels))
}

/// Leaf/wood balance of a generated suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuitePreset {
    Leafy,
    Balanced,
    Woody,
    /// Leafy, balanced, woody, leafy, ...
    Cycle,
}

impl SuitePreset {
    pub fn parse(s: &str) -> Option<SuitePreset> {
        match s {
            "leafy" => Some(SuitePreset::Leafy),
            "balanced" => Some(SuitePreset::Balanced),
            "woody" => Some(SuitePreset::Woody),
            "cycle" => Some(SuitePreset::Cycle),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SuitePreset::Leafy => "leafy",
            SuitePreset::Balanced => "balanced",
            SuitePreset::Woody => "woody",
            SuitePreset::Cycle => "cycle",
        }
    }

    /// Concrete preset of tree `i` in a suite.
    pub fn for_tree(self, i: usize) -> SuitePreset {
        match self {
            SuitePreset::Cycle => [SuitePreset::Leafy, SuitePreset::Balanced, SuitePreset::Woody][i % 3],
            p => p,
        }
    }

    pub fn leaf_fraction(self) -> f64 {
        match self {
            SuitePreset::Leafy => 0.7,
            SuitePreset::Balanced | SuitePreset::Cycle => 0.5,
            SuitePreset::Woody => 0.3,
        }
    }
}

/// One member of a generated suite.
#[derive(Debug, Clone)]
pub struct SuiteTree {
    pub name: String,
    pub preset: SuitePreset,
    pub spec: TreeSpec,
    pub cloud: PointCloud,
    pub labels: LabelVector,
}

/// Per-tree seed derived from the suite's master seed.
pub fn derive_seed(master: u64, i: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(i as u64 + 1);
    rng.gen()
}

/// Generates `count` trees from `base`, overriding seed and leaf fraction
/// per tree.
pub fn generate_suite(
    preset: SuitePreset,
    count: usize,
    seed: u64,
    base: &TreeSpec,
) -> Result<Vec<SuiteTree>> {
    (0..count)
        .map(|i| {
            let p = preset.for_tree(i);
            let spec = TreeSpec {
                seed: derive_seed(seed, i),
                leaf_fraction: p.leaf_fraction(),
                ..base.clone()
            };
            let (cloud, labels) = generate_tree(&spec)?;
            Ok(SuiteTree {
                name: format!("tree_{i:02}"),
                preset: p,
                spec,
                cloud,
                labels,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> TreeSpec {
        TreeSpec {
            total_points: Some(6000),
            ..Default::default()
        }
    }

    #[test]
    fn no_clusters_all_wood() {
        let spec = TreeSpec {
            leaf_clusters: 0,
            leaf_fraction: 0.0,
            ..small()
        };
        let (_, labels) = generate_tree(&spec).unwrap();
        assert!(labels.iter().all(|&c| c == Class::Wood));
    }

    #[test]
    fn no_clusters_with_leaves_is_infeasible() {
        let spec = TreeSpec {
            leaf_clusters: 0,
            ..small()
        };
        assert!(generate_tree(&spec).is_err());
    }

    #[test]
    fn deterministic() {
        let a = generate_tree(&small()).unwrap();
        let b = generate_tree(&small()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ratio_matches_target() {
        for f in [0.3, 0.5, 0.7] {
            let spec = TreeSpec {
                leaf_fraction: f,
                ..small()
            };
            let (c, l) = generate_tree(&spec).unwrap();
            let got = l.count(Class::Leaf) as f64 / c.len() as f64;
            assert!((got - f).abs() <= 0.05 * f, "{got} vs {f}");
        }
        // density-driven budget
        let spec = TreeSpec {
            wood_density: 300.0,
            leaf_fraction: 0.6,
            ..Default::default()
        };
        let (c, l) = generate_tree(&spec).unwrap();
        let got = l.count(Class::Leaf) as f64 / c.len() as f64;
        assert!((got - 0.6).abs() <= 0.03, "{got}");
    }

    #[test]
    fn wood_points_near_surface() {
        let t = generate_tree_detailed(&small()).unwrap();
        let tol = NOISE_CLIP * small().noise_std + 1e-9;
        for (i, src) in t.source.iter().enumerate() {
            if let Some(ci) = src {
                let (s, r) = t.cylinders[*ci].project(&t.cloud[i]);
                assert!((-1e-9..=1.0 + 1e-9).contains(&s));
                assert!((r - t.cylinders[*ci].radius).abs() <= tol);
            }
        }
    }

    #[test]
    fn apportion_sums() {
        assert_eq!(apportion(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
        assert_eq!(apportion(7, &[0.0, 2.0]), vec![0, 7]);
    }

    #[test]
    fn suite_presets() {
        let base = TreeSpec {
            total_points: Some(3000),
            ..Default::default()
        };
        let s = generate_suite(SuitePreset::Balanced, 3, 9, &base).unwrap();
        for t in &s {
            let f = t.labels.count(Class::Leaf) as f64 / t.cloud.len() as f64;
            assert!((0.45..=0.55).contains(&f));
        }
        assert_ne!(s[0].cloud, s[1].cloud);
        assert_ne!(s[1].cloud, s[2].cloud);
        let cyc = generate_suite(SuitePreset::Cycle, 10, 9, &base).unwrap();
        for p in [SuitePreset::Leafy, SuitePreset::Balanced, SuitePreset::Woody] {
            assert!(cyc.iter().any(|t| t.preset == p));
        }
    }
}
