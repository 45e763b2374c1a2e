//! Training-set construction.
//!
//! The automatic method fits a total-least-squares plane to the
//! k-neighborhood of each randomly drawn candidate point. Candidates whose
//! neighbors scatter widely around their plane (high residual σ) become
//! leaf samples, the flattest become wood samples. Two reference methods
//! are also provided: seed spheres around known leaf/wood seed points, and
//! random subsets of an externally labeled cloud.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::features::{
    eigenvalues_sym3, eigenvector_sym3, local_covariance, neighborhood_mean, point_features,
    FeatureVector,
};
use crate::spatial::{NeighborSet, SpatialIndex};
use crate::{Class, Error, LabelVector, Point3, PointCloud, Result};

/// Default seed-sphere radius in meters.
pub const DEFAULT_SPHERE_RADIUS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneFit {
    pub centroid: Point3,
    pub normal: Point3,
    pub sigma: f64,
}

/// Plane through the centroid of the center and its neighbors, oriented by
/// the covariance eigenvector of the smallest eigenvalue. `sigma` is the
/// population standard deviation of signed orthogonal distances.
pub fn fit_plane(cloud: &PointCloud, nbh: &NeighborSet) -> Result<PlaneFit> {
    if nbh.k() < 2 {
        return Err(Error::InvalidInput(format!(
            "plane fit needs k >= 2, got {}",
            nbh.k()
        )));
    }
    let cov = local_covariance(cloud, nbh)?;
    let centroid = neighborhood_mean(cloud, nbh);
    if cov.max_abs() == 0.0 {
        return Ok(PlaneFit {
            centroid,
            normal: Point3::new(0.0, 0.0, 1.0),
            sigma: 0.0,
        });
    }
    let eig = eigenvalues_sym3(&cov)?;
    let normal = eigenvector_sym3(&cov, eig.l3);
    let m = (nbh.k() + 1) as f64;
    let dists: Vec<f64> = std::iter::once(&nbh.center)
        .chain(&nbh.indices)
        .map(|&j| (cloud[j] - centroid).dot(&normal))
        .collect();
    let mean = dists.iter().sum::<f64>() / m;
    let var = dists.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / m;
    Ok(PlaneFit {
        centroid,
        normal,
        sigma: var.sqrt(),
    })
}

/// Numbers of candidates drawn and of leaf/wood samples kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleProfile {
    pub n_candidates: usize,
    pub n_leaf: usize,
    pub n_wood: usize,
}

impl SampleProfile {
    /// Trees whose foliage occupies more volume than wood.
    pub const LEAFY: SampleProfile = SampleProfile {
        n_candidates: 2000,
        n_leaf: 1200,
        n_wood: 800,
    };
    pub const BALANCED: SampleProfile = SampleProfile {
        n_candidates: 2000,
        n_leaf: 1000,
        n_wood: 1000,
    };
    pub const WOODY: SampleProfile = SampleProfile {
        n_candidates: 2000,
        n_leaf: 800,
        n_wood: 1200,
    };

    pub fn preset(name: &str) -> Option<SampleProfile> {
        match name {
            "leafy" => Some(Self::LEAFY),
            "balanced" => Some(Self::BALANCED),
            "woody" => Some(Self::WOODY),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_leaf == 0 || self.n_wood == 0 || self.n_candidates == 0 {
            return Err(Error::Config("sample profile counts must be positive".into()));
        }
        if self.n_leaf + self.n_wood > self.n_candidates {
            return Err(Error::Config(format!(
                "n_leaf + n_wood = {} exceeds n_candidates = {}",
                self.n_leaf + self.n_wood,
                self.n_candidates
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingEntry {
    pub index: usize,
    pub class: Class,
    pub features: FeatureVector,
}

/// Labeled feature vectors with their source point indices. Both classes
/// are present and indices are unique.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    entries: Vec<TrainingEntry>,
}

impl TrainingSet {
    pub fn new(entries: Vec<TrainingEntry>) -> Result<Self> {
        let leaf = entries.iter().filter(|e| e.class == Class::Leaf).count();
        if leaf == 0 || leaf == entries.len() {
            return Err(Error::InvalidInput(
                "training set must contain both leaf and wood samples".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = entries.iter().find(|e| !seen.insert(e.index)) {
            return Err(Error::InvalidInput(format!(
                "point {} appears twice in the training set",
                dup.index
            )));
        }
        Ok(TrainingSet { entries })
    }

    pub fn entries(&self) -> &[TrainingEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, class: Class) -> usize {
        self.entries.iter().filter(|e| e.class == class).count()
    }

    /// Same points with every class flipped.
    pub fn relabeled(&self) -> TrainingSet {
        TrainingSet {
            entries: self
                .entries
                .iter()
                .map(|e| TrainingEntry {
                    class: e.class.flipped(),
                    ..*e
                })
                .collect(),
        }
    }
}

/// One row of the sample audit table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub index: usize,
    pub sigma: f64,
    pub class: Class,
}

/// `n` distinct point indices drawn uniformly without replacement.
pub fn select_candidates(n_points: usize, n: usize, seed: u64) -> Result<Vec<usize>> {
    if n > n_points {
        return Err(Error::InvalidInput(format!(
            "cannot draw {n} candidates from {n_points} points"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(index::sample(&mut rng, n_points, n).into_vec())
}

fn feature_of(
    cloud: &PointCloud,
    index: &SpatialIndex,
    precomputed: Option<&[FeatureVector]>,
    i: usize,
    k: usize,
) -> Result<FeatureVector> {
    match precomputed {
        Some(f) => f
            .get(i)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("no feature row for point {i}"))),
        None => point_features(cloud, index, i, k),
    }
}

fn check_features(cloud: &PointCloud, f: Option<&[FeatureVector]>) -> Result<()> {
    match f {
        Some(f) if f.len() != cloud.len() => Err(Error::InvalidInput(format!(
            "{} feature rows for {} points",
            f.len(),
            cloud.len()
        ))),
        _ => Ok(()),
    }
}

/// Result of automatic selection: the training set plus the audit rows.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoSelection {
    pub training: TrainingSet,
    pub records: Vec<SampleRecord>,
}

/// Automatic plane-fit sampling. `features`, when given, supplies the
/// feature rows instead of recomputing them (they must come from the same
/// cloud and `k`).
pub fn auto_select(
    cloud: &PointCloud,
    index: &SpatialIndex,
    profile: &SampleProfile,
    k: usize,
    seed: u64,
    features: Option<&[FeatureVector]>,
) -> Result<AutoSelection> {
    profile.validate()?;
    check_features(cloud, features)?;
    let candidates = select_candidates(cloud.len(), profile.n_candidates, seed)?;
    let mut scored: Vec<(f64, usize)> = candidates
        .par_iter()
        .map(|&i| {
            let nbh = index.knn(i, k)?;
            Ok((fit_plane(cloud, &nbh)?.sigma, i))
        })
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let n = scored.len();
    let picks = scored[..profile.n_leaf]
        .iter()
        .map(|s| (s, Class::Leaf))
        .chain(scored[n - profile.n_wood..].iter().map(|s| (s, Class::Wood)));
    let mut entries = Vec::with_capacity(profile.n_leaf + profile.n_wood);
    let mut records = Vec::with_capacity(entries.capacity());
    for (&(sigma, i), class) in picks {
        entries.push(TrainingEntry {
            index: i,
            class,
            features: feature_of(cloud, index, features, i, k)?,
        });
        records.push(SampleRecord {
            index: i,
            sigma,
            class,
        });
    }
    Ok(AutoSelection {
        training: TrainingSet::new(entries)?,
        records,
    })
}

/// Automatic plane-fit sampling, training set only.
pub fn auto_select_training(
    cloud: &PointCloud,
    index: &SpatialIndex,
    profile: &SampleProfile,
    k: usize,
    seed: u64,
) -> Result<TrainingSet> {
    Ok(auto_select(cloud, index, profile, k, seed, None)?.training)
}

/// Seed-sphere reference method: every point within `radius` of a leaf seed
/// is a leaf sample, likewise for wood. Points inside spheres of both
/// classes take the class of their nearest seed (leaf on ties).
#[allow(clippy::too_many_arguments)]
pub fn seed_sphere_training(
    cloud: &PointCloud,
    index: &SpatialIndex,
    leaf_seeds: &[usize],
    wood_seeds: &[usize],
    radius: f64,
    k: usize,
    features: Option<&[FeatureVector]>,
) -> Result<TrainingSet> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidInput(format!("sphere radius must be positive, got {radius}")));
    }
    check_features(cloud, features)?;
    let n = cloud.len();
    if let Some(&bad) = leaf_seeds.iter().chain(wood_seeds).find(|&&s| s >= n) {
        return Err(Error::InvalidInput(format!("seed index {bad} out of range")));
    }
    let union = |seeds: &[usize]| -> BTreeSet<usize> {
        seeds
            .iter()
            .flat_map(|&s| index.within_radius(&cloud[s], radius))
            .collect()
    };
    let leaf = union(leaf_seeds);
    let wood = union(wood_seeds);
    let nearest = |p: &Point3, seeds: &[usize]| {
        seeds
            .iter()
            .map(|&s| cloud[s].dist_sq(p))
            .fold(f64::INFINITY, f64::min)
    };
    let mut classes: BTreeMap<usize, Class> = BTreeMap::new();
    for &i in &leaf {
        classes.insert(i, Class::Leaf);
    }
    for &i in &wood {
        let class = if leaf.contains(&i) {
            let p = cloud[i];
            if nearest(&p, wood_seeds) < nearest(&p, leaf_seeds) {
                Class::Wood
            } else {
                Class::Leaf
            }
        } else {
            Class::Wood
        };
        classes.insert(i, class);
    }
    if !classes.values().any(|&c| c == Class::Leaf) || !classes.values().any(|&c| c == Class::Wood)
    {
        return Err(Error::InvalidInput("seed spheres left one class empty".into()));
    }
    let entries = classes
        .into_iter()
        .map(|(i, class)| {
            Ok(TrainingEntry {
                index: i,
                class,
                features: feature_of(cloud, index, features, i, k)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TrainingSet::new(entries)
}

/// Draws `n_leaf` leaf and `n_wood` wood seed indices uniformly from the
/// points carrying those labels.
pub fn random_class_seeds(
    labels: &LabelVector,
    n_leaf: usize,
    n_wood: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = |class: Class, n: usize| -> Result<Vec<usize>> {
        let pool: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == class)
            .map(|(i, _)| i)
            .collect();
        if pool.len() < n {
            return Err(Error::InvalidInput(format!(
                "only {} {} points available for {n} seeds",
                pool.len(),
                class.name()
            )));
        }
        Ok(index::sample(&mut rng, pool.len(), n)
            .into_iter()
            .map(|j| pool[j])
            .collect())
    };
    let leaf = pick(Class::Leaf, n_leaf)?;
    let wood = pick(Class::Wood, n_wood)?;
    Ok((leaf, wood))
}

/// Random subset of `n` externally labeled points.
#[allow(clippy::too_many_arguments)]
pub fn training_from_labels(
    cloud: &PointCloud,
    index: &SpatialIndex,
    labels: &LabelVector,
    n: usize,
    seed: u64,
    k: usize,
    features: Option<&[FeatureVector]>,
) -> Result<TrainingSet> {
    labels.check_len(cloud.len())?;
    check_features(cloud, features)?;
    let picks = select_candidates(cloud.len(), n, seed)?;
    let entries = picks
        .into_iter()
        .map(|i| {
            Ok(TrainingEntry {
                index: i,
                class: labels[i],
                features: feature_of(cloud, index, features, i, k)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TrainingSet::new(entries)
}
