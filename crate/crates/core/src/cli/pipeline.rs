//! The fused pipeline: index, features, training set, SVM, classification
//! and (when truth labels exist) evaluation. The staged commands reuse the
//! same building blocks so that running through files gives identical
//! results.

use rayon::prelude::*;

use super::config::{Method, RunConfig};
use crate::eval::{confusion, ConfusionMatrix, Metrics};
use crate::features::{compute_features, FeatureVector};
use crate::sampling::{
    auto_select, fit_plane, random_class_seeds, seed_sphere_training, training_from_labels,
    SampleRecord, TrainingSet,
};
use crate::spatial::SpatialIndex;
use crate::svm::{self, GridPoint, SvmHyperparams, SvmModel, TrainReport};
use crate::{Error, LabelVector, PointCloud, Result};

/// Caveat logged whenever leaves are known to be planar.
pub const PLANAR_LEAVES_WARNING: &str = "planar leaves: flat foliage looks like wood to the \
     plane-fit residual criterion, so automatic sampling is expected to degrade";

/// Leaf and wood seed point indices for the seed-sphere method.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Seeds {
    pub leaf: Vec<usize>,
    pub wood: Vec<usize>,
}

/// Builds the training set for `method` and its audit rows.
pub fn build_training(
    cfg: &RunConfig,
    method: Method,
    cloud: &PointCloud,
    index: &SpatialIndex,
    features: Option<&[FeatureVector]>,
    truth: Option<&LabelVector>,
    seeds: Option<&Seeds>,
) -> Result<(TrainingSet, Vec<SampleRecord>)> {
    let need_truth = || {
        truth.ok_or_else(|| {
            Error::Config(format!("method '{}' needs truth labels", method.name()))
        })
    };
    let ts = match method {
        Method::Auto => {
            let sel = auto_select(cloud, index, &cfg.profile, cfg.k, cfg.seed, features)?;
            return Ok((sel.training, sel.records));
        }
        Method::SeedSphere => {
            let drawn;
            let seeds = match seeds {
                Some(s) => s,
                None => {
                    let (leaf, wood) =
                        random_class_seeds(need_truth()?, cfg.n_seeds, cfg.n_seeds, cfg.seed)?;
                    drawn = Seeds { leaf, wood };
                    &drawn
                }
            };
            seed_sphere_training(cloud, index, &seeds.leaf, &seeds.wood, cfg.radius, cfg.k, features)?
        }
        Method::Labels => {
            let n = cfg.n_labeled.min(cloud.len());
            training_from_labels(cloud, index, need_truth()?, n, cfg.seed, cfg.k, features)?
        }
    };
    let records = ts
        .entries()
        .par_iter()
        .map(|e| {
            let nbh = index.knn(e.index, cfg.k)?;
            Ok(SampleRecord {
                index: e.index,
                sigma: fit_plane(cloud, &nbh)?.sigma,
                class: e.class,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((ts, records))
}

/// Trains with the configured hyperparameters, or with the best grid point
/// when grid search is on.
pub fn train_model(
    cfg: &RunConfig,
    entries: &[crate::sampling::TrainingEntry],
) -> Result<(SvmModel, TrainReport, SvmHyperparams, Option<Vec<GridPoint>>)> {
    let (hp, grid) = if cfg.grid_search {
        let ts = TrainingSet::new(entries.to_vec())
            .map_err(|e| Error::Numeric(e.to_string()))?;
        let (hp, grid) = svm::grid_search(&ts, &cfg.svm, &svm::GRID_C, &svm::GRID_GAMMA, 5, cfg.seed)?;
        (hp, Some(grid))
    } else {
        (cfg.svm, None)
    };
    let (model, report) = svm::train_entries(entries, &hp, cfg.seed)?;
    Ok((model, report, hp, grid))
}

/// Everything one training method produced.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub training: TrainingSet,
    pub records: Vec<SampleRecord>,
    pub model: SvmModel,
    pub report: TrainReport,
    pub hyperparams: SvmHyperparams,
    pub grid: Option<Vec<GridPoint>>,
    pub predicted: LabelVector,
    pub confusion: Option<ConfusionMatrix>,
}

impl MethodRun {
    pub fn metrics(&self) -> Option<Metrics> {
        self.confusion.as_ref().map(Metrics::from_confusion)
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub features: Vec<FeatureVector>,
    pub main: MethodRun,
    pub baseline: Option<MethodRun>,
    pub warnings: Vec<String>,
}

fn run_method(
    cfg: &RunConfig,
    method: Method,
    cloud: &PointCloud,
    index: &SpatialIndex,
    features: &[FeatureVector],
    truth: Option<&LabelVector>,
    seeds: Option<&Seeds>,
) -> Result<MethodRun> {
    let (training, records) = build_training(cfg, method, cloud, index, Some(features), truth, seeds)?;
    let (model, report, hyperparams, grid) = train_model(cfg, training.entries())?;
    let predicted = svm::classify_cloud(&model, features);
    let confusion = truth.map(|t| confusion(&predicted, t)).transpose()?;
    Ok(MethodRun {
        method,
        training,
        records,
        model,
        report,
        hyperparams,
        grid,
        predicted,
        confusion,
    })
}

/// Runs the configured method end to end on the current rayon pool. With
/// `baseline` set and truth labels available, the seed-sphere method is run
/// as well for comparison.
pub fn run_pipeline(
    cfg: &RunConfig,
    cloud: &PointCloud,
    truth: Option<&LabelVector>,
    seeds: Option<&Seeds>,
    baseline: bool,
) -> Result<PipelineOutput> {
    cfg.validate()?;
    if let Some(t) = truth {
        t.check_len(cloud.len())?;
    }
    let mut warnings = Vec::new();
    if cfg.planar_leaves {
        warnings.push(PLANAR_LEAVES_WARNING.to_string());
    }
    let index = SpatialIndex::build(cloud)?;
    let features = compute_features(cloud, &index, cfg.k)?;
    let main = run_method(cfg, cfg.method, cloud, &index, &features, truth, seeds)?;
    let baseline = if baseline && cfg.method != Method::SeedSphere {
        if truth.is_none() && seeds.is_none() {
            return Err(Error::Config(
                "the baseline needs truth labels or a seed file".into(),
            ));
        }
        Some(run_method(cfg, Method::SeedSphere, cloud, &index, &features, truth, seeds)?)
    } else {
        None
    };
    Ok(PipelineOutput {
        features,
        main,
        baseline,
        warnings,
    })
}
