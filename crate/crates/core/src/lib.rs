//! Wood/leaf separation for terrestrial LiDAR tree point clouds.
//!
//! The pipeline computes per-point local geometric features over exact
//! k-nearest neighborhoods, selects leaf and wood training points
//! automatically from the residual spread of a local plane fit, trains an
//! RBF-kernel SVM with SMO and classifies every point of the cloud.
//!
//! ```no_run
//! use leafwood::{features, io, sampling, spatial::SpatialIndex, svm};
//!
//! let cloud = io::read_xyz("tree.xyz")?;
//! let index = SpatialIndex::build(&cloud)?;
//! let feats = features::compute_features(&cloud, &index, 100)?;
//! let ts = sampling::auto_select_training(&cloud, &index, &sampling::SampleProfile::LEAFY, 100, 42)?;
//! let model = svm::train(&ts, &svm::SvmHyperparams::default(), 42)?;
//! let labels = svm::classify_cloud(&model, &feats);
//! io::write_classified_ply(&cloud, &labels, "classified.ply")?;
//! # Ok::<(), leafwood::Error>(())
//! ```

pub mod cli;
pub mod error;
pub mod eval;
pub mod features;
pub mod geometry;
pub mod io;
pub mod sampling;
pub mod spatial;
pub mod svm;
pub mod synthgen;

pub use error::{Error, ErrorClass, Result};
pub use geometry::{Class, LabelVector, Point3, PointCloud};
