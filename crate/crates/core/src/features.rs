//! Local geometric features: change of curvature and neighborhood density.
//!
//! For a point and its k nearest neighbors the covariance of the k+1 points
//! (center included, divisor k+1) is decomposed; the change of curvature is
//! the smallest eigenvalue over the eigenvalue sum, and the density is the
//! mean neighbor distance. Together with the coordinates they form the
//! 5-component feature vector fed to the classifier.

use rayon::prelude::*;

use crate::spatial::{NeighborSet, SpatialIndex};
use crate::{Error, Point3, PointCloud, Result};

/// Default neighborhood size.
pub const DEFAULT_K: usize = 100;

/// Below this eigenvalue sum (m²) a neighborhood counts as degenerate.
pub const TRACE_EPS: f64 = 1e-12;

/// Symmetric 3×3 matrix stored as its six independent entries.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymMat3 {
    pub xx: f64,
    pub xy: f64,
    pub xz: f64,
    pub yy: f64,
    pub yz: f64,
    pub zz: f64,
}

impl SymMat3 {
    pub fn from_rows(m: [[f64; 3]; 3]) -> Self {
        SymMat3 {
            xx: m[0][0],
            xy: m[0][1],
            xz: m[0][2],
            yy: m[1][1],
            yz: m[1][2],
            zz: m[2][2],
        }
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        SymMat3 {
            xx: a,
            yy: b,
            zz: c,
            ..Default::default()
        }
    }

    pub fn rows(&self) -> [[f64; 3]; 3] {
        [
            [self.xx, self.xy, self.xz],
            [self.xy, self.yy, self.yz],
            [self.xz, self.yz, self.zz],
        ]
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy + self.zz
    }

    pub fn det(&self) -> f64 {
        self.xx * (self.yy * self.zz - self.yz * self.yz)
            - self.xy * (self.xy * self.zz - self.yz * self.xz)
            + self.xz * (self.xy * self.yz - self.yy * self.xz)
    }

    /// Sum of the principal 2×2 minors.
    fn minor_sum(&self) -> f64 {
        (self.xx * self.yy - self.xy * self.xy)
            + (self.xx * self.zz - self.xz * self.xz)
            + (self.yy * self.zz - self.yz * self.yz)
    }

    pub fn shifted(&self, s: f64) -> Self {
        SymMat3 {
            xx: self.xx - s,
            yy: self.yy - s,
            zz: self.zz - s,
            ..*self
        }
    }

    fn scaled(&self, s: f64) -> Self {
        SymMat3 {
            xx: self.xx * s,
            xy: self.xy * s,
            xz: self.xz * s,
            yy: self.yy * s,
            yz: self.yz * s,
            zz: self.zz * s,
        }
    }

    pub fn max_abs(&self) -> f64 {
        [self.xx, self.xy, self.xz, self.yy, self.yz, self.zz]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        [self.xx, self.xy, self.xz, self.yy, self.yz, self.zz]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Eigenvalues in descending order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenTriple {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

impl EigenTriple {
    pub fn sum(&self) -> f64 {
        self.l1 + self.l2 + self.l3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub c_lambda: f64,
    pub rho: f64,
}

impl FeatureVector {
    pub const DIM: usize = 5;

    pub fn to_array(&self) -> [f64; 5] {
        [self.x, self.y, self.z, self.c_lambda, self.rho]
    }
}

/// Mean of the center point plus its neighbors.
pub fn neighborhood_mean(cloud: &PointCloud, nbh: &NeighborSet) -> Point3 {
    let mut s = cloud[nbh.center];
    for &j in &nbh.indices {
        s = s + cloud[j];
    }
    s * (1.0 / (nbh.k() + 1) as f64)
}

fn check_nbh(cloud: &PointCloud, nbh: &NeighborSet) -> Result<()> {
    let n = cloud.len();
    if nbh.center >= n || nbh.indices.iter().any(|&j| j >= n) {
        return Err(Error::InvalidInput("neighbor set does not match cloud".into()));
    }
    Ok(())
}

/// Population covariance (divisor k+1) of the center and its k neighbors.
pub fn local_covariance(cloud: &PointCloud, nbh: &NeighborSet) -> Result<SymMat3> {
    check_nbh(cloud, nbh)?;
    let mean = neighborhood_mean(cloud, nbh);
    let mut c = SymMat3::default();
    for &j in std::iter::once(&nbh.center).chain(&nbh.indices) {
        let d = cloud[j] - mean;
        c.xx += d.x * d.x;
        c.xy += d.x * d.y;
        c.xz += d.x * d.z;
        c.yy += d.y * d.y;
        c.yz += d.y * d.z;
        c.zz += d.z * d.z;
    }
    Ok(c.scaled(1.0 / (nbh.k() + 1) as f64))
}

/// Closed-form (trigonometric) eigenvalues of a symmetric 3×3 matrix with a
/// guarded Newton refinement on the characteristic polynomial.
pub fn eigenvalues_sym3(m: &SymMat3) -> Result<EigenTriple> {
    if !m.is_finite() {
        return Err(Error::Numeric("matrix has non-finite entries".into()));
    }
    let scale = m.max_abs();
    if scale == 0.0 {
        return Ok(EigenTriple {
            l1: 0.0,
            l2: 0.0,
            l3: 0.0,
        });
    }
    let a = m.scaled(1.0 / scale);
    let mean = a.trace() / 3.0;
    let b = a.shifted(mean);
    let off = b.xy * b.xy + b.xz * b.xz + b.yz * b.yz;
    let p2 = b.xx * b.xx + b.yy * b.yy + b.zz * b.zz + 2.0 * off;
    let mut eig = if p2 <= 0.0 {
        [mean; 3]
    } else {
        let p = (p2 / 6.0).sqrt();
        let r = (b.det() / 2.0 / (p * p * p)).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = mean + 2.0 * p * phi.cos();
        let e3 = mean + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos();
        [e1, 3.0 * mean - e1 - e3, e3]
    };
    for e in eig.iter_mut() {
        *e = newton_polish(&a, *e);
    }
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(EigenTriple {
        l1: eig[0] * scale,
        l2: eig[1] * scale,
        l3: eig[2] * scale,
    })
}

fn newton_polish(a: &SymMat3, mut lambda: f64) -> f64 {
    let mut f = a.shifted(lambda).det();
    for _ in 0..2 {
        if f == 0.0 {
            break;
        }
        // d/dλ det(A − λI) = −(sum of principal minors of A − λI)
        let df = -a.shifted(lambda).minor_sum();
        if df.abs() < 1e-6 {
            break;
        }
        let cand = lambda - f / df;
        let fc = a.shifted(cand).det();
        if fc.abs() < f.abs() {
            lambda = cand;
            f = fc;
        } else {
            break;
        }
    }
    lambda
}

/// Unit eigenvector of `m` for eigenvalue `lambda`, from the best-conditioned
/// cross product of rows of `m − λI`. Falls back to any vector orthogonal
/// to the dominant row when the null space is two-dimensional, and to
/// `(0, 0, 1)` when it is the whole space.
pub fn eigenvector_sym3(m: &SymMat3, lambda: f64) -> Point3 {
    let scale = m.max_abs().max(lambda.abs());
    if scale == 0.0 {
        return Point3::new(0.0, 0.0, 1.0);
    }
    let rows = m.shifted(lambda).scaled(1.0 / scale).rows();
    let r: [Point3; 3] = [rows[0].into(), rows[1].into(), rows[2].into()];
    let crosses = [r[0].cross(&r[1]), r[0].cross(&r[2]), r[1].cross(&r[2])];
    let best = crosses
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sq().total_cmp(&b.norm_sq()))
        .expect("three candidates");
    let row_max = r
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sq().total_cmp(&b.norm_sq()))
        .expect("three rows");
    let rn2 = row_max.norm_sq();
    if best.norm_sq() > 1e-20 * rn2 * rn2 && best.norm_sq() > 0.0 {
        return best * (1.0 / best.norm());
    }
    if rn2 > 1e-20 {
        // Any unit vector orthogonal to the dominant row.
        let u = row_max * (1.0 / rn2.sqrt());
        let helper = if u.x.abs() < 0.9 {
            Point3::new(1.0, 0.0, 0.0)
        } else {
            Point3::new(0.0, 1.0, 0.0)
        };
        let v = u.cross(&helper);
        return v * (1.0 / v.norm());
    }
    Point3::new(0.0, 0.0, 1.0)
}

/// Normalizes the eigenvalues to unit sum, then takes the smallest over the
/// sum of the normalized values. Degenerate (near-zero trace)
/// neighborhoods yield 0.
pub fn change_of_curvature(e: &EigenTriple) -> f64 {
    let sum = e.sum();
    if sum < TRACE_EPS {
        return 0.0;
    }
    let (e1, e2, e3) = (e.l1 / sum, e.l2 / sum, e.l3 / sum);
    (e3 / (e1 + e2 + e3)).clamp(0.0, 1.0 / 3.0)
}

/// Mean distance from the center to its neighbors.
pub fn local_density(nbh: &NeighborSet) -> f64 {
    if nbh.distances.is_empty() {
        return 0.0;
    }
    nbh.distances.iter().sum::<f64>() / nbh.distances.len() as f64
}

/// Features of point `i` over its `k`-neighborhood.
pub fn point_features(
    cloud: &PointCloud,
    index: &SpatialIndex,
    i: usize,
    k: usize,
) -> Result<FeatureVector> {
    let nbh = index.knn(i, k)?;
    let cov = local_covariance(cloud, &nbh)?;
    let eig = eigenvalues_sym3(&cov)?;
    let p = cloud[i];
    Ok(FeatureVector {
        x: p.x,
        y: p.y,
        z: p.z,
        c_lambda: change_of_curvature(&eig),
        rho: local_density(&nbh),
    })
}

/// One feature vector per point, in cloud order. Runs on the current rayon
/// pool; output does not depend on the pool size.
pub fn compute_features(
    cloud: &PointCloud,
    index: &SpatialIndex,
    k: usize,
) -> Result<Vec<FeatureVector>> {
    if index.len() != cloud.len() {
        return Err(Error::InvalidInput("index was built for a different cloud".into()));
    }
    (0..cloud.len())
        .into_par_iter()
        .map(|i| point_features(cloud, index, i, k))
        .collect()
}
