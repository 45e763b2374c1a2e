//! Core point-cloud and label types shared by every stage.

use std::ops::{Add, Index, Mul, Sub};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dot(&self, o: &Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Point3) -> Point3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Squared Euclidean distance. Every neighborhood ordering in the crate
    /// compares values produced by this exact expression.
    #[inline]
    pub fn dist_sq(&self, o: &Point3) -> f64 {
        let dx = self.x - o.x;
        let dy = self.y - o.y;
        let dz = self.z - o.z;
        dx * dx + dy * dy + dz * dz
    }

    pub fn dist(&self, o: &Point3) -> f64 {
        self.dist_sq(o).sqrt()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn axis(&self, a: usize) -> f64 {
        match a {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl Add for Point3 {
    type Output = Point3;
    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;
    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;
    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

/// An ordered, non-empty set of finite points. Point order is the identity
/// used by every index-based reference (neighbor lists, labels, samples).
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("point cloud is empty".into()));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "point {i} has a non-finite coordinate"
            )));
        }
        Ok(PointCloud { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point3> {
        self.points.iter()
    }
}

impl Index<usize> for PointCloud {
    type Output = Point3;
    fn index(&self, i: usize) -> &Point3 {
        &self.points[i]
    }
}

/// Binary point class. On disk leaf is 1 and wood is 0; leaf is the positive
/// class for confusion-matrix purposes and `+1` for the SVM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    Wood = 0,
    Leaf = 1,
}

impl Class {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: i64) -> Option<Class> {
        match code {
            0 => Some(Class::Wood),
            1 => Some(Class::Leaf),
            _ => None,
        }
    }

    /// SVM target: leaf `+1`, wood `-1`.
    pub fn sign(self) -> f64 {
        match self {
            Class::Leaf => 1.0,
            Class::Wood => -1.0,
        }
    }

    pub fn flipped(self) -> Class {
        match self {
            Class::Leaf => Class::Wood,
            Class::Wood => Class::Leaf,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Class::Leaf => "leaf",
            Class::Wood => "wood",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelVector(pub Vec<Class>);

impl LabelVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Class> {
        self.0.iter()
    }

    pub fn count(&self, class: Class) -> usize {
        self.0.iter().filter(|&&c| c == class).count()
    }

    /// Errors unless the vector labels exactly `n` points.
    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::InvalidInput(format!(
                "label count {} does not match point count {n}",
                self.len()
            )));
        }
        Ok(())
    }
}

impl Index<usize> for LabelVector {
    type Output = Class;
    fn index(&self, i: usize) -> &Class {
        &self.0[i]
    }
}

impl From<Vec<Class>> for LabelVector {
    fn from(v: Vec<Class>) -> Self {
        LabelVector(v)
    }
}

impl FromIterator<Class> for LabelVector {
    fn from_iter<I: IntoIterator<Item = Class>>(iter: I) -> Self {
        LabelVector(iter.into_iter().collect())
    }
}
