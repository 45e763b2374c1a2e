//! Exact k-nearest-neighbor search over a point cloud with a kd-tree.
//!
//! Neighbors are ordered by `(squared distance, point index)`, so ties at
//! equal distance resolve to the smaller index and results are
//! deterministic. The query point itself is never returned, even when other
//! points share its coordinates.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Point3, PointCloud, Result};

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
struct Node {
    lo: [f64; 3],
    hi: [f64; 3],
    // Leaf: range into `order`. Inner: children node ids.
    kind: NodeKind,
}

#[derive(Debug, Clone, Copy)]
enum NodeKind {
    Leaf { start: usize, end: usize },
    Inner { left: usize, right: usize },
}

/// Immutable search structure over a cloud. Queries borrow the index and
/// never mutate it, so one index can serve many threads.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    points: Vec<Point3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// The `k` nearest neighbors of one center point, closest first.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet {
    pub center: usize,
    pub indices: Vec<usize>,
    pub distances: Vec<f64>,
}

impl NeighborSet {
    pub fn k(&self) -> usize {
        self.indices.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    d2: f64,
    idx: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, o: &Self) -> Ordering {
        self.d2.total_cmp(&o.d2).then(self.idx.cmp(&o.idx))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

fn bbox(points: &[Point3], ids: &[usize]) -> ([f64; 3], [f64; 3]) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in ids {
        let p = points[i].to_array();
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    (lo, hi)
}

fn box_dist_sq(lo: &[f64; 3], hi: &[f64; 3], q: &Point3) -> f64 {
    let q = q.to_array();
    let mut d2 = 0.0;
    for a in 0..3 {
        let d = if q[a] < lo[a] {
            lo[a] - q[a]
        } else if q[a] > hi[a] {
            q[a] - hi[a]
        } else {
            0.0
        };
        d2 += d * d;
    }
    d2
}

impl SpatialIndex {
    pub fn build(cloud: &PointCloud) -> Result<Self> {
        if cloud.is_empty() {
            return Err(Error::InvalidInput("cannot index an empty cloud".into()));
        }
        let points = cloud.points().to_vec();
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1);
        Self::build_node(&points, &mut order, 0, points.len(), &mut nodes);
        Ok(SpatialIndex {
            points,
            order,
            nodes,
        })
    }

    fn build_node(
        points: &[Point3],
        order: &mut [usize],
        start: usize,
        end: usize,
        nodes: &mut Vec<Node>,
    ) -> usize {
        let (lo, hi) = bbox(points, &order[start..end]);
        let id = nodes.len();
        nodes.push(Node {
            lo,
            hi,
            kind: NodeKind::Leaf { start, end },
        });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let axis = (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0);
        if hi[axis] - lo[axis] <= 0.0 {
            // All points coincide; a leaf of any size is fine.
            return id;
        }
        let mid = start + (end - start) / 2;
        order[start..end].select_nth_unstable_by(mid - start, |&i, &j| {
            points[i]
                .axis(axis)
                .total_cmp(&points[j].axis(axis))
                .then(i.cmp(&j))
        });
        let left = Self::build_node(points, order, start, mid, nodes);
        let right = Self::build_node(points, order, mid, end, nodes);
        nodes[id].kind = NodeKind::Inner { left, right };
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> Point3 {
        self.points[i]
    }

    /// The `k` points closest to point `center`, excluding `center` itself.
    pub fn knn(&self, center: usize, k: usize) -> Result<NeighborSet> {
        let n = self.points.len();
        if center >= n {
            return Err(Error::InvalidInput(format!(
                "center index {center} out of range for {n} points"
            )));
        }
        if k == 0 || k > n - 1 {
            return Err(Error::InvalidInput(format!(
                "k = {k} must be in 1..={} for a cloud of {n} points",
                n - 1
            )));
        }
        let q = self.points[center];
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, &q, center, k, &mut heap);
        let sorted = heap.into_sorted_vec();
        Ok(NeighborSet {
            center,
            indices: sorted.iter().map(|c| c.idx).collect(),
            distances: sorted.iter().map(|c| c.d2.sqrt()).collect(),
        })
    }

    fn search(
        &self,
        node: usize,
        q: &Point3,
        exclude: usize,
        k: usize,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        let nd = &self.nodes[node];
        match nd.kind {
            NodeKind::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if i == exclude {
                        continue;
                    }
                    let c = Candidate {
                        d2: self.points[i].dist_sq(q),
                        idx: i,
                    };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().expect("heap is full") {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            NodeKind::Inner { left, right } => {
                let dl = box_dist_sq(&self.nodes[left].lo, &self.nodes[left].hi, q);
                let dr = box_dist_sq(&self.nodes[right].lo, &self.nodes[right].hi, q);
                let (first, d_first, second, d_second) = if dl <= dr {
                    (left, dl, right, dr)
                } else {
                    (right, dr, left, dl)
                };
                for (child, d) in [(first, d_first), (second, d_second)] {
                    // Equal distance must still be visited: it may hold a
                    // tie with a smaller index.
                    if heap.len() == k && d > heap.peek().expect("heap is full").d2 {
                        continue;
                    }
                    self.search(child, q, exclude, k, heap);
                }
            }
        }
    }

    /// Indices of all points within `radius` (inclusive) of `q`, ascending.
    pub fn within_radius(&self, q: &Point3, radius: f64) -> Vec<usize> {
        let r2 = radius * radius;
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let nd = &self.nodes[id];
            if box_dist_sq(&nd.lo, &nd.hi, q) > r2 {
                continue;
            }
            match nd.kind {
                NodeKind::Leaf { start, end } => out.extend(
                    self.order[start..end]
                        .iter()
                        .copied()
                        .filter(|&i| self.points[i].dist_sq(q) <= r2),
                ),
                NodeKind::Inner { left, right } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        out.sort_unstable();
        out
    }
}
