//! Static 3-d tree with exact nearest, k-nearest and radius queries.
//!
//! Distances use [`dist2`], so results agree bit-for-bit with a linear scan.
//! Equal distances resolve to the lowest point index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{dist2, Point3};

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

/// `(squared distance, index)` ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate(f64, usize);

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl KdTree {
    pub fn new(points: &[Point3]) -> Self {
        let mut tree = KdTree {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            tree.build(0, points.len());
        }
        tree
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

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let axis = self.widest_axis(start, end);
        let mid = start + (end - start) / 2;
        let pts = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            pts[a][axis].total_cmp(&pts[b][axis]).then(a.cmp(&b))
        });
        let value = self.points[self.order[mid]][axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    fn widest_axis(&self, start: usize, end: usize) -> usize {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.order[start..end] {
            for k in 0..3 {
                lo[k] = lo[k].min(self.points[i][k]);
                hi[k] = hi[k].max(self.points[i][k]);
            }
        }
        (0..3)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)))
            .unwrap_or(0)
    }

    /// Exact nearest neighbour: `(index, distance)`. `None` on an empty tree.
    pub fn nearest(&self, query: &Point3) -> Option<(usize, f64)> {
        self.nearest_sq(query).map(|(i, d2)| (i, d2.sqrt()))
    }

    /// Like [`nearest`](Self::nearest) but returns the squared distance.
    pub fn nearest_sq(&self, query: &Point3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = Candidate(f64::INFINITY, usize::MAX);
        self.nearest_rec(0, query, &mut best);
        Some((best.1, best.0))
    }

    fn nearest_rec(&self, node: usize, q: &Point3, best: &mut Candidate) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let c = Candidate(dist2(q, &self.points[i]), i);
                    if c < *best {
                        *best = c;
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.nearest_rec(near, q, best);
                // `<=` keeps equal-distance candidates with lower indices reachable.
                if diff * diff <= best.0 {
                    self.nearest_rec(far, q, best);
                }
            }
        }
    }

    /// The `k` nearest points sorted by `(distance, index)`.
    pub fn k_nearest(&self, query: &Point3, k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.knn_rec(0, query, k, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.1, c.0.sqrt())).collect()
    }

    fn knn_rec(&self, node: usize, q: &Point3, k: usize, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let c = Candidate(dist2(q, &self.points[i]), i);
                    if heap.len() < k {
                        heap.push(c);
                    } else if heap.peek().is_some_and(|worst| c < *worst) {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.knn_rec(near, q, k, heap);
                let visit = heap.len() < k || heap.peek().is_some_and(|w| diff * diff <= w.0);
                if visit {
                    self.knn_rec(far, q, k, heap);
                }
            }
        }
    }

    /// Indices of all points with distance `<= radius`, ascending.
    pub fn within_radius(&self, query: &Point3, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if !self.points.is_empty() && radius >= 0.0 {
            self.radius_rec(0, query, radius * radius, &mut out);
        }
        out.sort_unstable();
        out
    }

    fn radius_rec(&self, node: usize, q: &Point3, r2: f64, out: &mut Vec<usize>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                out.extend(
                    self.order[start..end]
                        .iter()
                        .copied()
                        .filter(|&i| dist2(q, &self.points[i]) <= r2),
                );
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.radius_rec(near, q, r2, out);
                if diff * diff <= r2 {
                    self.radius_rec(far, q, r2, out);
                }
            }
        }
    }

    /// True if any point lies within `radius` of `query`.
    pub fn any_within(&self, query: &Point3, radius: f64) -> bool {
        self.nearest_sq(query).is_some_and(|(_, d2)| d2 <= radius * radius)
    }
}
