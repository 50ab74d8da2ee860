//! Exact k-nearest-neighbor queries over Euclidean points.
//!
//! A static bucketed kd-tree. Queries return exact distances and break
//! distance ties by smaller point id, so every downstream stage of the
//! pipeline is deterministic. The index is immutable after construction
//! and safe to query from many threads.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::points::{squared_euclidean, Points};

const LEAF_SIZE: usize = 16;

#[derive(Debug)]
enum Node {
    Split {
        axis: u32,
        value: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        start: u32,
        end: u32,
    },
}

/// Exact kNN index over an immutable copy of the input points.
#[derive(Debug)]
pub struct KnnIndex {
    points: Points,
    nodes: Vec<Node>,
    perm: Vec<u32>,
    root: u32,
}

/// Heap entry ordered by (squared distance, id); the max element is the
/// current worst candidate.
#[derive(PartialEq)]
struct Candidate {
    d2: f64,
    id: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.d2
            .total_cmp(&other.d2)
            .then_with(|| self.id.cmp(&other.id))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Builds a [`KnnIndex`] over the given points (copied into the index).
pub fn build_index(points: &Points) -> Result<KnnIndex> {
    KnnIndex::build(points)
}

impl KnnIndex {
    /// Builds the index. Point ids are the row indices `0..n-1`.
    pub fn build(points: &Points) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        if let Some((row, col)) = points.find_non_finite() {
            return Err(Error::NonFinite { row, col });
        }
        let mut perm: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::new();
        let root = build_rec(points, &mut nodes, &mut perm, 0);
        Ok(Self {
            points: points.clone(),
            nodes,
            perm,
            root,
        })
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    /// Returns the `min(k, n)` nearest points to `q` as `(id, distance)`,
    /// sorted ascending by `(distance, id)`.
    pub fn query_knn(&self, q: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
        if k == 0 {
            return Err(Error::InvalidParam("k must be >= 1".into()));
        }
        if q.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: q.len(),
            });
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam("non-finite query coordinate".into()));
        }
        let cap = k.min(self.len());
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(cap + 1);
        self.search(self.root, q, cap, &mut heap);
        let mut out: Vec<(usize, f64)> = heap
            .into_iter()
            .map(|c| (c.id, c.d2.sqrt()))
            .collect();
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        Ok(out)
    }

    fn search(&self, node: u32, q: &[f64], cap: usize, heap: &mut BinaryHeap<Candidate>) {
        match &self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for &id in &self.perm[*start as usize..*end as usize] {
                    let id = id as usize;
                    let d2 = squared_euclidean(q, self.points.row(id));
                    if heap.len() < cap {
                        heap.push(Candidate { d2, id });
                    } else {
                        let worst = heap.peek().expect("heap is at capacity");
                        if (d2, id) < (worst.d2, worst.id) {
                            heap.pop();
                            heap.push(Candidate { d2, id });
                        }
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[*axis as usize] - value;
                let (near, far) = if diff < 0.0 {
                    (*left, *right)
                } else {
                    (*right, *left)
                };
                self.search(near, q, cap, heap);
                // A far-side point can tie the current worst distance and win
                // on id, so the boundary case must descend.
                let bound = if heap.len() < cap {
                    f64::INFINITY
                } else {
                    heap.peek().expect("heap is at capacity").d2
                };
                if diff * diff <= bound {
                    self.search(far, q, cap, heap);
                }
            }
        }
    }
}

fn build_rec(points: &Points, nodes: &mut Vec<Node>, perm: &mut [u32], offset: usize) -> u32 {
    if perm.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: offset as u32,
            end: (offset + perm.len()) as u32,
        });
        return (nodes.len() - 1) as u32;
    }
    // Split the widest dimension at its median element; id order breaks
    // coordinate ties so the build is deterministic.
    let axis = widest_axis(points, perm);
    let mid = perm.len() / 2;
    perm.select_nth_unstable_by(mid, |&a, &b| {
        points.row(a as usize)[axis]
            .total_cmp(&points.row(b as usize)[axis])
            .then_with(|| a.cmp(&b))
    });
    let value = points.row(perm[mid] as usize)[axis];
    let (lo, hi) = perm.split_at_mut(mid);
    let left = build_rec(points, nodes, lo, offset);
    let right = build_rec(points, nodes, hi, offset + mid);
    nodes.push(Node::Split {
        axis: axis as u32,
        value,
        left,
        right,
    });
    (nodes.len() - 1) as u32
}

fn widest_axis(points: &Points, perm: &[u32]) -> usize {
    let d = points.dim();
    let mut best_axis = 0;
    let mut best_spread = f64::NEG_INFINITY;
    for axis in 0..d {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &id in perm {
            let v = points.row(id as usize)[axis];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let spread = hi - lo;
        if spread > best_spread {
            best_spread = spread;
            best_axis = axis;
        }
    }
    best_axis
}
