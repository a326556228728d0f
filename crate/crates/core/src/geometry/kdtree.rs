use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::kernel::squared_distance;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Exact k-d tree over a flat coordinate buffer.
///
/// Candidates are ranked by (squared distance, point index), so equal
/// distances resolve to the lower index exactly like a linear scan.
#[derive(Debug, Clone)]
pub(crate) struct KdTree {
    perm: Vec<usize>,
    nodes: Vec<Node>,
}

#[derive(Debug, Clone, Copy)]
struct Hit {
    d2: f64,
    index: usize,
}

impl PartialEq for Hit {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Hit {}
impl PartialOrd for Hit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Hit {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.index.cmp(&other.index))
    }
}

impl KdTree {
    pub(crate) fn build(coords: &[f64], dim: usize) -> Self {
        let n = coords.len() / dim;
        let mut tree = KdTree { perm: (0..n).collect(), nodes: Vec::new() };
        tree.build_node(coords, dim, 0, n);
        tree
    }

    fn build_node(&mut self, coords: &[f64], dim: usize, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        // split along the axis of largest spread
        let axis = (0..dim)
            .map(|a| {
                let (lo, hi) = self.perm[start..end].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    let v = coords[i * dim + a];
                    (lo.min(v), hi.max(v))
                });
                (a, hi - lo)
            })
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .map_or(0, |(a, _)| a);
        let mid = start + (end - start) / 2;
        self.perm[start..end].select_nth_unstable_by(mid - start, |&i, &j| {
            coords[i * dim + axis].total_cmp(&coords[j * dim + axis]).then(i.cmp(&j))
        });
        let value = coords[self.perm[mid] * dim + axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build_node(coords, dim, start, mid);
        let right = self.build_node(coords, dim, mid, end);
        self.nodes[id] = Node::Split { axis, value, left, right };
        id
    }

    /// The `k` nearest points as (index, squared distance), ascending.
    pub(crate) fn knn(&self, coords: &[f64], dim: usize, z: &[f64], k: usize) -> Vec<(usize, f64)> {
        let mut heap = BinaryHeap::with_capacity(k + 1);
        if k > 0 && !self.nodes.is_empty() {
            self.search(0, coords, dim, z, k, &mut heap);
        }
        heap.into_sorted_vec().into_iter().map(|h| (h.index, h.d2)).collect()
    }

    fn search(&self, node: usize, coords: &[f64], dim: usize, z: &[f64], k: usize, heap: &mut BinaryHeap<Hit>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.perm[start..end] {
                    let hit = Hit { d2: squared_distance(z, &coords[i * dim..(i + 1) * dim]), index: i };
                    if heap.len() < k {
                        heap.push(hit);
                    } else if hit < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(hit);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = z[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, coords, dim, z, k, heap);
                // `<=` keeps equidistant points on the far side reachable for index ties
                if heap.len() < k || diff * diff <= heap.peek().unwrap().d2 {
                    self.search(far, coords, dim, z, k, heap);
                }
            }
        }
    }
}
