use crate::mesh::SimplicialMesh;
use crate::scalar::Real;

use super::{barycentric_coordinates, PointLocation, CONTAINMENT_TOLERANCE};

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone)]
struct Node<T> {
    lo: [T; 3],
    hi: [T; 3],
    kind: NodeKind,
}

#[derive(Debug, Clone)]
enum NodeKind {
    Leaf { start: usize, end: usize },
    Inner { left: usize, right: usize },
}

/// Bounding-volume hierarchy over the simplices of one mesh.
///
/// Boxes are inflated by the containment tolerance so that every simplex
/// passing the barycentric test is reported as a candidate.
#[derive(Debug, Clone)]
pub struct AabbTree<T> {
    dim: usize,
    nodes: Vec<Node<T>>,
    items: Vec<usize>,
    tolerance: T,
}

impl<T: Real> AabbTree<T> {
    pub fn new(mesh: &SimplicialMesh<T>) -> Self {
        let dim = mesh.dim();
        let diag = mesh.bbox_diagonal();
        let tolerance = T::tol(CONTAINMENT_TOLERANCE);
        let pad = tolerance * diag;
        let boxes: Vec<([T; 3], [T; 3])> = (0..mesh.num_simplices())
            .map(|t| {
                let mut lo = [T::zero(); 3];
                let mut hi = [T::zero(); 3];
                for c in 0..dim {
                    lo[c] = T::max_value().unwrap();
                    hi[c] = T::min_value().unwrap();
                }
                for p in mesh.simplex_points(t) {
                    for c in 0..dim {
                        lo[c] = lo[c].min(p[c]);
                        hi[c] = hi[c].max(p[c]);
                    }
                }
                for c in 0..dim {
                    lo[c] -= pad;
                    hi[c] += pad;
                }
                (lo, hi)
            })
            .collect();
        let mut tree = Self { dim, nodes: Vec::new(), items: (0..boxes.len()).collect(), tolerance: tolerance * diag };
        if !boxes.is_empty() {
            let n = boxes.len();
            tree.build(&boxes, 0, n);
        }
        tree
    }

    fn build(&mut self, boxes: &[([T; 3], [T; 3])], start: usize, end: usize) -> usize {
        let dim = self.dim;
        let mut lo = boxes[self.items[start]].0;
        let mut hi = boxes[self.items[start]].1;
        for &i in &self.items[start..end] {
            for c in 0..dim {
                lo[c] = lo[c].min(boxes[i].0[c]);
                hi[c] = hi[c].max(boxes[i].1[c]);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node { lo, hi, kind: NodeKind::Leaf { start, end } });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let axis = (0..dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).partial_cmp(&(hi[b] - lo[b])).unwrap())
            .unwrap();
        let center = |i: usize| boxes[i].0[axis] + boxes[i].1[axis];
        self.items[start..end].sort_by(|&a, &b| center(a).partial_cmp(&center(b)).unwrap().then(a.cmp(&b)));
        let mid = start + (end - start) / 2;
        let left = self.build(boxes, start, mid);
        let right = self.build(boxes, mid, end);
        self.nodes[id].kind = NodeKind::Inner { left, right };
        id
    }

    /// Indices of simplices whose (inflated) box contains `p`, ascending.
    pub fn candidates(&self, p: &[T]) -> Vec<usize> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            return out;
        }
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if (0..self.dim).any(|c| p[c] < node.lo[c] || p[c] > node.hi[c]) {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, end } => out.extend_from_slice(&self.items[start..end]),
                NodeKind::Inner { left, right } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Lowest-index simplex of `mesh` whose barycentric coordinates of `p`
    /// are all at least `-tolerance`, if any.
    pub fn locate_point(&self, mesh: &SimplicialMesh<T>, p: &[T]) -> Option<PointLocation<T>> {
        let tol = self.tolerance;
        self.candidates(p).into_iter().find_map(|t| {
            let coords = barycentric_coordinates(&mesh.simplex_points(t), p).ok()?;
            coords.iter().all(|c| *c >= -tol).then_some(PointLocation { simplex: t, coords })
        })
    }
}
