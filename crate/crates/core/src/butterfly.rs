//! Unbalanced butterfly graphs and their reduction to dominance counting.
//!
//! The graph superposes H butterfly networks of degree B and depth D that
//! share a merged layer 0. Vertices are labeled (h, layer, a_1..a_D); the
//! edge from layer t-1 to layer t rewrites digit t, so a (u, v) reachability
//! query has a unique candidate path of D edges. Each present edge maps to an
//! axis-aligned rectangle: its layer-0 ancestors form a contiguous x-interval
//! and its last-layer descendants a contiguous y-interval, so reachability
//! becomes "how many rectangles stab (x(u), y(v)))" with target D. Stabbing
//! is evaluated through dominance counts by four-corner inclusion-exclusion.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::grid::PointSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ButterflyError {
    #[error("deleted edge {0:?} is not an edge of this graph")]
    UnknownEdge(EdgeId),
    #[error("vertex {got:?} is on layer {layer}, expected layer {expected}")]
    BadLayer { got: Vec<u8>, layer: usize, expected: usize },
    #[error("label out of range: {0}")]
    BadLabel(String),
}

/// An edge from layer `transition - 1` to layer `transition`, rewriting digit
/// `transition` of the source label from its old value to `new_digit`.
/// Digits are 0-based (0..B); copies are 1-based (1..=H).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId {
    pub copy: usize,
    pub transition: usize,
    pub source_digits: Vec<u8>,
    pub new_digit: u8,
}

/// A vertex label (copy, layer, digits). Layer-0 labels are merged across
/// copies, so the copy field is ignored there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexLabel {
    pub copy: usize,
    pub layer: usize,
    pub digits: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct ButterflyGraph {
    copies: usize,
    degree: usize,
    depth: usize,
    present: BTreeSet<EdgeId>,
}

/// 1-based inclusive rectangle on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridRect {
    pub x1: usize,
    pub x2: usize,
    pub y1: usize,
    pub y2: usize,
}

fn digit_vectors(degree: usize, depth: usize) -> Vec<Vec<u8>> {
    let mut out = vec![vec![]];
    for _ in 0..depth {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..degree as u8).map(move |d| {
                    let mut w = v.clone();
                    w.push(d);
                    w
                })
            })
            .collect();
    }
    out
}

impl ButterflyGraph {
    /// Builds the graph with every edge present except the ones listed in
    /// `deleted`.
    pub fn build(
        copies: usize,
        degree: usize,
        depth: usize,
        deleted: &[EdgeId],
    ) -> Result<Self, ButterflyError> {
        assert!(copies >= 1 && degree >= 1 && depth >= 1, "H, B, D must be positive");
        let mut present = BTreeSet::new();
        for h in 1..=copies {
            for t in 1..=depth {
                for digits in digit_vectors(degree, depth) {
                    for d in 0..degree as u8 {
                        present.insert(EdgeId {
                            copy: h,
                            transition: t,
                            source_digits: digits.clone(),
                            new_digit: d,
                        });
                    }
                }
            }
        }
        for e in deleted {
            if !present.remove(e) {
                return Err(ButterflyError::UnknownEdge(e.clone()));
            }
        }
        Ok(ButterflyGraph { copies, degree, depth, present })
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn present_edges(&self) -> impl Iterator<Item = &EdgeId> {
        self.present.iter()
    }

    pub fn present_edge_count(&self) -> usize {
        self.present.len()
    }

    /// Number of edges in the full graph, H * N * B with N = D * B^D.
    pub fn full_edge_count(&self) -> usize {
        self.copies * self.depth * self.degree.pow(self.depth as u32) * self.degree
    }

    /// Merged layer-0 vertex count, B^D.
    pub fn layer0_count(&self) -> usize {
        self.degree.pow(self.depth as u32)
    }

    /// Per-layer vertex count on layers 1..=D, H * B^D.
    pub fn layer_count(&self) -> usize {
        self.copies * self.degree.pow(self.depth as u32)
    }

    /// All layer-0 labels (digit vectors).
    pub fn layer0_labels(&self) -> Vec<VertexLabel> {
        digit_vectors(self.degree, self.depth)
            .into_iter()
            .map(|digits| VertexLabel { copy: 1, layer: 0, digits })
            .collect()
    }

    /// All last-layer labels, every copy.
    pub fn last_layer_labels(&self) -> Vec<VertexLabel> {
        let mut out = Vec::new();
        for copy in 1..=self.copies {
            for digits in digit_vectors(self.degree, self.depth) {
                out.push(VertexLabel { copy, layer: self.depth, digits });
            }
        }
        out
    }

    fn validate_query(&self, u: &VertexLabel, v: &VertexLabel) -> Result<(), ButterflyError> {
        if u.layer != 0 {
            return Err(ButterflyError::BadLayer { got: u.digits.clone(), layer: u.layer, expected: 0 });
        }
        if v.layer != self.depth {
            return Err(ButterflyError::BadLayer {
                got: v.digits.clone(),
                layer: v.layer,
                expected: self.depth,
            });
        }
        for label in [u, v] {
            if label.digits.len() != self.depth || label.digits.iter().any(|&d| d as usize >= self.degree) {
                return Err(ButterflyError::BadLabel(format!("{:?}", label.digits)));
            }
        }
        if v.copy == 0 || v.copy > self.copies {
            return Err(ButterflyError::BadLabel(format!("copy {}", v.copy)));
        }
        Ok(())
    }

    /// Breadth-first ground truth: is there a directed path from layer-0
    /// vertex `u` to last-layer vertex `v`?
    pub fn reach_oracle(&self, u: &VertexLabel, v: &VertexLabel) -> Result<bool, ButterflyError> {
        self.validate_query(u, v)?;
        let mut queue: VecDeque<(usize, usize, Vec<u8>)> = VecDeque::new();
        let mut seen = BTreeSet::new();
        // Layer 0 is merged: the first step picks any copy.
        for h in 1..=self.copies {
            queue.push_back((h, 0, u.digits.clone()));
        }
        while let Some((h, layer, digits)) = queue.pop_front() {
            if layer == self.depth {
                if h == v.copy && digits == v.digits {
                    return Ok(true);
                }
                continue;
            }
            let t = layer + 1;
            for d in 0..self.degree as u8 {
                let edge = EdgeId {
                    copy: h,
                    transition: t,
                    source_digits: digits.clone(),
                    new_digit: d,
                };
                if self.present.contains(&edge) {
                    let mut next = digits.clone();
                    next[t - 1] = d;
                    if seen.insert((h, t, next.clone())) {
                        queue.push_back((h, t, next));
                    }
                }
            }
        }
        Ok(false)
    }

    /// The unique candidate path from `u` to `v`: edge t rewrites digit t
    /// from u's value to v's value. Reachability holds iff all D of these are
    /// present.
    pub fn path_edges(&self, u: &VertexLabel, v: &VertexLabel) -> Result<Vec<EdgeId>, ButterflyError> {
        self.validate_query(u, v)?;
        let mut digits = u.digits.clone();
        let mut path = Vec::with_capacity(self.depth);
        for t in 1..=self.depth {
            path.push(EdgeId {
                copy: v.copy,
                transition: t,
                source_digits: digits.clone(),
                new_digit: v.digits[t - 1],
            });
            digits[t - 1] = v.digits[t - 1];
        }
        Ok(path)
    }

    /// x-coordinate (1-based) of a layer-0 label: digits ordered with a_D
    /// most significant, so each edge's ancestor set is a contiguous
    /// interval.
    pub fn x_index(&self, digits: &[u8]) -> usize {
        let mut x = 0usize;
        for &d in digits.iter().rev() {
            x = x * self.degree + d as usize;
        }
        x + 1
    }

    /// y-coordinate (1-based) of a last-layer label: ordered by (copy,
    /// a_1..a_D) lexicographically, so each edge's descendant set is a
    /// contiguous interval.
    pub fn y_index(&self, copy: usize, digits: &[u8]) -> usize {
        let mut y = copy - 1;
        for &d in digits.iter() {
            y = y * self.degree + d as usize;
        }
        y + 1
    }

    /// Maps every present edge to its rectangle: x spans the layer-0 labels
    /// agreeing with the source on digits t..D, y spans the last-layer labels
    /// of the same copy agreeing on digits 1..t-1 plus the rewritten digit.
    pub fn edges_to_rectangles(&self) -> Vec<GridRect> {
        self.present.iter().map(|e| self.edge_rectangle(e)).collect()
    }

    fn edge_rectangle(&self, e: &EdgeId) -> GridRect {
        let b = self.degree;
        let t = e.transition;
        let mut x_base = 0usize;
        for i in (t - 1..self.depth).rev() {
            x_base = x_base * b + e.source_digits[i] as usize;
        }
        // Free digits 1..t-1 occupy the low B^(t-1) slots.
        let x_span = b.pow((t - 1) as u32);
        let x1 = x_base * x_span + 1;

        let mut y_base = e.copy - 1;
        for i in 0..t - 1 {
            y_base = y_base * b + e.source_digits[i] as usize;
        }
        y_base = y_base * b + e.new_digit as usize;
        let y_span = b.pow((self.depth - t) as u32);
        let y1 = y_base * y_span + 1;

        GridRect { x1, x2: x1 + x_span - 1, y1, y2: y1 + y_span - 1 }
    }
}

/// Rectangle-stabbing reachability, evaluated through dominance counting.
///
/// Each rectangle contributes four corner points with +-1 weights split over
/// two point sets; the stab count at (x, y) is then the difference of two
/// dominance counts. A (u, v) query is reachable iff exactly D rectangles
/// stab (x(u), y(v)).
#[derive(Debug, Clone)]
pub struct RectangleReachability {
    plus: PointSet,
    minus: PointSet,
    depth: usize,
    degree: usize,
    copies: usize,
}

impl RectangleReachability {
    pub fn from_graph(g: &ButterflyGraph) -> Self {
        Self::from_rectangles(&g.edges_to_rectangles(), g.degree, g.depth, g.copies)
    }

    pub fn from_rectangles(rects: &[GridRect], degree: usize, depth: usize, copies: usize) -> Self {
        let cols = degree.pow(depth as u32) + 1;
        let rows = copies * degree.pow(depth as u32) + 1;
        let mut plus = Vec::with_capacity(2 * rects.len());
        let mut minus = Vec::with_capacity(2 * rects.len());
        for r in rects {
            plus.push((r.x1, r.y1));
            plus.push((r.x2 + 1, r.y2 + 1));
            minus.push((r.x2 + 1, r.y1));
            minus.push((r.x1, r.y2 + 1));
        }
        RectangleReachability {
            plus: PointSet::new(cols, rows, plus).expect("corner points stay on the padded grid"),
            minus: PointSet::new(cols, rows, minus).expect("corner points stay on the padded grid"),
            depth,
            degree,
            copies,
        }
    }

    /// Number of rectangles containing (x, y).
    pub fn stab_count(&self, x: usize, y: usize) -> usize {
        let plus = self.plus.dominance_count(x, y).expect("query on the padded grid");
        let minus = self.minus.dominance_count(x, y).expect("query on the padded grid");
        plus - minus
    }

    pub fn reachable(&self, u: &VertexLabel, v: &VertexLabel) -> Result<bool, ButterflyError> {
        if u.layer != 0 {
            return Err(ButterflyError::BadLayer { got: u.digits.clone(), layer: u.layer, expected: 0 });
        }
        if v.layer != self.depth {
            return Err(ButterflyError::BadLayer {
                got: v.digits.clone(),
                layer: v.layer,
                expected: self.depth,
            });
        }
        if v.copy == 0 || v.copy > self.copies {
            return Err(ButterflyError::BadLabel(format!("copy {}", v.copy)));
        }
        let mut x = 0usize;
        for &d in u.digits.iter().rev() {
            x = x * self.degree + d as usize;
        }
        let mut y = v.copy - 1;
        for &d in v.digits.iter() {
            y = y * self.degree + d as usize;
        }
        Ok(self.stab_count(x + 1, y + 1) == self.depth)
    }
}

/// Checks agreement of the counting reduction with BFS reachability over all
/// (layer-0, last-layer) pairs. Returns the number of pairs checked.
pub fn check_reduction(g: &ButterflyGraph) -> Result<usize, (VertexLabel, VertexLabel)> {
    let counting = RectangleReachability::from_graph(g);
    let sources = g.layer0_labels();
    let sinks = g.last_layer_labels();
    let mut checked = 0;
    for u in &sources {
        for v in &sinks {
            let bfs = g.reach_oracle(u, v).expect("valid labels");
            let counted = counting.reachable(u, v).expect("valid labels");
            if bfs != counted {
                return Err((u.clone(), v.clone()));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::DetRng;

    #[test]
    fn counts_match_definition() {
        // H=1, B=2, D=2: N = D*B^D = 8, |E| = H*N*B = 16, layer 0 has B^D = 4.
        let g = ButterflyGraph::build(1, 2, 2, &[]).unwrap();
        assert_eq!(g.layer0_count(), 4);
        assert_eq!(g.layer_count(), 4);
        assert_eq!(g.full_edge_count(), 16);
        assert_eq!(g.present_edge_count(), 16);
    }

    #[test]
    fn layer0_is_merged_across_copies() {
        let g = ButterflyGraph::build(2, 2, 2, &[]).unwrap();
        assert_eq!(g.layer0_count(), 4);
        assert_eq!(g.layer_count(), 8);
    }

    #[test]
    fn full_graph_reaches_everything() {
        let g = ButterflyGraph::build(2, 2, 2, &[]).unwrap();
        for u in g.layer0_labels() {
            for v in g.last_layer_labels() {
                assert!(g.reach_oracle(&u, &v).unwrap());
            }
        }
    }

    #[test]
    fn fully_deleted_graph_reaches_nothing() {
        let full = ButterflyGraph::build(1, 2, 2, &[]).unwrap();
        let all: Vec<EdgeId> = full.present_edges().cloned().collect();
        let g = ButterflyGraph::build(1, 2, 2, &all).unwrap();
        assert_eq!(g.present_edge_count(), 0);
        for u in g.layer0_labels() {
            for v in g.last_layer_labels() {
                assert!(!g.reach_oracle(&u, &v).unwrap());
            }
        }
    }

    #[test]
    fn unknown_deletion_is_rejected() {
        let bogus = EdgeId { copy: 9, transition: 1, source_digits: vec![0, 0], new_digit: 0 };
        assert!(matches!(
            ButterflyGraph::build(1, 2, 2, &[bogus]),
            Err(ButterflyError::UnknownEdge(_))
        ));
    }

    #[test]
    fn bad_layer_is_rejected() {
        let g = ButterflyGraph::build(1, 2, 2, &[]).unwrap();
        let u = VertexLabel { copy: 1, layer: 1, digits: vec![0, 0] };
        let v = VertexLabel { copy: 1, layer: 2, digits: vec![0, 0] };
        assert!(matches!(g.reach_oracle(&u, &v), Err(ButterflyError::BadLayer { .. })));
    }

    #[test]
    fn bfs_matches_unique_path_presence() {
        let full = ButterflyGraph::build(1, 2, 2, &[]).unwrap();
        let all: Vec<EdgeId> = full.present_edges().cloned().collect();
        let mut rng = DetRng::new(99);
        for _ in 0..50 {
            let deleted: Vec<EdgeId> =
                all.iter().filter(|_| rng.next_bool()).cloned().collect();
            let g = ButterflyGraph::build(1, 2, 2, &deleted).unwrap();
            for u in g.layer0_labels() {
                for v in g.last_layer_labels() {
                    let by_path = g
                        .path_edges(&u, &v)
                        .unwrap()
                        .iter()
                        .all(|e| g.present.contains(e));
                    assert_eq!(g.reach_oracle(&u, &v).unwrap(), by_path);
                }
            }
        }
    }

    #[test]
    fn deleting_one_path_edge_breaks_counting_reachability() {
        let full = ButterflyGraph::build(1, 2, 2, &[]).unwrap();
        let u = VertexLabel { copy: 1, layer: 0, digits: vec![0, 1] };
        let v = VertexLabel { copy: 1, layer: 2, digits: vec![1, 0] };
        let path = full.path_edges(&u, &v).unwrap();
        let g = ButterflyGraph::build(1, 2, 2, &path[..1]).unwrap();
        let counting = RectangleReachability::from_graph(&g);
        assert!(!counting.reachable(&u, &v).unwrap());
        // Stab count drops to D - 1 for that pair.
        let x = g.x_index(&u.digits);
        let y = g.y_index(v.copy, &v.digits);
        assert_eq!(counting.stab_count(x, y), 1);
    }

    #[test]
    fn reduction_agrees_with_bfs_on_random_deletions() {
        let mut rng = DetRng::new(7);
        for copies in [1, 2] {
            let full = ButterflyGraph::build(copies, 2, 2, &[]).unwrap();
            let all: Vec<EdgeId> = full.present_edges().cloned().collect();
            for _ in 0..20 {
                let deleted: Vec<EdgeId> =
                    all.iter().filter(|_| rng.next_bool()).cloned().collect();
                let g = ButterflyGraph::build(copies, 2, 2, &deleted).unwrap();
                check_reduction(&g).unwrap();
            }
        }
    }
}
