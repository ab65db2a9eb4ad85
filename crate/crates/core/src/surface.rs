//! Abstract cell complexes: the common ground for planar disks, cut-open
//! annuli and their `n`-fold covers, which need not embed in the plane.
//!
//! Everything downstream (enumeration, flips, Kasteleyn weights) only sees
//! cells with colors, adjacency edges, 2x2 flip blocks, the ordered list of
//! cut-crossing edges and a spanning tree of the cut-open graph.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::region::{color, Annulus, Cell, Cut, GridRegion, RegionError, BLACK};

/// Cell of a surface: copy index in a cover (0 for planar regions) and the
/// planar cell it lifts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CellLabel {
    pub copy: u32,
    pub cell: Cell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Orientation {
    /// Cells side by side in a row.
    Horizontal,
    /// Cells stacked in a column.
    Vertical,
}

/// A domino position. For cut-crossing edges `a` is the left cell and `b`
/// the right cell of the crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub orientation: Orientation,
    /// Index into the crossing list when the edge crosses the cut.
    pub crossing: Option<usize>,
    /// Index of the planar edge this lifts (itself for planar surfaces).
    pub base: usize,
}

/// A 2x2 block: cells top-left, top-right, bottom-left, bottom-right, and
/// edges top, bottom, left, right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block {
    pub cells: [usize; 4],
    pub edges: [usize; 4],
}

pub const TOP: usize = 0;
pub const BOTTOM: usize = 1;
pub const LEFT: usize = 2;
pub const RIGHT: usize = 3;

#[derive(Debug, Clone)]
pub struct Surface {
    labels: Vec<CellLabel>,
    colors: Vec<u8>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    blocks: Vec<Block>,
    crossings: Vec<usize>,
    tree: Vec<usize>,
    copies: usize,
}

impl Surface {
    /// The planar surface of a region; `cut` (for annuli) marks the
    /// crossing edges in cut order.
    pub fn planar(region: &GridRegion, cut: Option<&Cut>) -> Surface {
        let cells = region.cells();
        let labels: Vec<CellLabel> = cells.iter().map(|&cell| CellLabel { copy: 0, cell }).collect();
        let colors = cells.iter().map(|&c| color(c)).collect();
        let mut crossing_of: HashMap<(Cell, Cell), usize> = HashMap::new();
        if let Some(cut) = cut {
            for (i, c) in cut.crossings.iter().enumerate() {
                crossing_of.insert((c.left, c.right), i);
                crossing_of.insert((c.right, c.left), i);
            }
        }
        let mut edges = Vec::new();
        let mut crossings = vec![usize::MAX; cut.map_or(0, |c| c.crossings.len())];
        let mut pair_edge: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, &(x, y)) in cells.iter().enumerate() {
            for (nb, orientation) in [((x + 1, y), Orientation::Horizontal), ((x, y + 1), Orientation::Vertical)] {
                let Some(j) = region.index_of(nb) else { continue };
                let id = edges.len();
                let crossing = crossing_of.get(&(cells[i], nb)).copied();
                let (a, b) = match crossing {
                    Some(k) if cut.unwrap().crossings[k].left == nb => (j, i),
                    _ => (i, j),
                };
                if let Some(k) = crossing {
                    crossings[k] = id;
                }
                edges.push(Edge {
                    a,
                    b,
                    orientation,
                    crossing,
                    base: id,
                });
                pair_edge.insert((i.min(j), i.max(j)), id);
            }
        }
        assert!(crossings.iter().all(|&e| e != usize::MAX), "cut crossings must be region edges");
        let find = |u: usize, v: usize| pair_edge[&(u.min(v), u.max(v))];
        let mut blocks = Vec::new();
        for (i, &(x, y)) in cells.iter().enumerate() {
            let (Some(tr), Some(bl), Some(br)) = (
                region.index_of((x + 1, y)),
                region.index_of((x, y + 1)),
                region.index_of((x + 1, y + 1)),
            ) else {
                continue;
            };
            blocks.push(Block {
                cells: [i, tr, bl, br],
                edges: [find(i, tr), find(bl, br), find(i, bl), find(tr, br)],
            });
        }
        let mut s = Surface {
            labels,
            colors,
            adjacency: Vec::new(),
            edges,
            blocks,
            crossings,
            tree: Vec::new(),
            copies: 1,
        };
        s.build_adjacency();
        s.tree = s.bfs_tree();
        s
    }

    fn build_adjacency(&mut self) {
        let mut adjacency = vec![Vec::new(); self.labels.len()];
        for (id, e) in self.edges.iter().enumerate() {
            adjacency[e.a].push((e.b, id));
            adjacency[e.b].push((e.a, id));
        }
        for list in &mut adjacency {
            list.sort();
        }
        self.adjacency = adjacency;
    }

    /// BFS spanning tree of the cut-open graph from cell 0.
    fn bfs_tree(&self) -> Vec<usize> {
        let n = self.labels.len();
        let mut seen = vec![false; n];
        let mut tree = Vec::new();
        if n == 0 {
            return tree;
        }
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for &(v, e) in &self.adjacency[u] {
                if self.edges[e].crossing.is_none() && !seen[v] {
                    seen[v] = true;
                    tree.push(e);
                    queue.push_back(v);
                }
            }
        }
        tree
    }

    /// The `n`-fold cover: copies `0..n` of the cut-open surface, copy `k`
    /// glued to copy `k + 1` (mod `n`) along the cut. Its own cut is the
    /// copy between copy `n - 1` and copy 0. The spanning tree is the base
    /// tree lifted to every copy plus the first crossing of each interior
    /// cut copy, so the cover's weights are the lift of the base weights.
    pub fn cover(&self, n: usize) -> Surface {
        assert!(n >= 1, "cover degree must be positive");
        assert!(self.copies == 1, "covers are built from planar surfaces");
        assert!(!self.crossings.is_empty(), "covers need a cut");
        let base = self.labels.len();
        let id = |k: usize, c: usize| k * base + c;
        let mut labels = Vec::with_capacity(n * base);
        let mut colors = Vec::with_capacity(n * base);
        for k in 0..n {
            for c in 0..base {
                labels.push(CellLabel {
                    copy: k as u32,
                    cell: self.labels[c].cell,
                });
                colors.push(self.colors[c]);
            }
        }
        let mut edges = Vec::with_capacity(n * self.edges.len());
        let mut crossings = vec![0; self.crossings.len()];
        let mut lifted_edge = vec![vec![0; self.edges.len()]; n];
        for k in 0..n {
            for (eid, e) in self.edges.iter().enumerate() {
                let (a, b, crossing) = match e.crossing {
                    None => (id(k, e.a), id(k, e.b), None),
                    Some(i) => {
                        let closing = k == n - 1;
                        (id(k, e.a), id((k + 1) % n, e.b), closing.then_some(i))
                    }
                };
                if let Some(i) = crossing {
                    crossings[i] = edges.len();
                }
                lifted_edge[k][eid] = edges.len();
                edges.push(Edge {
                    a,
                    b,
                    orientation: e.orientation,
                    crossing,
                    base: eid,
                });
            }
        }
        let mut blocks = Vec::with_capacity(n * self.blocks.len());
        for blk in &self.blocks {
            // copy offsets of the block's cells relative to its top-left cell
            let mut off: HashMap<usize, i64> = HashMap::from([(blk.cells[0], 0)]);
            while off.len() < 4 {
                for &eid in &blk.edges {
                    let e = self.edges[eid];
                    let step = i64::from(e.crossing.is_some());
                    match (off.get(&e.a).copied(), off.get(&e.b).copied()) {
                        (Some(x), None) => {
                            off.insert(e.b, x + step);
                        }
                        (None, Some(y)) => {
                            off.insert(e.a, y - step);
                        }
                        _ => {}
                    }
                }
            }
            for k in 0..n {
                let copy_of = |c: usize| (k as i64 + off[&c]).rem_euclid(n as i64) as usize;
                let cells = blk.cells.map(|c| id(copy_of(c), c));
                let edges_k = blk.edges.map(|eid| {
                    let e = self.edges[eid];
                    lifted_edge[copy_of(e.a)][eid]
                });
                blocks.push(Block {
                    cells,
                    edges: edges_k,
                });
            }
        }
        let mut tree = Vec::with_capacity(n * base - 1);
        for k in 0..n {
            for &e in &self.tree {
                tree.push(lifted_edge[k][e]);
            }
            if k + 1 < n {
                tree.push(lifted_edge[k][self.crossings[0]]);
            }
        }
        let mut s = Surface {
            labels,
            colors,
            edges,
            adjacency: Vec::new(),
            blocks,
            crossings,
            tree,
            copies: n,
        };
        s.build_adjacency();
        s
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[CellLabel] {
        &self.labels
    }

    pub fn color(&self, c: usize) -> u8 {
        self.colors[c]
    }

    pub fn colors(&self) -> &[u8] {
        &self.colors
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// `(neighbor, edge)` pairs sorted by neighbor index.
    pub fn neighbors(&self, c: usize) -> &[(usize, usize)] {
        &self.adjacency[c]
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Crossing edges in cut order.
    pub fn crossings(&self) -> &[usize] {
        &self.crossings
    }

    pub fn tree(&self) -> &[usize] {
        &self.tree
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn is_balanced(&self) -> bool {
        let black = self.colors.iter().filter(|&&c| c == BLACK).count();
        2 * black == self.colors.len()
    }

    /// Black endpoint of an edge.
    pub fn black_of(&self, e: usize) -> usize {
        let e = &self.edges[e];
        if self.colors[e.a] == BLACK {
            e.a
        } else {
            e.b
        }
    }

    pub fn white_of(&self, e: usize) -> usize {
        let e = &self.edges[e];
        if self.colors[e.a] == BLACK {
            e.b
        } else {
            e.a
        }
    }

    /// Edge joining two cells, if any.
    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.adjacency[u]
            .binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| self.adjacency[u][i].1)
    }

    /// Whether removing the crossing edges leaves a connected graph with
    /// Euler characteristic 1 (vertices - edges + uncut blocks), i.e. a
    /// disk-like strip.
    pub fn cut_open_is_disk_like(&self) -> bool {
        let n = self.labels.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, e) in &self.adjacency[u] {
                if self.edges[e].crossing.is_none() && !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        let inner_edges = self.edges.iter().filter(|e| e.crossing.is_none()).count() as i64;
        let uncut_blocks = self
            .blocks
            .iter()
            .filter(|b| b.edges.iter().all(|&e| self.edges[e].crossing.is_none()))
            .count() as i64;
        count == n && n as i64 - inner_edges + uncut_blocks == 1
    }
}

/// The annulus cut open along its cut, with left and right attachments.
///
/// A domino across crossing `i` covers the crossing's left cell in copy `k`
/// and its right cell in copy `k + 1`; so the cells at the left attachment
/// of the segment are the right cells of the crossings and vice versa.
#[derive(Debug, Clone)]
pub struct TrackSegment {
    pub annulus: Annulus,
    pub cut: Cut,
    pub surface: Surface,
}

impl TrackSegment {
    pub fn new(annulus: Annulus) -> TrackSegment {
        let cut = annulus.compute_cut();
        let surface = Surface::planar(&annulus.region, Some(&cut));
        TrackSegment {
            annulus,
            cut,
            surface,
        }
    }

    pub fn from_region(region: GridRegion) -> Result<TrackSegment, RegionError> {
        Ok(TrackSegment::new(Annulus::new(region)?))
    }

    /// Cells at the left attachment, one per crossing, in cut order.
    pub fn left_sides(&self) -> Vec<usize> {
        self.surface
            .crossings()
            .iter()
            .map(|&e| self.surface.edge(e).b)
            .collect()
    }

    /// Cells at the right attachment, one per crossing, in cut order.
    pub fn right_sides(&self) -> Vec<usize> {
        self.surface
            .crossings()
            .iter()
            .map(|&e| self.surface.edge(e).a)
            .collect()
    }

    pub fn cover(&self, n: usize) -> Surface {
        self.surface.cover(n)
    }
}

/// `build_cover`: the `n`-fold cover of an annulus, cut by its
/// deterministic cut.
pub fn build_cover(annulus: &Annulus, n: usize) -> Surface {
    TrackSegment::new(annulus.clone()).cover(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(w: i32, h: i32, hx: i32, hy: i32, hw: i32, hh: i32) -> TrackSegment {
        TrackSegment::from_region(GridRegion::frame(w, h, hx, hy, hw, hh).unwrap()).unwrap()
    }

    #[test]
    fn planar_disk_structure() {
        let s = Surface::planar(&GridRegion::rectangle(2, 3), None);
        assert_eq!(s.len(), 6);
        assert_eq!(s.edges().len(), 7);
        assert_eq!(s.blocks().len(), 2);
        assert_eq!(s.tree().len(), 5);
        assert!(s.crossings().is_empty());
        let b = s.blocks()[0];
        assert_eq!(b.cells, [0, 1, 2, 3]);
        assert_eq!(s.edge(b.edges[TOP]).orientation, Orientation::Horizontal);
        assert_eq!(s.edge(b.edges[LEFT]).orientation, Orientation::Vertical);
    }

    #[test]
    fn crossing_edges_are_oriented_left_to_right() {
        let ts = frame(6, 6, 2, 2, 2, 2);
        let s = &ts.surface;
        for (i, &e) in s.crossings().iter().enumerate() {
            let edge = s.edge(e);
            assert_eq!(edge.crossing, Some(i));
            assert_eq!(s.labels()[edge.a].cell, ts.cut.crossings[i].left);
            assert_eq!(s.labels()[edge.b].cell, ts.cut.crossings[i].right);
        }
        assert_eq!(ts.left_sides().len(), 2);
        assert!(s.tree().iter().all(|&e| s.edge(e).crossing.is_none()));
    }

    #[test]
    fn cut_open_segments_are_disk_like() {
        for ts in [
            frame(4, 4, 1, 1, 2, 2),
            frame(6, 6, 2, 2, 2, 2),
            frame(8, 8, 2, 2, 4, 4),
            frame(7, 5, 2, 1, 3, 3),
        ] {
            assert!(ts.surface.cut_open_is_disk_like());
            assert!(!Surface::planar(&ts.annulus.region, None).cut_open_is_disk_like());
        }
    }

    #[test]
    fn cover_counts_and_tree() {
        let ts = frame(6, 6, 2, 2, 2, 2);
        for n in 1..=3 {
            let c = ts.cover(n);
            assert_eq!(c.len(), n * ts.surface.len());
            assert_eq!(c.edges().len(), n * ts.surface.edges().len());
            assert_eq!(c.blocks().len(), n * ts.surface.blocks().len());
            assert_eq!(c.tree().len(), c.len() - 1);
            assert_eq!(c.crossings().len(), ts.surface.crossings().len());
            assert!(c.cut_open_is_disk_like(), "n = {n}");
            for b in c.blocks() {
                let [tl, tr, bl, br] = b.cells;
                let e = |k: usize| c.edge(b.edges[k]);
                let same = |e: &Edge, u: usize, v: usize| (e.a, e.b) == (u, v) || (e.a, e.b) == (v, u);
                assert!(same(e(TOP), tl, tr));
                assert!(same(e(BOTTOM), bl, br));
                assert!(same(e(LEFT), tl, bl));
                assert!(same(e(RIGHT), tr, br));
            }
        }
    }

    #[test]
    fn one_fold_cover_matches_planar_surface() {
        let ts = frame(6, 6, 2, 2, 2, 2);
        let c = ts.cover(1);
        let s = &ts.surface;
        assert_eq!(c.len(), s.len());
        for (x, y) in c.edges().iter().zip(s.edges()) {
            assert_eq!((x.a, x.b, x.crossing), (y.a, y.b, y.crossing));
        }
        assert_eq!(c.blocks(), s.blocks());
        assert_eq!(c.tree().len(), s.tree().len());
    }
}
