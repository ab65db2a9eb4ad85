//! Quadriculated regions: parsing, classification, checkerboard coloring and
//! cuts of annuli.
//!
//! Coordinates are `(x, y)` with `y` growing downward, matching the text
//! input. Cell `(x, y)` is white (color 0) when `x + y` is even. Lattice
//! vertex `(x, y)` is the top-left corner of cell `(x, y)`.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub type Cell = (i32, i32);
pub type Vertex = (i32, i32);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("region has no cells")]
    EmptyRegion,
    #[error("region is not edge-connected ({components} components)")]
    DisconnectedRegion { components: usize },
    #[error("line {line}, column {column}: unexpected character {ch:?}")]
    BadCharacter { line: usize, column: usize, ch: char },
    #[error("region is not an annulus: {0}")]
    NotAnAnnulus(String),
    #[error("region is not a disk: {0}")]
    NotADisk(String),
}

pub const WHITE: u8 = 0;
pub const BLACK: u8 = 1;

pub fn color(c: Cell) -> u8 {
    ((c.0 + c.1).rem_euclid(2)) as u8
}

/// Up, right, down, left.
pub const DIRECTIONS: [(i32, i32); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];

/// A finite, nonempty, edge-connected set of unit cells.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GridRegion {
    /// Row-major: sorted by `(y, x)`.
    cells: Vec<Cell>,
}

impl GridRegion {
    pub fn from_cells<I: IntoIterator<Item = Cell>>(cells: I) -> Result<Self, RegionError> {
        let set: BTreeSet<(i32, i32)> = cells.into_iter().map(|(x, y)| (y, x)).collect();
        let cells: Vec<Cell> = set.into_iter().map(|(y, x)| (x, y)).collect();
        if cells.is_empty() {
            return Err(RegionError::EmptyRegion);
        }
        let region = GridRegion { cells };
        let components = region.components();
        if components != 1 {
            return Err(RegionError::DisconnectedRegion { components });
        }
        Ok(region)
    }

    /// Parses `#` (cell) / `.` (empty) rows; lines starting with `%` are
    /// comments and do not count as rows.
    pub fn parse(text: &str) -> Result<Self, RegionError> {
        let mut cells = Vec::new();
        let mut y = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.starts_with('%') {
                continue;
            }
            for (x, ch) in line.chars().enumerate() {
                match ch {
                    '#' => cells.push((x as i32, y)),
                    '.' => {}
                    _ => {
                        return Err(RegionError::BadCharacter {
                            line: lineno + 1,
                            column: x + 1,
                            ch,
                        })
                    }
                }
            }
            y += 1;
        }
        GridRegion::from_cells(cells)
    }

    pub fn rectangle(width: i32, height: i32) -> Self {
        GridRegion::from_cells((0..height).flat_map(|y| (0..width).map(move |x| (x, y))))
            .expect("nonempty rectangle")
    }

    /// A `w x h` rectangle with the `hw x hh` rectangle at `(hx, hy)` removed.
    pub fn frame(w: i32, h: i32, hx: i32, hy: i32, hw: i32, hh: i32) -> Result<Self, RegionError> {
        GridRegion::from_cells(
            (0..h)
                .flat_map(|y| (0..w).map(move |x| (x, y)))
                .filter(|&(x, y)| !(x >= hx && x < hx + hw && y >= hy && y < hy + hh)),
        )
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.cells
            .binary_search_by(|&(x, y)| (y, x).cmp(&(c.1, c.0)))
            .is_ok()
    }

    pub fn index_of(&self, c: Cell) -> Option<usize> {
        self.cells
            .binary_search_by(|&(x, y)| (y, x).cmp(&(c.1, c.0)))
            .ok()
    }

    pub fn color_counts(&self) -> (usize, usize) {
        let black = self.cells.iter().filter(|&&c| color(c) == BLACK).count();
        (self.cells.len() - black, black)
    }

    pub fn is_balanced(&self) -> bool {
        let (w, b) = self.color_counts();
        w == b
    }

    /// `(min_x, min_y, max_x, max_y)`.
    pub fn bounds(&self) -> (i32, i32, i32, i32) {
        let xs = self.cells.iter().map(|c| c.0);
        let ys = self.cells.iter().map(|c| c.1);
        (
            xs.clone().min().unwrap(),
            ys.clone().min().unwrap(),
            xs.max().unwrap(),
            ys.max().unwrap(),
        )
    }

    fn components(&self) -> usize {
        let set: HashSet<Cell> = self.cells.iter().copied().collect();
        flood_components(&set, |c| set.contains(&c)).len()
    }

    /// Complement components inside the bounding box grown by one; the
    /// first returned component is the unbounded one.
    fn complement_components(&self) -> Vec<Vec<Cell>> {
        let (x0, y0, x1, y1) = self.bounds();
        let set: HashSet<Cell> = self.cells.iter().copied().collect();
        let mut outside: HashSet<Cell> = HashSet::new();
        for y in (y0 - 1)..=(y1 + 1) {
            for x in (x0 - 1)..=(x1 + 1) {
                if !set.contains(&(x, y)) {
                    outside.insert((x, y));
                }
            }
        }
        let mut comps = flood_components(&outside, |c| outside.contains(&c));
        let corner = (x0 - 1, y0 - 1);
        let pos = comps.iter().position(|c| c.contains(&corner)).unwrap();
        let unbounded = comps.remove(pos);
        comps.insert(0, unbounded);
        comps
    }

    /// Lattice vertices where two diagonal cells are in the region and the
    /// other two are not.
    pub fn pinch_points(&self) -> Vec<Vertex> {
        let (x0, y0, x1, y1) = self.bounds();
        let mut out = Vec::new();
        for y in y0..=(y1 + 1) {
            for x in x0..=(x1 + 1) {
                let [a, b, c, d] = vertex_cells((x, y)).map(|cell| self.contains(cell));
                if (a && d && !b && !c) || (b && c && !a && !d) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn classify(&self) -> Classification {
        if !self.pinch_points().is_empty() {
            return Classification::Other {
                reason: "region is pinched at a lattice vertex".into(),
            };
        }
        let mut comps = self.complement_components();
        match comps.len() {
            1 => Classification::Disk,
            2 => {
                let mut hole = comps.pop().unwrap();
                hole.sort_by_key(|&(x, y)| (y, x));
                Classification::Annulus { hole }
            }
            n => Classification::Other {
                reason: format!("{} holes", n - 1),
            },
        }
    }

    /// Applies one of the 8 lattice symmetries (`0..4` rotations, `4..8`
    /// reflected rotations) followed by a translation.
    pub fn transformed(&self, symmetry: u8, dx: i32, dy: i32) -> GridRegion {
        GridRegion::from_cells(self.cells.iter().map(|&c| {
            let (x, y) = apply_symmetry(symmetry, c);
            (x + dx, y + dy)
        }))
        .expect("symmetries preserve connectivity")
    }

    pub fn render(&self) -> String {
        let (x0, y0, x1, y1) = self.bounds();
        let mut out = String::new();
        for y in y0..=y1 {
            for x in x0..=x1 {
                out.push(if self.contains((x, y)) { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for GridRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GridRegion(\n{})", self.render())
    }
}

/// Cell that maps to `c` under symmetry `s`, where rotation is by 90°.
fn apply_symmetry(s: u8, (x, y): Cell) -> Cell {
    let (x, y) = if s >= 4 { (-x, y) } else { (x, y) };
    match s % 4 {
        0 => (x, y),
        1 => (-y, x),
        2 => (-x, -y),
        _ => (y, -x),
    }
}

/// Cells around lattice vertex `v`: top-left, top-right, bottom-left, bottom-right.
pub fn vertex_cells((x, y): Vertex) -> [Cell; 4] {
    [(x - 1, y - 1), (x, y - 1), (x - 1, y), (x, y)]
}

fn flood_components(set: &HashSet<Cell>, inside: impl Fn(Cell) -> bool) -> Vec<Vec<Cell>> {
    let mut seen: HashSet<Cell> = HashSet::new();
    let mut order: Vec<Cell> = set.iter().copied().collect();
    order.sort_by_key(|&(x, y)| (y, x));
    let mut comps = Vec::new();
    for start in order {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some((x, y)) = queue.pop_front() {
            for (dx, dy) in DIRECTIONS {
                let n = (x + dx, y + dy);
                if inside(n) && seen.insert(n) {
                    comp.push(n);
                    queue.push_back(n);
                }
            }
        }
        comps.push(comp);
    }
    comps
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Classification {
    Disk,
    Annulus { hole: Vec<Cell> },
    Other { reason: String },
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Disk => "disk",
            Classification::Annulus { .. } => "annulus",
            Classification::Other { .. } => "other",
        }
    }
}

/// A region whose complement has exactly one bounded component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annulus {
    pub region: GridRegion,
    pub hole: Vec<Cell>,
    pub balanced: bool,
}

impl Annulus {
    pub fn new(region: GridRegion) -> Result<Self, RegionError> {
        match region.classify() {
            Classification::Annulus { hole } => {
                let balanced = region.is_balanced();
                Ok(Annulus {
                    region,
                    hole,
                    balanced,
                })
            }
            Classification::Disk => Err(RegionError::NotAnAnnulus("region is a disk".into())),
            Classification::Other { reason } => Err(RegionError::NotAnAnnulus(reason)),
        }
    }

    fn is_hole(&self, c: Cell) -> bool {
        self.hole
            .binary_search_by(|&(x, y)| (y, x).cmp(&(c.1, c.0)))
            .is_ok()
    }

    pub fn on_inner_boundary(&self, v: Vertex) -> bool {
        let cells = vertex_cells(v);
        cells.iter().any(|&c| self.is_hole(c)) && cells.iter().any(|&c| self.region.contains(c))
    }

    pub fn on_outer_boundary(&self, v: Vertex) -> bool {
        let cells = vertex_cells(v);
        cells
            .iter()
            .any(|&c| !self.region.contains(c) && !self.is_hole(c))
            && cells.iter().any(|&c| self.region.contains(c))
    }

    /// Both cells beside the lattice edge `v -> v + d`, as `(left, right)`
    /// with respect to the direction of travel.
    pub fn edge_sides(v: Vertex, d: (i32, i32)) -> (Cell, Cell) {
        let (x, y) = v;
        match d {
            (1, 0) => ((x, y - 1), (x, y)),
            (-1, 0) => ((x - 1, y), (x - 1, y - 1)),
            (0, 1) => ((x, y), (x - 1, y)),
            (0, -1) => ((x - 1, y - 1), (x, y - 1)),
            _ => panic!("not a unit lattice step: {d:?}"),
        }
    }

    fn step_ok(&self, v: Vertex, d: (i32, i32)) -> bool {
        let (l, r) = Annulus::edge_sides(v, d);
        self.region.contains(l) && self.region.contains(r)
    }

    fn inner_vertices(&self) -> Vec<Vertex> {
        let mut vs: BTreeSet<Vertex> = BTreeSet::new();
        for &(x, y) in &self.hole {
            for v in [(x, y), (x + 1, y), (x, y + 1), (x + 1, y + 1)] {
                if self.on_inner_boundary(v) {
                    vs.insert(v);
                }
            }
        }
        vs.into_iter().collect()
    }

    /// The deterministic cut: shortest straight lattice path from the inner
    /// to the outer boundary, ties broken by the start vertex `(x, y)` and
    /// then by direction (up, right, down, left). Falls back to a BFS
    /// shortest path when no straight cut exists.
    pub fn compute_cut(&self) -> Cut {
        let mut best: Option<(usize, Vertex, (i32, i32))> = None;
        for v in self.inner_vertices() {
            for d in DIRECTIONS {
                let mut cur = v;
                let mut len = 0;
                while self.step_ok(cur, d) {
                    cur = (cur.0 + d.0, cur.1 + d.1);
                    len += 1;
                    if self.on_inner_boundary(cur) {
                        break;
                    }
                    if self.on_outer_boundary(cur) {
                        if best.is_none_or(|(l, _, _)| len < l) {
                            best = Some((len, v, d));
                        }
                        break;
                    }
                }
            }
        }
        match best {
            Some((len, v, d)) => {
                let path: Vec<Vertex> = (0..=len as i32)
                    .map(|k| (v.0 + k * d.0, v.1 + k * d.1))
                    .collect();
                Cut::from_path(path, true)
            }
            None => self.bfs_cut(),
        }
    }

    fn bfs_cut(&self) -> Cut {
        let starts = self.inner_vertices();
        let mut prev: HashMap<Vertex, Vertex> = HashMap::new();
        let mut queue: VecDeque<Vertex> = starts.iter().copied().collect();
        let mut seen: HashSet<Vertex> = starts.iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            for d in DIRECTIONS {
                if !self.step_ok(v, d) {
                    continue;
                }
                let n = (v.0 + d.0, v.1 + d.1);
                if !seen.insert(n) {
                    continue;
                }
                prev.insert(n, v);
                if self.on_outer_boundary(n) {
                    let mut path = vec![n];
                    let mut cur = n;
                    while let Some(&p) = prev.get(&cur) {
                        path.push(p);
                        cur = p;
                    }
                    path.reverse();
                    return Cut::from_path(path, false);
                }
                queue.push_back(n);
            }
        }
        panic!("an annulus always has a lattice path from the hole to the outside")
    }
}

/// A domino position separated by the cut, oriented with the cut directed
/// from the inner to the outer boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Crossing {
    pub left: Cell,
    pub right: Cell,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cut {
    pub path: Vec<Vertex>,
    pub crossings: Vec<Crossing>,
    pub straight: bool,
}

impl Cut {
    fn from_path(path: Vec<Vertex>, straight: bool) -> Cut {
        let crossings = path
            .windows(2)
            .map(|w| {
                let d = (w[1].0 - w[0].0, w[1].1 - w[0].1);
                let (left, right) = Annulus::edge_sides(w[0], d);
                Crossing { left, right }
            })
            .collect();
        Cut {
            path,
            crossings,
            straight,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring4() -> GridRegion {
        GridRegion::frame(4, 4, 1, 1, 2, 2).unwrap()
    }

    #[test]
    fn parse_examples() {
        let r = GridRegion::parse("##\n##").unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!(
            GridRegion::parse("#.#"),
            Err(RegionError::DisconnectedRegion { components: 2 })
        );
        let ring = GridRegion::parse("####\n#..#\n#..#\n####\n").unwrap();
        assert_eq!(ring.len(), 12);
        assert_eq!(ring, ring4());
        assert_eq!(GridRegion::parse("...\n"), Err(RegionError::EmptyRegion));
        assert_eq!(
            GridRegion::parse("##\n#x"),
            Err(RegionError::BadCharacter {
                line: 2,
                column: 2,
                ch: 'x'
            })
        );
        let commented = GridRegion::parse("% a comment\n##\n% another\n##\n").unwrap();
        assert_eq!(commented, GridRegion::rectangle(2, 2));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(GridRegion::rectangle(2, 2).classify(), Classification::Disk);
        assert_eq!(
            ring4().classify(),
            Classification::Annulus {
                hole: vec![(1, 1), (2, 1), (1, 2), (2, 2)]
            }
        );
        let two_holes =
            GridRegion::from_cells(GridRegion::rectangle(5, 5).cells().iter().copied().filter(|&c| c != (1, 1) && c != (3, 3)))
                .unwrap();
        assert!(matches!(two_holes.classify(), Classification::Other { .. }));
    }

    #[test]
    fn pinched_regions_are_other() {
        // a 3x3 ring with one corner replaced by a diagonal contact
        let r = GridRegion::parse("##.\n#.#\n.##").unwrap_err();
        assert!(matches!(r, RegionError::DisconnectedRegion { .. }));
        let pinched = GridRegion::parse("##.\n#.#\n###").unwrap();
        assert!(pinched.pinch_points().contains(&(2, 1)));
        assert!(matches!(pinched.classify(), Classification::Other { .. }));
    }

    #[test]
    fn coloring() {
        assert_eq!(color((0, 0)), WHITE);
        assert_eq!(color((1, 0)), BLACK);
        assert_eq!(color((-1, 0)), BLACK);
        assert!(ring4().is_balanced());
    }

    #[test]
    fn ring_cut_has_one_crossing() {
        let a = Annulus::new(ring4()).unwrap();
        let cut = a.compute_cut();
        assert!(cut.straight);
        assert_eq!(cut.path, vec![(1, 1), (1, 0)]);
        assert_eq!(
            cut.crossings,
            vec![Crossing {
                left: (0, 0),
                right: (1, 0)
            }]
        );
    }

    #[test]
    fn width_two_frame_cut_has_two_crossings() {
        let a = Annulus::new(GridRegion::frame(6, 6, 2, 2, 2, 2).unwrap()).unwrap();
        let cut = a.compute_cut();
        assert_eq!(cut.path, vec![(2, 2), (2, 1), (2, 0)]);
        assert_eq!(cut.crossings.len(), 2);
        for c in &cut.crossings {
            assert_eq!(c.right.0, c.left.0 + 1);
            assert_eq!(c.right.1, c.left.1);
        }
    }

    #[test]
    fn rotated_annulus_keeps_crossing_count() {
        let r = GridRegion::frame(6, 8, 2, 3, 2, 2).unwrap();
        let base = Annulus::new(r.clone()).unwrap().compute_cut().crossings.len();
        for s in 0..8 {
            let t = Annulus::new(r.transformed(s, 3, -1)).unwrap();
            assert_eq!(t.compute_cut().crossings.len(), base, "symmetry {s}");
        }
    }

    #[test]
    fn classification_is_symmetry_invariant() {
        let regions = [
            ring4(),
            GridRegion::parse("###\n#.#\n###\n#..").unwrap(),
            GridRegion::parse("####\n#..#\n##.#\n####").unwrap(),
            GridRegion::rectangle(3, 2),
        ];
        for r in regions {
            for s in 0..8 {
                for (dx, dy) in [(0, 0), (1, 0), (-3, 7)] {
                    let t = r.transformed(s, dx, dy);
                    assert_eq!(t.classify().name(), r.classify().name());
                    assert_eq!(t.is_balanced(), r.is_balanced());
                    assert_eq!(t.len(), r.len());
                }
            }
        }
    }
}
