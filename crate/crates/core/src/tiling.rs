//! Domino tilings: enumeration, signed flips, the flip graph and walls.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::cert::Certification;
use crate::region::{Annulus, Cell, Classification, GridRegion, Vertex, WHITE};
use crate::surface::{CellLabel, Orientation, Surface, BOTTOM, LEFT, RIGHT, TOP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TilingError {
    #[error("region has no domino tilings")]
    UntileableRegion,
    #[error("walls are only defined for annuli")]
    NotAnAnnulus,
}

/// A perfect matching, as the sorted list of its edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tiling {
    pub edges: Vec<usize>,
}

impl Tiling {
    pub fn contains(&self, e: usize) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// `mate[c]` is the cell sharing a domino with `c`.
    pub fn mates(&self, s: &Surface) -> Vec<usize> {
        let mut mate = vec![usize::MAX; s.len()];
        for &e in &self.edges {
            let edge = s.edge(e);
            mate[edge.a] = edge.b;
            mate[edge.b] = edge.a;
        }
        mate
    }

    pub fn is_valid(&self, s: &Surface) -> bool {
        let mut covered = vec![false; s.len()];
        for &e in &self.edges {
            let edge = s.edge(e);
            for c in [edge.a, edge.b] {
                if covered[c] {
                    return false;
                }
                covered[c] = true;
            }
        }
        covered.iter().all(|&c| c) && s.color(s.edge(self.edges[0]).a) != s.color(s.edge(self.edges[0]).b)
    }

    /// Dominoes as pairs of cell labels.
    pub fn dominoes(&self, s: &Surface) -> Vec<(CellLabel, CellLabel)> {
        self.edges
            .iter()
            .map(|&e| {
                let edge = s.edge(e);
                (s.labels()[edge.a], s.labels()[edge.b])
            })
            .collect()
    }

    /// ASCII picture of a planar tiling: `<>` horizontal, `^`/`v` vertical.
    pub fn render(&self, s: &Surface) -> String {
        let labels = s.labels();
        let (x0, y0) = labels.iter().fold((i32::MAX, i32::MAX), |(a, b), l| (a.min(l.cell.0), b.min(l.cell.1)));
        let (x1, y1) = labels.iter().fold((i32::MIN, i32::MIN), |(a, b), l| (a.max(l.cell.0), b.max(l.cell.1)));
        let w = (x1 - x0 + 1) as usize;
        let h = (y1 - y0 + 1) as usize;
        let mut grid = vec![vec!['.'; w]; h];
        for &e in &self.edges {
            let edge = s.edge(e);
            let (a, b) = (labels[edge.a].cell, labels[edge.b].cell);
            let (first, second) = if (a.1, a.0) < (b.1, b.0) { (a, b) } else { (b, a) };
            let put = |grid: &mut Vec<Vec<char>>, c: Cell, ch| grid[(c.1 - y0) as usize][(c.0 - x0) as usize] = ch;
            match edge.orientation {
                Orientation::Horizontal => {
                    put(&mut grid, first, '<');
                    put(&mut grid, second, '>');
                }
                Orientation::Vertical => {
                    put(&mut grid, first, '^');
                    put(&mut grid, second, 'v');
                }
            }
        }
        grid.into_iter().map(|row| row.into_iter().collect::<String>() + "\n").collect()
    }
}

fn search(
    s: &Surface,
    covered: &mut [bool],
    chosen: &mut Vec<usize>,
    start: usize,
    edge_ok: &dyn Fn(usize) -> bool,
    visit: &mut dyn FnMut(&[usize]),
) {
    let Some(c) = (start..covered.len()).find(|&c| !covered[c]) else {
        visit(chosen);
        return;
    };
    covered[c] = true;
    for &(n, e) in s.neighbors(c) {
        if covered[n] || !edge_ok(e) {
            continue;
        }
        covered[n] = true;
        chosen.push(e);
        search(s, covered, chosen, c + 1, edge_ok, visit);
        chosen.pop();
        covered[n] = false;
    }
    covered[c] = false;
}

fn for_each_tiling(s: &Surface, visit: &mut dyn FnMut(&[usize])) {
    if !s.is_balanced() {
        return;
    }
    let mut covered = vec![false; s.len()];
    let mut chosen = Vec::with_capacity(s.len() / 2);
    search(s, &mut covered, &mut chosen, 0, &|_| true, visit);
}

/// Perfect matchings of the cells not in `removed`, using only edges
/// accepted by `edge_ok`, in the same order as [`enumerate_tilings`].
pub fn for_each_matching(s: &Surface, removed: &[bool], edge_ok: &dyn Fn(usize) -> bool, visit: &mut dyn FnMut(&[usize])) {
    let mut covered = removed.to_vec();
    let mut chosen = Vec::with_capacity(s.len() / 2);
    search(s, &mut covered, &mut chosen, 0, edge_ok, visit);
}

/// All tilings, by always matching the first uncovered cell (in surface
/// order, row-major for planar regions) with its neighbors in index order.
pub fn enumerate_tilings(s: &Surface) -> Vec<Tiling> {
    let mut out = Vec::new();
    for_each_tiling(s, &mut |edges| {
        let mut edges = edges.to_vec();
        edges.sort_unstable();
        out.push(Tiling { edges });
    });
    out
}

pub fn count_tilings(s: &Surface) -> u64 {
    let mut n = 0;
    for_each_tiling(s, &mut |_| n += 1);
    n
}

/// A flip on a 2x2 block, from the orientation of the two dominoes it
/// removes. A positive flip increases the volume by one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FlipMove {
    pub block: usize,
    pub cell: CellLabel,
    pub from: Orientation,
    pub sign: i8,
}

impl FlipMove {
    pub fn to(&self) -> Orientation {
        match self.from {
            Orientation::Horizontal => Orientation::Vertical,
            Orientation::Vertical => Orientation::Horizontal,
        }
    }
}

/// Sign of the flip that removes two dominoes of orientation `from` in a
/// block with top-left cell color `tl`.
///
/// With white boundaries oriented counterclockwise and black ones
/// clockwise, the two untrespassed center-to-boundary sides of a vertical
/// pair point outwards when the top-left cell is white.
pub fn flip_sign(tl: u8, from: Orientation) -> i8 {
    match (tl == WHITE, from) {
        (true, Orientation::Vertical) | (false, Orientation::Horizontal) => 1,
        _ => -1,
    }
}

/// The two edge slots of a block used by dominoes of orientation `o`.
pub fn block_slots(o: Orientation) -> [usize; 2] {
    match o {
        Orientation::Horizontal => [TOP, BOTTOM],
        Orientation::Vertical => [LEFT, RIGHT],
    }
}

pub fn flips_of(s: &Surface, t: &Tiling) -> Vec<FlipMove> {
    let mut out = Vec::new();
    for (i, b) in s.blocks().iter().enumerate() {
        for from in [Orientation::Horizontal, Orientation::Vertical] {
            let [x, y] = block_slots(from);
            if t.contains(b.edges[x]) && t.contains(b.edges[y]) {
                out.push(FlipMove {
                    block: i,
                    cell: s.labels()[b.cells[0]],
                    from,
                    sign: flip_sign(s.color(b.cells[0]), from),
                });
            }
        }
    }
    out
}

pub fn apply_flip(s: &Surface, t: &Tiling, f: &FlipMove) -> Tiling {
    let b = s.blocks()[f.block];
    let remove = block_slots(f.from).map(|k| b.edges[k]);
    let add = block_slots(f.to()).map(|k| b.edges[k]);
    let mut edges: Vec<usize> = t.edges.iter().copied().filter(|e| !remove.contains(e)).collect();
    edges.extend(add);
    edges.sort_unstable();
    Tiling { edges }
}

#[derive(Debug, Clone)]
pub struct FlipEdge {
    pub from: usize,
    pub to: usize,
    pub flip: FlipMove,
}

/// Tilings as vertices (with their flux) and one edge per flip, stored
/// from the tiling with the smaller index.
#[derive(Debug, Clone)]
pub struct FlipGraph {
    pub tilings: Vec<Tiling>,
    pub flux: Vec<i64>,
    pub edges: Vec<FlipEdge>,
}

pub fn flip_graph(s: &Surface, tilings: Vec<Tiling>, flux: Vec<i64>) -> FlipGraph {
    assert_eq!(tilings.len(), flux.len());
    let index: HashMap<&Tiling, usize> = tilings.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut edges = Vec::new();
    for (i, t) in tilings.iter().enumerate() {
        for f in flips_of(s, t) {
            let u = apply_flip(s, t, &f);
            let j = *index.get(&u).expect("flips preserve tilings");
            if i < j {
                edges.push(FlipEdge { from: i, to: j, flip: f });
            }
        }
    }
    FlipGraph { tilings, flux, edges }
}

impl FlipGraph {
    fn adjacency(&self) -> Vec<Vec<(usize, i64)>> {
        let mut adj = vec![Vec::new(); self.tilings.len()];
        for e in &self.edges {
            let sign = i64::from(e.flip.sign);
            adj[e.from].push((e.to, sign));
            adj[e.to].push((e.from, -sign));
        }
        adj
    }

    /// Connected components as sorted lists of tiling indices, ordered by
    /// their smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut comp = vec![usize::MAX; self.tilings.len()];
        let mut out = Vec::new();
        for s in 0..self.tilings.len() {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            comp[s] = id;
            let mut members = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &adj[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = id;
                        members.push(v);
                        queue.push_back(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Flux value -> number of tilings with it.
    pub fn flux_classes(&self) -> BTreeMap<i64, usize> {
        let mut m = BTreeMap::new();
        for &f in &self.flux {
            *m.entry(f).or_insert(0) += 1;
        }
        m
    }

    /// Signed flip potential: BFS heights with `h(to) = h(from) + sign`;
    /// `None` when some edge contradicts them.
    pub fn potential(&self) -> Option<Vec<i64>> {
        let adj = self.adjacency();
        let mut h: Vec<Option<i64>> = vec![None; self.tilings.len()];
        for s in 0..self.tilings.len() {
            if h[s].is_some() {
                continue;
            }
            h[s] = Some(0);
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &(v, d) in &adj[u] {
                    let want = h[u].unwrap() + d;
                    match h[v] {
                        None => {
                            h[v] = Some(want);
                            queue.push_back(v);
                        }
                        Some(x) if x != want => return None,
                        _ => {}
                    }
                }
            }
        }
        Some(h.into_iter().map(Option::unwrap).collect())
    }

    /// Graphviz text, one cluster per flux class; edges point along
    /// positive flips.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph flips {\n  node [shape=circle];\n");
        for (f, _) in self.flux_classes() {
            let _ = writeln!(out, "  subgraph cluster_flux_{} {{", f.to_string().replace('-', "m"));
            let _ = writeln!(out, "    label=\"flux {f}\";");
            for (i, _) in self.flux.iter().enumerate().filter(|(_, &x)| x == f) {
                let _ = writeln!(out, "    t{i};");
            }
            out.push_str("  }\n");
        }
        for e in &self.edges {
            let (a, b) = if e.flip.sign > 0 { (e.from, e.to) } else { (e.to, e.from) };
            let (x, y) = e.flip.cell.cell;
            let _ = writeln!(out, "  t{a} -> t{b} [label=\"{},{}@{}\"];", x, y, e.flip.cell.copy);
        }
        out.push_str("}\n");
        out
    }
}

/// PASS iff every flux class is a single flip-connected component.
pub fn check_flux_connectivity(g: &FlipGraph) -> Certification {
    let comps = g.components();
    let mut per_flux: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    let mut mixed = Vec::new();
    for c in &comps {
        let f = g.flux[c[0]];
        if c.iter().any(|&i| g.flux[i] != f) {
            mixed.push(c[0]);
        }
        per_flux.entry(f).or_default().push(c.len());
    }
    let classes: Vec<_> = per_flux
        .iter()
        .map(|(f, sizes)| json!({ "flux": f, "components": sizes.len(), "sizes": sizes }))
        .collect();
    let ok = mixed.is_empty() && per_flux.values().all(|v| v.len() == 1);
    let witness = json!({ "tilings": g.tilings.len(), "classes": classes, "fluxMixedComponents": mixed });
    if ok {
        Certification::pass("flux-connectivity", witness)
    } else {
        Certification::fail("flux-connectivity", witness)
    }
}

/// PASS iff the signed flips admit a potential, i.e. every cycle of the
/// flip graph has as many positive as negative flips.
pub fn exactness_check(g: &FlipGraph) -> Certification {
    let witness = json!({ "tilings": g.tilings.len(), "flips": g.edges.len() });
    match g.potential() {
        Some(_) => Certification::pass("flip-exactness", witness),
        None => Certification::fail("flip-exactness", witness),
    }
}

/// Lattice side between two cells, as its two endpoint vertices (sorted).
pub type Side = (Vertex, Vertex);

pub fn side_between(a: Cell, b: Cell) -> Side {
    let (x, y) = (a.0.max(b.0), a.1.max(b.1));
    if a.1 == b.1 {
        ((x, y), (x, y + 1))
    } else {
        ((x, y), (x + 1, y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WallKind {
    /// Never-crossed sides separating tiling-independent annular parts.
    Interior,
    /// Boundary of a winding band in which no flip ever happens.
    Ladder,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Wall {
    pub kind: WallKind,
    pub sides: Vec<Side>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WallReport {
    pub walls: Vec<Wall>,
    /// Interior sides crossed by no tiling.
    pub uncrossed: Vec<Side>,
    #[serde(rename = "wallFree")]
    pub wall_free: bool,
}

fn components_of(cells: &[Cell], linked: impl Fn(Cell, Cell) -> bool) -> Vec<Vec<Cell>> {
    let set: HashSet<Cell> = cells.iter().copied().collect();
    let mut seen: HashSet<Cell> = HashSet::new();
    let mut out = Vec::new();
    for &c in cells {
        if !seen.insert(c) {
            continue;
        }
        let mut comp = vec![c];
        let mut stack = vec![c];
        while let Some(u) = stack.pop() {
            for d in crate::region::DIRECTIONS {
                let v = (u.0 + d.0, u.1 + d.1);
                if set.contains(&v) && linked(u, v) && seen.insert(v) {
                    comp.push(v);
                    stack.push(v);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Inner and outer boundary cycles of an annular component `k` that winds
/// around the hole of `a`, or `None` if it does not.
fn winding_boundaries(a: &Annulus, k: &[Cell]) -> Option<(Vec<Side>, Vec<Side>)> {
    let region = GridRegion::from_cells(k.iter().copied()).ok()?;
    let Classification::Annulus { hole } = region.classify() else {
        return None;
    };
    let hole: HashSet<Cell> = hole.into_iter().collect();
    if !a.hole.iter().all(|c| hole.contains(c)) {
        return None;
    }
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    for &c in region.cells() {
        for d in crate::region::DIRECTIONS {
            let n = (c.0 + d.0, c.1 + d.1);
            if region.contains(n) {
                continue;
            }
            if hole.contains(&n) {
                inner.push(side_between(c, n));
            } else {
                outer.push(side_between(c, n));
            }
        }
    }
    inner.sort_unstable();
    outer.sort_unstable();
    Some((inner, outer))
}

/// Walls of an annulus, from the full list of its tilings.
///
/// Cells are grouped by the sides some tiling crosses; tilings never cross
/// between groups. The annulus has walls iff two or more groups wind
/// around the hole (their boundary cycles through never-crossed interior
/// sides are the interior walls), or a winding group contains a winding
/// band of cells untouched by flips (a ladder, bounded by two walls).
/// Groups that do not wind are forced pieces or a cut-open annulus; they
/// bound no wall.
pub fn detect_walls(a: &Annulus, tilings: &[Tiling]) -> Result<WallReport, TilingError> {
    if tilings.is_empty() {
        return Err(TilingError::UntileableRegion);
    }
    let s = Surface::planar(&a.region, None);
    let cells: Vec<Cell> = s.labels().iter().map(|l| l.cell).collect();
    let mut crossed = vec![false; s.edges().len()];
    let mut flipping = vec![false; s.len()];
    for t in tilings {
        for &e in &t.edges {
            crossed[e] = true;
        }
        for f in flips_of(&s, t) {
            for c in s.blocks()[f.block].cells {
                flipping[c] = true;
            }
        }
    }
    let crossed_pair = |u: Cell, v: Cell| {
        let (i, j) = (a.region.index_of(u).unwrap(), a.region.index_of(v).unwrap());
        s.edge_between(i, j).is_some_and(|e| crossed[e])
    };
    let mut uncrossed: Vec<Side> = s
        .edges()
        .iter()
        .enumerate()
        .filter(|(i, _)| !crossed[*i])
        .map(|(_, e)| side_between(cells[e.a], cells[e.b]))
        .collect();
    uncrossed.sort_unstable();
    let interior: HashSet<Side> = uncrossed.iter().copied().collect();

    let groups = components_of(&cells, crossed_pair);
    let mut walls = Vec::new();
    let mut winding = Vec::new();
    for g in &groups {
        if let Some(b) = winding_boundaries(a, g) {
            winding.push((g, b));
        }
    }
    if winding.len() >= 2 {
        for (_, (inner, outer)) in &winding {
            for cycle in [inner, outer] {
                if cycle.iter().any(|side| interior.contains(side)) {
                    walls.push(Wall {
                        kind: WallKind::Interior,
                        sides: cycle.clone(),
                    });
                }
            }
        }
    }
    for (group, _) in &winding {
        let band: Vec<Cell> = group
            .iter()
            .copied()
            .filter(|&c| !flipping[a.region.index_of(c).unwrap()])
            .collect();
        for comp in components_of(&band, |_, _| true) {
            if let Some((inner, outer)) = winding_boundaries(a, &comp) {
                walls.push(Wall {
                    kind: WallKind::Ladder,
                    sides: inner,
                });
                walls.push(Wall {
                    kind: WallKind::Ladder,
                    sides: outer,
                });
            }
        }
    }
    let wall_free = walls.is_empty();
    Ok(WallReport {
        walls,
        uncrossed,
        wall_free,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::GridRegion;

    fn planar(text: &str) -> Surface {
        Surface::planar(&GridRegion::parse(text).unwrap(), None)
    }

    #[test]
    fn small_counts() {
        assert_eq!(count_tilings(&planar("##\n##")), 2);
        assert_eq!(count_tilings(&planar("###\n###")), 3);
        assert_eq!(count_tilings(&planar("#####\n#####")), 8);
        assert_eq!(count_tilings(&planar("####\n####\n####\n####")), 36);
        assert_eq!(count_tilings(&planar("###\n###\n###")), 0);
    }

    #[test]
    fn enumeration_order_is_deterministic() {
        let s = planar("###\n###");
        let t = enumerate_tilings(&s);
        assert_eq!(t.len(), 3);
        assert_eq!(t[0].render(&s), "<>^\n<>v\n");
        assert_eq!(t, enumerate_tilings(&s));
        assert!(t.iter().all(|x| x.is_valid(&s)));
    }

    #[test]
    fn flips_and_inverses() {
        let s = planar("####\n####");
        let tilings = enumerate_tilings(&s);
        let brick = tilings.iter().find(|t| t.render(&s) == "<><>\n<><>\n").unwrap();
        let flips = flips_of(&s, brick);
        assert_eq!(flips.len(), 2);
        for f in &flips {
            let u = apply_flip(&s, brick, f);
            let back: Vec<_> = flips_of(&s, &u).into_iter().filter(|g| g.block == f.block).collect();
            assert_eq!(back.len(), 1);
            assert_eq!(back[0].sign, -f.sign);
            assert_eq!(&apply_flip(&s, &u, &back[0]), brick);
        }
    }

    #[test]
    fn flip_sign_rule() {
        // top-left white: vertical -> horizontal is positive
        assert_eq!(flip_sign(WHITE, Orientation::Vertical), 1);
        assert_eq!(flip_sign(WHITE, Orientation::Horizontal), -1);
        assert_eq!(flip_sign(crate::region::BLACK, Orientation::Horizontal), 1);
    }

    #[test]
    fn disk_flip_graphs_are_connected_and_exact() {
        for text in ["##\n##", "####\n####", "#####\n#####", "####\n####\n####\n####"] {
            let s = planar(text);
            let tilings = enumerate_tilings(&s);
            let n = tilings.len();
            let g = flip_graph(&s, tilings, vec![0; n]);
            assert!(check_flux_connectivity(&g).passed(), "{text}");
            assert!(exactness_check(&g).passed(), "{text}");
        }
    }

    #[test]
    fn dot_export() {
        let s = planar("##\n##");
        let g = flip_graph(&s, enumerate_tilings(&s), vec![0, 0]);
        let dot = g.to_dot();
        assert!(dot.starts_with("digraph flips {"));
        assert_eq!(dot.matches("->").count(), 1);
    }

    #[test]
    fn sides() {
        assert_eq!(side_between((0, 0), (1, 0)), ((1, 0), (1, 1)));
        assert_eq!(side_between((2, 3), (2, 2)), ((2, 3), (3, 3)));
    }

    fn walls_of(region: GridRegion) -> WallReport {
        let a = Annulus::new(region).unwrap();
        let s = Surface::planar(&a.region, None);
        detect_walls(&a, &enumerate_tilings(&s)).unwrap()
    }

    #[test]
    fn width_one_ring_is_a_ladder() {
        let r = walls_of(GridRegion::frame(4, 4, 1, 1, 2, 2).unwrap());
        assert!(!r.wall_free);
        assert_eq!(r.walls.len(), 2);
        assert!(r.walls.iter().all(|w| w.kind == WallKind::Ladder));
        assert!(r.uncrossed.is_empty());
    }

    #[test]
    fn width_two_frame_is_wall_free() {
        let r = walls_of(GridRegion::frame(6, 6, 2, 2, 2, 2).unwrap());
        assert!(r.wall_free, "{r:?}");
    }

    #[test]
    fn untileable_annulus_errors() {
        let a = Annulus::new(GridRegion::frame(5, 4, 1, 1, 1, 1).unwrap()).unwrap();
        assert!(!a.balanced);
        assert_eq!(detect_walls(&a, &[]), Err(TilingError::UntileableRegion));
    }
}
