//! Shapes, prunings and the connection matrix of a track segment.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::json;
use thiserror::Error;

use crate::algebra::{LaurentPoly, SignedMonomial};
use crate::cert::Certification;
use crate::kasteleyn::{permutation_sign, propagate_weights, KasteleynError, WeightedGraph};
use crate::region::{Cell, BLACK};
use crate::surface::TrackSegment;
use crate::tiling::for_each_matching;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransferError {
    #[error(transparent)]
    Weights(#[from] KasteleynError),
    #[error("entry ({left}, {right}) has tilings of both signs")]
    SignMixture { left: usize, right: usize },
    #[error("bi-active block for flux {flux} is empty")]
    EmptyBlock { flux: i64 },
}

/// A set of cut sides, as sorted crossing indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Shape {
    pub sides: Vec<usize>,
    pub flux: i64,
}

impl Shape {
    fn mask(&self) -> u64 {
        self.sides.iter().fold(0, |m, &i| m | 1 << i)
    }
}

/// Cells claimed by a shape at the left attachment (`left = true`) or at
/// the right one.
fn claimed(ts: &TrackSegment, shape: &Shape, left: bool) -> Vec<usize> {
    let slots = if left { ts.left_sides() } else { ts.right_sides() };
    shape.sides.iter().map(|&i| slots[i]).collect()
}

fn distinct(cells: &[usize]) -> bool {
    let set: HashSet<usize> = cells.iter().copied().collect();
    set.len() == cells.len()
}

/// All shapes valid at both attachments, ordered by flux and then by the
/// bit pattern of their sides. The flux of a shape is the total `p`
/// exponent of the Kasteleyn weights of its crossings.
pub fn enumerate_shapes(ts: &TrackSegment, wg: &WeightedGraph) -> Vec<Shape> {
    let crossings = ts.surface.crossings();
    let m = crossings.len();
    assert!(m < 64, "too many cut crossings");
    let mut shapes: Vec<Shape> = (0u64..1 << m)
        .map(|mask| {
            let sides: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
            let flux = sides.iter().map(|&i| wg.weights[crossings[i]].pexp).sum();
            Shape { sides, flux }
        })
        .filter(|s| distinct(&claimed(ts, s, true)) && distinct(&claimed(ts, s, false)))
        .collect();
    shapes.sort_by_key(|s| (s.flux, s.mask()));
    shapes
}

/// Cells of the track segment left after removing the squares claimed by
/// `left` at the left attachment and by `right` at the right one; `None`
/// when some square is claimed twice.
pub fn prune(ts: &TrackSegment, left: &Shape, right: &Shape) -> Option<Vec<Cell>> {
    let removed = removed_cells(ts, left, right)?;
    Some(
        ts.surface
            .labels()
            .iter()
            .zip(&removed)
            .filter(|(_, &r)| !r)
            .map(|(l, _)| l.cell)
            .collect(),
    )
}

fn removed_cells(ts: &TrackSegment, left: &Shape, right: &Shape) -> Option<Vec<bool>> {
    let mut removed = vec![false; ts.surface.len()];
    for c in claimed(ts, left, true).into_iter().chain(claimed(ts, right, false)) {
        if removed[c] {
            return None;
        }
        removed[c] = true;
    }
    Some(removed)
}

/// q-count of the tilings of a pruning by the weights of the segment's
/// own edges at `p = 1`, times the `q` part of the crossing weights of the
/// right shape. Terms are checked to share one sign and the count is
/// returned with positive coefficients.
fn entry(ts: &TrackSegment, wg: &WeightedGraph, left: &Shape, right: &Shape) -> Result<Option<LaurentPoly>, ()> {
    let s = &ts.surface;
    let Some(removed) = removed_cells(ts, left, right) else {
        return Ok(None);
    };
    let mut row_of = vec![usize::MAX; s.len()];
    let mut col_of = vec![usize::MAX; s.len()];
    let (mut nr, mut nc) = (0, 0);
    for c in (0..s.len()).filter(|&c| !removed[c]) {
        if s.color(c) == BLACK {
            row_of[c] = nr;
            nr += 1;
        } else {
            col_of[c] = nc;
            nc += 1;
        }
    }
    if nr != nc {
        return Ok(None);
    }
    let is_crossing = |e: usize| s.edge(e).crossing.is_some();
    let mut sum = LaurentPoly::zero();
    let mut sign = 0i8;
    let mut mixed = false;
    let mut perm = vec![0; nr];
    for_each_matching(s, &removed, &|e| !is_crossing(e), &mut |edges| {
        let mut m = SignedMonomial::ONE;
        for &e in edges {
            perm[row_of[s.black_of(e)]] = col_of[s.white_of(e)];
            m = m * wg.weights[e];
        }
        let sg = m.sign() * permutation_sign(&perm);
        if sign == 0 {
            sign = sg;
        }
        mixed |= sg != sign;
        sum.add_term((0, m.qexp), &BigInt::one());
    });
    if mixed {
        return Err(());
    }
    let shift: i64 = right.sides.iter().map(|&i| wg.weights[s.crossings()[i]].qexp).sum();
    Ok(Some(sum.mul_monomial(SignedMonomial::new(1, 0, shift))))
}

/// Connection matrix: rows are left shapes, columns right shapes, both in
/// shape order; entries with different fluxes are zero.
#[derive(Debug, Clone)]
pub struct ConnectionMatrix {
    pub shapes: Vec<Shape>,
    pub entries: Vec<Vec<LaurentPoly>>,
    /// Pairs whose pruning is undefined.
    pub undefined: Vec<(usize, usize)>,
}

pub fn connection_matrix(ts: &TrackSegment) -> Result<ConnectionMatrix, TransferError> {
    let wg = propagate_weights(&ts.surface)?;
    connection_matrix_with(ts, &wg)
}

pub fn connection_matrix_with(ts: &TrackSegment, wg: &WeightedGraph) -> Result<ConnectionMatrix, TransferError> {
    let shapes = enumerate_shapes(ts, wg);
    let n = shapes.len();
    let mut entries = vec![vec![LaurentPoly::zero(); n]; n];
    let mut undefined = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if shapes[i].flux != shapes[j].flux {
                continue;
            }
            match entry(ts, wg, &shapes[i], &shapes[j]) {
                Ok(Some(v)) => entries[i][j] = v,
                Ok(None) => {
                    if removed_cells(ts, &shapes[i], &shapes[j]).is_none() {
                        undefined.push((i, j));
                    }
                }
                Err(()) => return Err(TransferError::SignMixture { left: i, right: j }),
            }
        }
    }
    Ok(ConnectionMatrix {
        shapes,
        entries,
        undefined,
    })
}

pub type PolyMatrix = Vec<Vec<LaurentPoly>>;

pub fn mat_mul(a: &PolyMatrix, b: &PolyMatrix) -> PolyMatrix {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let mut c = vec![vec![LaurentPoly::zero(); m]; n];
    for i in 0..n {
        for (k, bk) in b.iter().enumerate() {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..m {
                if !bk[j].is_zero() {
                    c[i][j] += &(&a[i][k] * &bk[j]);
                }
            }
        }
    }
    c
}

pub fn mat_pow(a: &PolyMatrix, n: usize) -> PolyMatrix {
    assert!(n >= 1);
    let mut result = a.clone();
    for _ in 1..n {
        result = mat_mul(&result, a);
    }
    result
}

impl ConnectionMatrix {
    /// Flux values with the indices of their shapes.
    pub fn fluxes(&self) -> BTreeMap<i64, Vec<usize>> {
        let mut m: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, s) in self.shapes.iter().enumerate() {
            m.entry(s.flux).or_default().push(i);
        }
        m
    }

    pub fn submatrix(&self, idx: &[usize]) -> PolyMatrix {
        idx.iter().map(|&i| idx.iter().map(|&j| self.entries[i][j].clone()).collect()).collect()
    }

    pub fn block(&self, flux: i64) -> PolyMatrix {
        self.submatrix(self.fluxes().get(&flux).map_or(&[][..], Vec::as_slice))
    }

    pub fn is_block_diagonal(&self) -> bool {
        let n = self.shapes.len();
        (0..n).all(|i| (0..n).all(|j| self.shapes[i].flux == self.shapes[j].flux || self.entries[i][j].is_zero()))
    }

    /// True iff every entry has nonnegative integer coefficients.
    pub fn is_nonnegative(&self) -> bool {
        self.entries.iter().flatten().all(|e| e.terms().all(|(_, c)| c.is_positive()))
    }

    /// `sum_f tr(C_f^n) p^f` together with the powered blocks.
    pub fn power_and_trace(&self, n: usize) -> (LaurentPoly, BTreeMap<i64, PolyMatrix>) {
        let mut total = LaurentPoly::zero();
        let mut blocks = BTreeMap::new();
        for (f, idx) in self.fluxes() {
            let pw = mat_pow(&self.submatrix(&idx), n);
            for (i, row) in pw.iter().enumerate() {
                total.add_scaled(SignedMonomial::new(1, f, 0), &row[i]);
            }
            blocks.insert(f, pw);
        }
        (total, blocks)
    }

    pub fn trace_polynomial(&self, n: usize) -> LaurentPoly {
        self.power_and_trace(n).0
    }

    /// Bi-active shapes per flux: shapes lying on a bi-infinite walk of the
    /// digraph `l -> r` iff `C(l, r) != 0` at `q0`, i.e. reachable from a
    /// cycle and reaching a cycle.
    pub fn bi_active(&self, q0: &BigRational) -> Vec<bool> {
        assert!(q0.is_positive(), "bi-activity is read off at q > 0");
        let n = self.shapes.len();
        let one = BigRational::one();
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).filter(|&j| !self.entries[i][j].eval(&one, q0).is_zero()).collect())
            .collect();
        let radj: Vec<Vec<usize>> = (0..n).map(|j| (0..n).filter(|&i| adj[i].contains(&j)).collect()).collect();
        let reach = |start: usize, g: &Vec<Vec<usize>>| {
            let mut seen = vec![false; n];
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &v in &g[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen
        };
        let forward: Vec<Vec<bool>> = (0..n).map(|i| reach(i, &adj)).collect();
        let on_cycle: Vec<bool> = (0..n).map(|i| forward[i][i]).collect();
        let grow = |g: &Vec<Vec<usize>>| {
            let mut seen = on_cycle.clone();
            let mut stack: Vec<usize> = (0..n).filter(|&i| on_cycle[i]).collect();
            while let Some(u) = stack.pop() {
                for &v in &g[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen
        };
        let from_cycle = grow(&adj);
        let to_cycle = grow(&radj);
        (0..n).map(|i| from_cycle[i] && to_cycle[i]).collect()
    }

    /// Bi-active submatrix of each flux block (possibly empty), with the
    /// shape indices it keeps.
    pub fn bi_active_blocks(&self, q0: &BigRational) -> BTreeMap<i64, (Vec<usize>, PolyMatrix)> {
        let active = self.bi_active(q0);
        self.fluxes()
            .into_iter()
            .map(|(f, idx)| {
                let keep: Vec<usize> = idx.into_iter().filter(|&i| active[i]).collect();
                let sub = self.submatrix(&keep);
                (f, (keep, sub))
            })
            .collect()
    }
}

/// Nonzero pattern of a matrix evaluated at `p = 1, q = q0`.
pub fn pattern(m: &PolyMatrix, q0: &BigRational) -> Vec<Vec<bool>> {
    let one = BigRational::one();
    m.iter().map(|row| row.iter().map(|e| !e.eval(&one, q0).is_zero()).collect()).collect()
}

/// PASS iff some power `n <= d^2 + 1` of the nonzero pattern is entrywise
/// positive; the witness records the first such `n`.
pub fn primitivity_check(block: &PolyMatrix, q0: &BigRational, flux: i64) -> Result<Certification, TransferError> {
    let d = block.len();
    if d == 0 {
        return Err(TransferError::EmptyBlock { flux });
    }
    let a = pattern(block, q0);
    let bound = d * d + 1;
    let mut cur = a.clone();
    for n in 1..=bound {
        if cur.iter().flatten().all(|&x| x) {
            return Ok(Certification::pass(
                "primitivity",
                json!({ "flux": flux, "dimension": d, "power": n, "bound": bound }),
            ));
        }
        cur = (0..d)
            .map(|i| (0..d).map(|j| (0..d).any(|k| cur[i][k] && a[k][j])).collect())
            .collect();
    }
    Ok(Certification::fail(
        "primitivity",
        json!({ "flux": flux, "dimension": d, "bound": bound, "pattern": a }),
    ))
}

/// Numeric value of a matrix at `p = 1, q = q0`.
pub fn evaluate(m: &PolyMatrix, q0: &BigRational) -> Vec<Vec<BigRational>> {
    let one = BigRational::one();
    m.iter().map(|row| row.iter().map(|e| e.eval(&one, q0)).collect()).collect()
}

/// Unit monomial `u` with `a = u * b`, for comparing trace polynomials with
/// Kasteleyn determinants.
pub fn unit_ratio(a: &LaurentPoly, b: &LaurentPoly) -> Option<SignedMonomial> {
    a.unit_multiple_of(b)
}

/// Integer entries of a nonnegative matrix at `q = 1`, for display.
pub fn counts_at_one(m: &PolyMatrix) -> Vec<Vec<BigInt>> {
    m.iter()
        .map(|row| row.iter().map(|e| e.terms().map(|(_, c)| c.clone()).sum()).collect())
        .collect()
}
