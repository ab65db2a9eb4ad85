use std::collections::HashMap;

use num_bigint::BigInt;
use proptest::prelude::*;
use qflux::algebra::LaurentPoly;
use qflux::analysis::Analysis;
use qflux::kasteleyn::{kasteleyn_det, propagate_with_tree, KasteleynMatrix};
use qflux::region::{color, Annulus, Cell, Classification, GridRegion, BLACK, DIRECTIONS};
use qflux::surface::{build_cover, Surface, TrackSegment};
use qflux::tiling::{apply_flip, count_tilings, enumerate_tilings, flips_of};

/// Random subsets of a `w x h` box, kept when edge-connected.
fn region_in(w: i32, h: i32) -> impl Strategy<Value = GridRegion> {
    proptest::collection::vec(any::<bool>(), (w * h) as usize).prop_filter_map("connected", move |bits| {
        let cells = (0..w * h).filter(|&i| bits[i as usize]).map(|i| (i % w, i / w));
        GridRegion::from_cells(cells).ok()
    })
}

fn frames() -> Vec<GridRegion> {
    vec![
        GridRegion::frame(4, 4, 1, 1, 2, 2).unwrap(),
        GridRegion::frame(6, 6, 2, 2, 2, 2).unwrap(),
        GridRegion::frame(6, 5, 1, 1, 2, 1).unwrap(),
        GridRegion::frame(5, 6, 2, 1, 1, 2).unwrap(),
        GridRegion::parse("######\n######\n##.###\n##.###\n##..##\n######\n######\n").unwrap(),
    ]
}

/// Number of perfect matchings by dynamic programming over subsets of
/// white cells, one black cell at a time.
fn permanent_count(r: &GridRegion) -> u64 {
    let black: Vec<Cell> = r.cells().iter().copied().filter(|&c| color(c) == BLACK).collect();
    let white: Vec<Cell> = r.cells().iter().copied().filter(|&c| color(c) != BLACK).collect();
    if black.len() != white.len() {
        return 0;
    }
    let index: HashMap<Cell, usize> = white.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut ways: HashMap<u32, u64> = HashMap::from([(0, 1)]);
    for &(x, y) in &black {
        let mut next = HashMap::new();
        for (&used, &n) in &ways {
            for (dx, dy) in DIRECTIONS {
                if let Some(&j) = index.get(&(x + dx, y + dy)) {
                    if used >> j & 1 == 0 {
                        *next.entry(used | 1 << j).or_insert(0) += n;
                    }
                }
            }
        }
        ways = next;
    }
    ways.values().sum()
}

/// `f(p^(±1) q^c, q^(±1))` with the sign of `p` flipped when `neg`.
fn substitute(f: &LaurentPoly, inv_p: bool, inv_q: bool, c: i64, neg: bool) -> LaurentPoly {
    LaurentPoly::from_terms(f.terms().map(|(&(a, b), k)| {
        let a2 = if inv_p { -a } else { a };
        let b2 = if inv_q { -b } else { b } + c * a;
        let k = if neg && a.rem_euclid(2) == 1 { -k.clone() } else { k.clone() };
        ((a2, b2), k)
    }))
}

/// Whether `f` and `g` agree up to a unit monomial after `p -> ±q^c p`,
/// optionally inverting `p` and `q`.
fn equivalent(f: &LaurentPoly, g: &LaurentPoly, inversions: bool) -> bool {
    let flags: &[bool] = if inversions { &[false, true] } else { &[false] };
    for &ip in flags {
        for &iq in flags {
            for c in -40..=40 {
                for neg in [false, true] {
                    if substitute(f, ip, iq, c, neg).unit_multiple_of(g).is_some() {
                        return true;
                    }
                }
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn classification_is_symmetric(r in region_in(5, 5), sym in 0u8..8, dx in -3i32..4, dy in -3i32..4) {
        let t = r.transformed(sym, dx, dy);
        prop_assert_eq!(t.classify().name(), r.classify().name());
        prop_assert_eq!(t.is_balanced(), r.is_balanced());
        prop_assert_eq!(t.len(), r.len());
    }

    #[test]
    fn tiling_count_matches_permanent(r in region_in(4, 4)) {
        prop_assume!(r.is_balanced());
        let s = Surface::planar(&r, None);
        prop_assert_eq!(count_tilings(&s), permanent_count(&r));
    }

    #[test]
    fn annuli_cut_open_to_a_disk(r in region_in(5, 5)) {
        prop_assume!(matches!(r.classify(), Classification::Annulus { .. }));
        let ts = TrackSegment::from_region(r).unwrap();
        prop_assert!(ts.surface.cut_open_is_disk_like());
        prop_assert!(!ts.cut.crossings.is_empty());
    }
}

#[test]
fn permanent_on_frames() {
    for r in frames() {
        let s = Surface::planar(&r, None);
        assert_eq!(count_tilings(&s), permanent_count(&r), "{r:?}");
    }
}

#[test]
fn cover_sizes_and_identity_cover() {
    for r in frames() {
        let a = Annulus::new(r.clone()).unwrap();
        let base = enumerate_tilings(&Surface::planar(&r, None)).len();
        assert_eq!(enumerate_tilings(&build_cover(&a, 1)).len(), base);
        for n in 1..=3 {
            assert_eq!(build_cover(&a, n).len(), n * r.len());
        }
    }
}

#[test]
fn flips_are_involutions() {
    let r = GridRegion::frame(6, 6, 2, 2, 2, 2).unwrap();
    let ts = TrackSegment::from_region(r).unwrap();
    let s = &ts.surface;
    for t in enumerate_tilings(s).iter().take(200) {
        for f in flips_of(s, t) {
            let u = apply_flip(s, t, &f);
            let back = flips_of(s, &u).into_iter().find(|g| g.block == f.block).expect("inverse flip");
            assert_eq!(back.sign, -f.sign);
            assert_eq!(&apply_flip(s, &u, &back), t);
        }
    }
}

/// A spanning tree of the cut-open graph grown depth-first from the last
/// cell, preferring the last neighbor: usually far from the default tree.
fn other_tree(s: &Surface) -> Vec<usize> {
    let n = s.len();
    let mut seen = vec![false; n];
    let mut tree = Vec::new();
    let mut stack = vec![n - 1];
    seen[n - 1] = true;
    while let Some(u) = stack.pop() {
        for &(v, e) in s.neighbors(u).iter().rev() {
            if s.edge(e).crossing.is_none() && !seen[v] {
                seen[v] = true;
                tree.push(e);
                stack.push(u);
                stack.push(v);
                break;
            }
        }
    }
    tree
}

fn count_at_one(f: &LaurentPoly) -> BigInt {
    f.terms().map(|(_, c)| c.clone()).sum()
}

/// A different tree moves the holonomy around the hole, so the polynomial
/// is preserved only up to `p -> ±q^c p` and a unit monomial.
#[test]
fn gauge_invariance() {
    for r in frames() {
        let a = Analysis::new("g", r);
        let s = a.surface();
        let tree = other_tree(s);
        assert_eq!(tree.len(), s.len() - 1);
        assert_ne!(tree, s.tree());
        let wg = propagate_with_tree(s, &tree).unwrap();
        let other = kasteleyn_det(&KasteleynMatrix::new(s, &wg), None);
        let phi = &a.phi().unwrap().raw;
        assert!(equivalent(&other, phi, false), "{other} vs {phi}");
        let swapped = qflux::kasteleyn::normalize(&other).unwrap().apply(&other);
        assert_eq!(count_at_one(&swapped), count_at_one(&a.phi_normalized().unwrap()));
    }
}

/// A symmetric copy gets its own cut (and possibly swapped colors).
#[test]
fn other_cuts_agree_up_to_substitution() {
    for r in frames() {
        let phi = Analysis::new("a", r.clone()).phi_normalized().unwrap();
        for sym in 1..8 {
            let t = Analysis::new("b", r.transformed(sym, 1, 0)).phi_normalized().unwrap();
            assert!(equivalent(&t, &phi, true), "symmetry {sym}: {t} vs {phi}");
        }
    }
}

#[test]
fn disk_determinants_match_enumeration_parity() {
    // |det| of the unsigned adjacency matrix is at most the tiling count
    // and has the same parity.
    for w in 1..=5 {
        let r = GridRegion::rectangle(w, 2);
        let det = qflux::kasteleyn::disk_adjacency_det(&r).unwrap();
        let count = permanent_count(&r);
        assert!(det.magnitude() <= &count.into());
        assert_eq!((det - BigInt::from(count)) % 2, BigInt::from(0));
    }
}
