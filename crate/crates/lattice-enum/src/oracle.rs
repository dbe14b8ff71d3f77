//! Brute-force references used only by tests: exhaustive small-size
//! enumeration with isomorphism classification by relabelling, exhaustive
//! canonicity, and predicates evaluated directly from their definitions.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::canonical::compare_lattices;
use crate::enumerate::{CountTable, Mode};
use crate::extension::extend;
use crate::permgroup::LabelPermutation;
use crate::poset::{LabelSet, LevelledLattice};

fn orderings(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in orderings(&rest) {
            tail.insert(0, x);
            out.push(tail);
        }
    }
    out
}

/// All label permutations fixing 0, 1 and every interior level setwise.
pub fn level_preserving_perms(l: &LevelledLattice) -> Vec<LabelPermutation> {
    let n = l.n();
    let mut images: Vec<Vec<usize>> = vec![vec![0, 1]];
    for d in 1..=l.num_levels() {
        let (lo, w) = l.level_range(d);
        let level: Vec<usize> = (lo..lo + w).collect();
        let mut next = Vec::new();
        for img in &images {
            for tail in orderings(&level) {
                let mut img = img.clone();
                img.extend(tail);
                next.push(img);
            }
        }
        images = next;
    }
    images
        .into_iter()
        .map(|img| {
            debug_assert_eq!(img.len(), n);
            LabelPermutation::from_images(&img)
        })
        .collect()
}

/// True iff no level-preserving relabelling is strictly smaller.
pub fn is_canonical_exhaustive(l: &LevelledLattice) -> bool {
    assert!(l.n() <= 9, "factorial guard");
    level_preserving_perms(l).iter().all(|p| {
        compare_lattices(&l.relabel(p).unwrap(), l).unwrap() != Ordering::Less
    })
}

/// The minimum of all level-preserving relabellings; the canonical form of
/// the isomorphism class.
pub fn min_form(l: &LevelledLattice) -> LevelledLattice {
    assert!(l.n() <= 9, "factorial guard");
    level_preserving_perms(l)
        .iter()
        .map(|p| l.relabel(p).unwrap())
        .min_by(|a, b| compare_lattices(a, b).unwrap())
        .unwrap()
}

/// Whether the bounded poset given by interior covering sets is a lattice:
/// every pair must have a unique greatest lower and least upper bound,
/// checked by full down-set and up-set intersection scans.
///
/// `cov[i]` may reference only smaller interior labels or the top; entries
/// for labels 0 and 1 are ignored.
pub fn is_lattice_naive(n: usize, cov: &[LabelSet]) -> bool {
    assert!(n >= 2 && cov.len() == n);
    // above[i]: everything strictly above i, top included.
    let mut above = vec![0u32; n];
    for i in 2..n {
        let mut a = 0b10u32;
        let mut c = cov[i] & !0b11;
        while c != 0 {
            let j = c.trailing_zeros() as usize;
            c &= c - 1;
            assert!(j < i, "covers must point to smaller labels");
            a |= (1 << j) | above[j];
        }
        above[i] = a;
    }
    // leq[a]: everything at or below a; geq[a]: everything at or above a.
    let mut leq = vec![0u32; n];
    let mut geq = vec![0u32; n];
    for a in 0..n {
        leq[a] = 1 | (1 << a);
        geq[a] = (1 << a) | if a == 0 { (1u32 << n) - 1 } else { above[a] | 1 << 1 };
        if a == 1 {
            leq[a] = (1u32 << n) - 1;
            geq[a] = 1 << 1;
        }
    }
    for i in 2..n {
        let mut a = above[i] & !0b10;
        while a != 0 {
            let j = a.trailing_zeros() as usize;
            a &= a - 1;
            leq[j] |= 1 << i;
        }
    }
    let unique_extreme = |set: u32, rel: &[u32]| {
        // An element of `set` that dominates the whole set under `rel`.
        let mut rest = set;
        while rest != 0 {
            let z = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if set & !rel[z] == 0 {
                return true;
            }
        }
        false
    };
    for a in 0..n {
        for b in 0..a {
            if !unique_extreme(leq[a] & leq[b], &leq) {
                return false;
            }
            if !unique_extreme(geq[a] & geq[b], &geq) {
                return false;
            }
        }
    }
    true
}

/// Direct comparability scan: vertically indecomposable iff no interior
/// element is comparable with every other interior element.
pub fn is_vi_naive(l: &LevelledLattice) -> bool {
    let n = l.n();
    !(2..n).any(|z| {
        (2..n).all(|x| {
            x == z || l.up(x) & (1 << z) != 0 || l.up(z) & (1 << x) != 0
        })
    })
}

/// Direct rank scan: graded iff every cover relation drops exactly one level,
/// including the implicit covers of the bottom.
pub fn is_graded_naive(l: &LevelledLattice) -> bool {
    let n = l.n();
    let k = l.num_levels();
    let mut has_below = 0u32;
    for x in 2..n {
        has_below |= l.up(x);
        let mut c = l.cov(x);
        while c != 0 {
            let j = c.trailing_zeros() as usize;
            c &= c - 1;
            if l.depth(j) != l.depth(x) - 1 {
                return false;
            }
        }
    }
    // The bottom covers exactly the minimal interior elements.
    for x in 2..n {
        if has_below & (1 << x) == 0 && l.depth(x) != k {
            return false;
        }
    }
    true
}

fn mode_admits(l: &LevelledLattice, mode: Mode) -> bool {
    match mode {
        Mode::All => true,
        Mode::Vi => is_vi_naive(l),
        Mode::Graded => is_graded_naive(l),
        Mode::ViGraded => is_vi_naive(l) && is_graded_naive(l),
    }
}

/// All up-closed interior subsets usable as a new atom's shade: non-empty
/// intersection with the deepest level keeps the extension levellised.
pub fn shade_candidates(l: &LevelledLattice) -> Vec<LabelSet> {
    let k = l.num_levels();
    if k == 0 {
        return vec![0];
    }
    let deep = l.level_mask(k);
    let interior = l.interior_mask();
    let width = l.n() - 2;
    (0..1u32 << width)
        .map(|x| x << 2)
        .filter(|&s| s & interior == s && l.shade_closure(s) == s && s & deep != 0)
        .collect()
}

fn grow(
    l: &LevelledLattice,
    n_max: usize,
    out: &mut Vec<LevelledLattice>,
) {
    out.push(l.clone());
    let candidates = shade_candidates(l);
    for m in 1..=n_max - l.n() {
        let mut shades = vec![0u32; m];
        tuples(l, &candidates, &mut shades, 0, n_max, out);
    }
}

fn tuples(
    l: &LevelledLattice,
    candidates: &[LabelSet],
    shades: &mut Vec<LabelSet>,
    t: usize,
    n_max: usize,
    out: &mut Vec<LevelledLattice>,
) {
    if t == shades.len() {
        if let Ok(child) = extend(l, shades) {
            grow(&child, n_max, out);
        }
        return;
    }
    for &u in candidates {
        shades[t] = u;
        tuples(l, candidates, shades, t + 1, n_max, out);
    }
}

/// Exhaustive ground truth: every labelled levellised lattice of size 2..=n
/// is generated by unrestricted level-wise extension (each arises exactly
/// once, since truncation is the unique inverse), classified into
/// isomorphism classes by minimum relabelling, and filtered by `mode`.
///
/// Returns the per-size class counts and all class representatives.
pub fn brute(n: usize, mode: Mode) -> (CountTable, Vec<LevelledLattice>) {
    assert!((2..=8).contains(&n), "cost guard");
    let mut labelled = Vec::new();
    grow(&LevelledLattice::root(), n, &mut labelled);
    let mut classes: BTreeMap<String, LevelledLattice> = BTreeMap::new();
    for l in &labelled {
        if mode_admits(l, mode) {
            let rep = min_form(l);
            classes.entry(rep.serialize()).or_insert(rep);
        }
    }
    let mut counts = vec![0u64; n + 1];
    counts[1] = 1;
    let reps: Vec<LevelledLattice> = classes.into_values().collect();
    for r in &reps {
        counts[r.n()] += 1;
    }
    (
        CountTable {
            mode,
            max_n: n,
            counts,
        },
        reps,
    )
}
