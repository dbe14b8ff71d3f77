//! Adding one whole level of new atoms to a levellised lattice: legality
//! checks for the covering configurations, the construction itself, and the
//! vertical-indecomposability and gradedness predicates for children.
//!
//! A configuration is given by the interior up-closed sets `U_i = ↑A_i \ {1}`
//! of the new atoms; the antichains `A_i` themselves are materialised only
//! when the covering sets of the child are written.

use thiserror::Error;

use crate::poset::{LabelSet, LatticeError, LevelledLattice};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtendError {
    #[error("new atom {0} has no cover in the deepest level")]
    NoDeepCover(usize),
    #[error("covering configuration of new atom {0} is not a lattice-antichain")]
    NotLatticeAntichain(usize),
    #[error("configurations of new atoms {0} and {1} are incompatible")]
    Incompatible(usize, usize),
    #[error("configuration of new atom {0} is not up-closed")]
    NotUpClosed(usize),
    #[error("size {0} exceeds the build-time cap")]
    TooLarge(usize),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// True iff the up-closed set `u` is the shade of a lattice-antichain:
/// every pair in `↑A` meets inside `{0} ∪ ↑A`.  The top is implicitly a
/// member of every shade and never violates the condition.
pub fn is_lattice_antichain_upset(l: &LevelledLattice, u: LabelSet) -> bool {
    let mut rest = u;
    while rest != 0 {
        let a = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let mut rest2 = rest;
        while rest2 != 0 {
            let b = rest2.trailing_zeros() as usize;
            rest2 &= rest2 - 1;
            let m = l.meet_unchecked(a, b);
            if m != 0 && u & (1 << m) == 0 {
                return false;
            }
        }
    }
    true
}

/// True iff the antichain `a` is a lattice-antichain for `l`.
pub fn is_lattice_antichain(l: &LevelledLattice, a: LabelSet) -> bool {
    let u = if a & 0b10 != 0 {
        // A = {1}: the shade is just the top.
        debug_assert_eq!(a, 0b10);
        0
    } else {
        l.shade_closure(a)
    };
    is_lattice_antichain_upset(l, u)
}

/// Condition (iii) of the level-extension theorem: any two elements common to
/// both shades must have a nonzero meet (otherwise the two new atoms would be
/// distinct maximal lower bounds of that pair).
pub fn pairwise_compatible(l: &LevelledLattice, u_i: LabelSet, u_j: LabelSet) -> bool {
    let both = u_i & u_j;
    let mut rest = both;
    while rest != 0 {
        let a = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let mut rest2 = rest;
        while rest2 != 0 {
            let b = rest2.trailing_zeros() as usize;
            rest2 &= rest2 - 1;
            if l.meet_unchecked(a, b) == 0 {
                return false;
            }
        }
    }
    true
}

fn check_upsets(l: &LevelledLattice, upsets: &[LabelSet]) -> Result<(), ExtendError> {
    let n = l.n();
    let m = upsets.len();
    assert!(m >= 1);
    if n + m > crate::poset::N_MAX {
        return Err(ExtendError::TooLarge(n + m));
    }
    let k = l.num_levels();
    let deep = if k == 0 { 0 } else { l.level_mask(k) };
    for (t, &u) in upsets.iter().enumerate() {
        if l.shade_closure(u) != u {
            return Err(ExtendError::NotUpClosed(n + t));
        }
        if k > 0 && u & deep == 0 {
            return Err(ExtendError::NoDeepCover(n + t));
        }
        if !is_lattice_antichain_upset(l, u) {
            return Err(ExtendError::NotLatticeAntichain(n + t));
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            if !pairwise_compatible(l, upsets[i], upsets[j]) {
                return Err(ExtendError::Incompatible(n + i, n + j));
            }
        }
    }
    Ok(())
}

/// Extends `l` with one new level of `upsets.len()` atoms, the `t`-th new atom
/// having interior shade `upsets[t]`.  The meet table is updated
/// incrementally: a new atom meets exactly its shade (and the top) at itself,
/// and an old pair that met at the bottom now meets at a new atom below both.
pub fn extend(l: &LevelledLattice, upsets: &[LabelSet]) -> Result<LevelledLattice, ExtendError> {
    check_upsets(l, upsets)?;
    Ok(extend_unchecked(l, upsets))
}

/// Construction without the legality checks; callers must have established
/// them (the enumeration search enforces them incrementally).
pub fn extend_unchecked(l: &LevelledLattice, upsets: &[LabelSet]) -> LevelledLattice {
    let n = l.n();
    let m = upsets.len();
    let n2 = n + m;
    let mut level_starts = l.level_starts().to_vec();
    level_starts.push(n2);
    let mut cov = vec![0u32; n2];
    cov[..n].copy_from_slice(cov_slice(l));
    let mut up = vec![0u32; n2];
    up[..n].copy_from_slice(up_slice(l));
    let mut meet = vec![0u8; n2 * n2];
    for a in 0..n {
        for b in 0..n {
            meet[a * n2 + b] = l.meet_unchecked(a, b) as u8;
        }
    }
    for x in 0..n2 {
        meet[n2 + x] = x as u8;
        meet[x * n2 + 1] = x as u8;
        meet[x] = 0;
        meet[x * n2] = 0;
    }
    for (t, &u) in upsets.iter().enumerate() {
        let i = n + t;
        cov[i] = if u == 0 { 0b10 } else { l.minimal_elements(u) };
        up[i] = u;
        meet[i * n2 + i] = i as u8;
        let mut rest = u;
        while rest != 0 {
            let x = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            meet[i * n2 + x] = i as u8;
            meet[x * n2 + i] = i as u8;
        }
        // Old pairs that met at the bottom and are both above atom i now meet
        // at i; pairwise compatibility guarantees at most one such atom.
        let mut ra = u;
        while ra != 0 {
            let a = ra.trailing_zeros() as usize;
            ra &= ra - 1;
            let mut rb = ra;
            while rb != 0 {
                let b = rb.trailing_zeros() as usize;
                rb &= rb - 1;
                if l.meet_unchecked(a, b) == 0 {
                    debug_assert_eq!(meet[a * n2 + b], 0);
                    meet[a * n2 + b] = i as u8;
                    meet[b * n2 + a] = i as u8;
                }
            }
        }
    }
    LevelledLattice::from_fields(n2, level_starts, cov, up, meet)
}

// Internal accessors shared with the poset module.
fn cov_slice(l: &LevelledLattice) -> &[LabelSet] {
    l.cov_all()
}
fn up_slice(l: &LevelledLattice) -> &[LabelSet] {
    l.up_all()
}

/// Whether the child defined by `upsets` is vertically indecomposable, given
/// that the base is.  The only decomposable child of an indecomposable base
/// is a single new atom below the whole interior.
pub fn child_is_vi(l: &LevelledLattice, upsets: &[LabelSet]) -> bool {
    !(upsets.len() == 1 && upsets[0] == l.interior_mask())
}

/// Whether the child defined by `upsets` is graded, given that the base is:
/// the new covering sets must jointly exhaust the deepest level of the base.
pub fn child_is_graded(l: &LevelledLattice, upsets: &[LabelSet]) -> bool {
    let k = l.num_levels();
    if k == 0 {
        return true;
    }
    let deep = l.level_mask(k);
    let mut union = 0u32;
    for &u in upsets {
        union |= u & deep;
    }
    union == deep
}
