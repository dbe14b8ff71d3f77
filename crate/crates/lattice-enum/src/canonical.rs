//! The level-major order on levellised lattices and the per-level canonicity
//! test with stabiliser chains.
//!
//! A level's worth of candidate covering configurations is packed into a
//! single machine word so that integer comparison coincides with the
//! lexicographic comparison of the per-level weight sequences, most
//! significant block first.

use std::cmp::Ordering;

use thiserror::Error;

use crate::permgroup::{
    benes_compile, orbit_scan_with, BenesNetwork, LabelPermutation, PackedWord, ScanOutcome,
};
use crate::poset::{LabelSet, LevelledLattice};

/// Bit layout of one packed level: level `d` holds interior labels
/// `[base, base+width)`, the new atoms are `n..n+m-1`, and the pair
/// (new atom `i`, level element `j`) maps to bit `(n+m-1-i)·width + (j-base)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitLayout {
    pub base: usize,
    pub width: usize,
    pub n: usize,
    pub m: usize,
}

impl BitLayout {
    pub fn for_level(l: &LevelledLattice, d: usize, m: usize) -> BitLayout {
        let (base, width) = l.level_range(d);
        BitLayout {
            base,
            width,
            n: l.n(),
            m,
        }
    }

    pub fn word_width(&self) -> usize {
        self.m * self.width
    }

    #[inline]
    pub fn bit_index(&self, atom: usize, level_elem: usize) -> usize {
        (self.n + self.m - 1 - atom) * self.width + (level_elem - self.base)
    }

    /// Packs per-atom level slices (`parts[t]` = `U_{n+t} ∩ lev_d`, already
    /// masked to the level) into one word.
    pub fn pack(&self, parts: &[LabelSet]) -> PackedWord {
        debug_assert_eq!(parts.len(), self.m);
        debug_assert!(self.word_width() <= 128);
        let mut word = 0u128;
        for (t, &p) in parts.iter().enumerate() {
            let block = (p >> self.base) as u128;
            debug_assert_eq!(p >> self.base << self.base, p);
            word |= block << ((self.m - 1 - t) * self.width);
        }
        word
    }

    /// Extracts the per-atom slices back out of a packed word.
    pub fn unpack(&self, word: PackedWord) -> Vec<LabelSet> {
        let mask = (1u128 << self.width) - 1;
        (0..self.m)
            .map(|t| (((word >> ((self.m - 1 - t) * self.width)) & mask) as LabelSet) << self.base)
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("permutation does not preserve the level or the new atoms")]
    NotLevelPreserving,
    #[error("packed width {0} exceeds 128 bits")]
    TooWide(usize),
}

/// Packs the level-`d` slices of the given shades for `m` new atoms.
pub fn pack_level(
    l: &LevelledLattice,
    d: usize,
    upsets: &[LabelSet],
) -> Result<(BitLayout, PackedWord), LayoutError> {
    let layout = BitLayout::for_level(l, d, upsets.len());
    if layout.word_width() > 128 {
        return Err(LayoutError::TooWide(layout.word_width()));
    }
    let lev = l.level_mask(d);
    let parts: Vec<LabelSet> = upsets.iter().map(|&u| u & lev).collect();
    Ok((layout, layout.pack(&parts)))
}

/// The bit permutation induced on a packed level by a label permutation that
/// preserves both the level and the set of new atoms.
pub fn induced_bit_perm(
    perm: &LabelPermutation,
    layout: &BitLayout,
) -> Result<Vec<usize>, LayoutError> {
    let w = layout.word_width();
    let mut map = vec![0usize; w];
    for atom in layout.n..layout.n + layout.m {
        let pa = perm.apply(atom);
        if !(layout.n..layout.n + layout.m).contains(&pa) {
            return Err(LayoutError::NotLevelPreserving);
        }
        for j in layout.base..layout.base + layout.width {
            let pj = perm.apply(j);
            if !(layout.base..layout.base + layout.width).contains(&pj) {
                return Err(LayoutError::NotLevelPreserving);
            }
            map[layout.bit_index(atom, j)] = layout.bit_index(pa, pj);
        }
    }
    Ok(map)
}

/// Compiles the generators of a level stabiliser into Beneš networks for the
/// given layout.
pub fn compile_generators(
    gens: &[LabelPermutation],
    layout: &BitLayout,
) -> Result<Vec<(BenesNetwork, LabelPermutation)>, LayoutError> {
    gens.iter()
        .map(|g| {
            let map = induced_bit_perm(g, layout)?;
            let net = benes_compile(&map, layout.word_width())
                .expect("induced bit permutation is bijective");
            Ok((net, *g))
        })
        .collect()
}

/// Verdict of the per-level minimality test.
pub enum LevelVerdict {
    Reject,
    /// The packed word is minimal in its orbit; the generators of the next
    /// (smaller) stabiliser in the chain are returned.
    Accept {
        next_gens: Vec<LabelPermutation>,
    },
}

/// Tests a packed level word for lexicographic minimality under the compiled
/// stabiliser generators; on success returns generators of the stabiliser of
/// the word (the next group in the chain).
pub fn level_min_test(
    word: PackedWord,
    compiled: &[(BenesNetwork, LabelPermutation)],
    early_abort: bool,
) -> LevelVerdict {
    match orbit_scan_with(word, compiled, early_abort) {
        ScanOutcome::SmallerFound => LevelVerdict::Reject,
        ScanOutcome::Minimal { stabiliser } => LevelVerdict::Accept {
            next_gens: stabiliser,
        },
    }
}

#[derive(Debug, Error)]
#[error("lattices have different level profiles")]
pub struct ProfileMismatch;

/// The level-major total order on levellised lattices with equal level
/// profiles: compare parents first, then the deepest level's covering
/// configurations, deeper-level slices before shallower ones and smaller
/// labels before larger ones within a slice.
///
/// Exists for tests and the brute-force oracle; the enumeration hot path uses
/// [`level_min_test`] exclusively.
pub fn compare_lattices(
    l1: &LevelledLattice,
    l2: &LevelledLattice,
) -> Result<Ordering, ProfileMismatch> {
    if l1.n() != l2.n() || l1.level_starts() != l2.level_starts() {
        return Err(ProfileMismatch);
    }
    if l1.n() == 2 {
        return Ok(Ordering::Equal);
    }
    let p1 = l1.parent().expect("n > 2");
    let p2 = l2.parent().expect("n > 2");
    match compare_lattices(&p1, &p2)? {
        Ordering::Equal => {}
        o => return Ok(o),
    }
    let k = l1.num_levels();
    let (lo, w) = l1.level_range(k);
    for d in (1..k).rev() {
        let lev = l1.level_mask(d);
        for i in lo..lo + w {
            // Weight of a label set is its mask value.
            let w1 = l1.cov(i) & lev;
            let w2 = l2.cov(i) & lev;
            match w1.cmp(&w2) {
                Ordering::Equal => {}
                o => return Ok(o),
            }
        }
    }
    Ok(Ordering::Equal)
}
