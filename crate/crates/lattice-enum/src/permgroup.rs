//! Label permutations, bit permutations on packed words via Beneš networks,
//! orbit-minimality scans with Schreier generators, and Jerrum's filter.

use std::collections::{HashMap, VecDeque};
use std::hash::{BuildHasherDefault, Hasher};

use thiserror::Error;

use crate::poset::{LabelSet, N_MAX};

/// A packed level configuration; at most 128 bits are used.
pub type PackedWord = u128;

/// Multiplicative hash for packed words; the visited map of an orbit scan is
/// on the hot path and needs no hash-flooding protection.
#[derive(Default)]
struct WordHasher(u64);

impl Hasher for WordHasher {
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = (self.0 ^ b as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        }
    }

    fn write_u128(&mut self, v: u128) {
        let folded = (v as u64) ^ ((v >> 64) as u64).rotate_left(31);
        self.0 = folded.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    }

    fn finish(&self) -> u64 {
        self.0 ^ (self.0 >> 29)
    }
}

type WordMap = HashMap<PackedWord, LabelPermutation, BuildHasherDefault<WordHasher>>;

/// A permutation of the labels `0..len`, fixing 0 and 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabelPermutation {
    len: u8,
    img: [u8; N_MAX],
}

impl std::fmt::Debug for LabelPermutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "perm{:?}", &self.img[..self.len as usize])
    }
}

impl LabelPermutation {
    pub fn identity(len: usize) -> Self {
        assert!(len <= N_MAX);
        let mut img = [0u8; N_MAX];
        for (i, v) in img.iter_mut().enumerate() {
            *v = i as u8;
        }
        LabelPermutation {
            len: len as u8,
            img,
        }
    }

    /// Builds a permutation from its image list; must be a bijection fixing
    /// labels 0 and 1.
    pub fn from_images(images: &[usize]) -> Self {
        assert!(images.len() <= N_MAX);
        let mut seen = 0u32;
        let mut img = [0u8; N_MAX];
        for (i, &v) in images.iter().enumerate() {
            assert!(v < images.len() && seen & (1 << v) == 0, "not a bijection");
            seen |= 1 << v;
            img[i] = v as u8;
        }
        assert!(images.len() < 2 || (images[0] == 0 && images[1] == 1));
        for i in images.len()..N_MAX {
            img[i] = i as u8;
        }
        LabelPermutation {
            len: images.len() as u8,
            img,
        }
    }

    /// The transposition `(a b)` on domain `0..len`.
    pub fn transposition(len: usize, a: usize, b: usize) -> Self {
        let mut p = Self::identity(len);
        p.img[a] = b as u8;
        p.img[b] = a as u8;
        p
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.img[x] as usize
    }

    pub fn apply_set(&self, s: LabelSet) -> LabelSet {
        let mut out = 0;
        let mut rest = s;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            out |= 1 << self.img[i];
        }
        out
    }

    /// `self` followed by `other`: `x ↦ other(self(x))`.
    pub fn then(&self, other: &LabelPermutation) -> LabelPermutation {
        debug_assert_eq!(self.len, other.len);
        // Both fix everything at or beyond `len`.
        let mut img = self.img;
        for i in 0..self.len as usize {
            img[i] = other.img[self.img[i] as usize];
        }
        LabelPermutation {
            len: self.len,
            img,
        }
    }

    pub fn inverse(&self) -> LabelPermutation {
        let mut img = self.img;
        for i in 0..self.len as usize {
            img[self.img[i] as usize] = i as u8;
        }
        LabelPermutation {
            len: self.len,
            img,
        }
    }

    pub fn is_identity(&self) -> bool {
        (0..self.len as usize).all(|i| self.img[i] as usize == i)
    }

    /// Smallest moved point, if any.
    pub fn min_moved(&self) -> Option<usize> {
        (0..self.len as usize).find(|&i| self.img[i] as usize != i)
    }

    /// Mask of moved points.
    pub fn support(&self) -> u32 {
        let mut s = 0;
        for i in 0..self.len as usize {
            if self.img[i] as usize != i {
                s |= 1 << i;
            }
        }
        s
    }

    /// Extends the domain to `len`, fixing the new labels.
    pub fn extended(&self, len: usize) -> LabelPermutation {
        assert!(len >= self.len as usize && len <= N_MAX);
        let mut p = *self;
        p.len = len as u8;
        p
    }
}

#[derive(Debug, Error)]
pub enum BenesError {
    #[error("bit permutation is not a bijection on 0..{0}")]
    NotBijective(usize),
    #[error("word width {0} exceeds 128 bits")]
    TooWide(usize),
}

/// A compiled bit permutation: a sequence of masked delta-swap stages.
#[derive(Debug, Clone)]
pub struct BenesNetwork {
    width: usize,
    stages: Vec<(u128, u32)>,
}

#[inline]
fn delta_swap(x: u128, mask: u128, shift: u32) -> u128 {
    let t = (x ^ (x >> shift)) & mask;
    x ^ t ^ (t << shift)
}

impl BenesNetwork {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn num_stages(&self) -> usize {
        self.stages.len()
    }

    #[inline]
    pub fn apply(&self, word: PackedWord) -> PackedWord {
        let mut x = word;
        for &(mask, shift) in &self.stages {
            x = delta_swap(x, mask, shift);
        }
        x
    }
}

/// Compiles a bit permutation (`bit_perm[p]` = destination of source bit `p`)
/// into a Beneš network of at most `2·ceil(log2 W) − 1` delta-swap stages.
///
/// Widths need not be powers of two; the permutation is padded with fixed
/// points up to the next power of two.
pub fn benes_compile(bit_perm: &[usize], width: usize) -> Result<BenesNetwork, BenesError> {
    if width > 128 {
        return Err(BenesError::TooWide(width));
    }
    assert_eq!(bit_perm.len(), width);
    let mut seen = [false; 128];
    for &d in bit_perm {
        if d >= width || seen[d] {
            return Err(BenesError::NotBijective(width));
        }
        seen[d] = true;
    }
    let p2 = width.next_power_of_two().max(1);
    let mut full: Vec<usize> = (0..p2).collect();
    full[..width].copy_from_slice(bit_perm);
    let mut stages = build_stages(&full);
    stages.retain(|&(mask, _)| mask != 0);
    Ok(BenesNetwork { width, stages })
}

/// Recursive Beneš construction; returns a dense stage list of length
/// `2·log2(p) − 1` (zero masks included, dropped by the caller).
fn build_stages(perm: &[usize]) -> Vec<(u128, u32)> {
    let p = perm.len();
    if p == 1 {
        return Vec::new();
    }
    if p == 2 {
        return vec![(if perm[0] == 1 { 1 } else { 0 }, 1)];
    }
    let h = p / 2;
    let mut inv = vec![0usize; p];
    for (s, &d) in perm.iter().enumerate() {
        inv[d] = s;
    }
    // 2-colour the routing constraint cycles: colour 0 routes through the
    // lower half of the network, colour 1 through the upper half.  Input
    // pairs {s, s^h} and the two sources of each output pair must get
    // different colours.
    const UNSET: u8 = u8::MAX;
    let mut colour = vec![UNSET; p];
    for s0 in 0..p {
        if colour[s0] != UNSET {
            continue;
        }
        let mut s = s0;
        while colour[s] == UNSET {
            colour[s] = 0;
            let t = s ^ h;
            colour[t] = 1;
            s = inv[perm[t] ^ h];
        }
    }
    debug_assert!((0..p).all(|s| colour[s] != colour[s ^ h]));
    debug_assert!((0..p).all(|s| colour[s] != colour[inv[perm[s] ^ h]] || s == inv[perm[s] ^ h]));

    let mut first_mask = 0u128;
    let mut last_mask = 0u128;
    let mut lo = vec![0usize; h];
    let mut hi = vec![0usize; h];
    for i in 0..h {
        if colour[i] == 1 {
            first_mask |= 1 << i;
        }
        let (s_lo, s_hi) = if colour[i] == 0 { (i, i + h) } else { (i + h, i) };
        lo[i] = perm[s_lo] % h;
        hi[i] = perm[s_hi] % h;
        // The colour-0 element of output pair i arrives at lower slot i.
        if colour[inv[i]] == 1 {
            last_mask |= 1 << i;
        }
    }
    let lo_stages = build_stages(&lo);
    let hi_stages = build_stages(&hi);
    debug_assert_eq!(lo_stages.len(), hi_stages.len());
    let mut stages = Vec::with_capacity(lo_stages.len() + 2);
    stages.push((first_mask, h as u32));
    for (&(lm, ls), &(hm, hs)) in lo_stages.iter().zip(&hi_stages) {
        debug_assert_eq!(ls, hs);
        stages.push((lm | (hm << h), ls));
    }
    stages.push((last_mask, h as u32));
    stages
}

/// Moves the bits of `word` directly per `bit_perm`; reference path for the
/// compiled networks.
pub fn permute_bits(word: PackedWord, bit_perm: &[usize]) -> PackedWord {
    let mut out = 0;
    for (p, &d) in bit_perm.iter().enumerate() {
        if word >> p & 1 != 0 {
            out |= 1u128 << d;
        }
    }
    out
}

/// Outcome of an orbit scan.
#[derive(Debug)]
pub enum ScanOutcome {
    /// A strictly smaller word exists in the orbit; the candidate is not
    /// canonical and the entire branch can be discarded.
    SmallerFound,
    /// The word is minimal; `stabiliser` generates its point stabiliser
    /// (Schreier generators, reduced by Jerrum's filter).
    Minimal { stabiliser: Vec<LabelPermutation> },
}

/// BFS over the orbit of `word` under the generators, aborting as soon as a
/// smaller image is found.  On minimality, Schreier generators of the
/// stabiliser of `word` are returned, filtered down to at most
/// `moved points − 1` elements.
pub fn orbit_scan(
    word: PackedWord,
    gens: &[(BenesNetwork, LabelPermutation)],
) -> ScanOutcome {
    orbit_scan_with(word, gens, true)
}

/// Like [`orbit_scan`], with the early abort optionally disabled (testing
/// hook; the verdict must not depend on it).
pub fn orbit_scan_with(
    word: PackedWord,
    gens: &[(BenesNetwork, LabelPermutation)],
    early_abort: bool,
) -> ScanOutcome {
    if gens.is_empty() {
        return ScanOutcome::Minimal {
            stabiliser: Vec::new(),
        };
    }
    let domain = gens[0].1.len();
    let mut filter = JerrumFilter::new(domain);
    let mut visited = WordMap::with_capacity_and_hasher(16, Default::default());
    let mut queue: VecDeque<(PackedWord, LabelPermutation)> = VecDeque::with_capacity(16);
    let id = LabelPermutation::identity(domain);
    visited.insert(word, id);
    queue.push_back((word, id));
    let mut smaller = false;
    'bfs: while let Some((u, t_u)) = queue.pop_front() {
        for (net, g) in gens {
            let v = net.apply(u);
            if v < word {
                smaller = true;
                if early_abort {
                    break 'bfs;
                }
            }
            match visited.get(&v) {
                None => {
                    let t_v = t_u.then(g);
                    visited.insert(v, t_v);
                    queue.push_back((v, t_v));
                }
                Some(t_v) => {
                    if !smaller {
                        // Schreier generator of the stabiliser of `word`;
                        // identity when the two transversal words agree.
                        let w = t_u.then(g);
                        if w != *t_v {
                            filter.insert_deduplicated(w.then(&t_v.inverse()));
                        }
                    }
                }
            }
        }
    }
    if smaller {
        ScanOutcome::SmallerFound
    } else {
        ScanOutcome::Minimal {
            stabiliser: filter.into_generators(),
        }
    }
}

/// Jerrum's filter: maintains a generating set whose associated edge set on
/// the moved points is a forest, hence of size at most `moved points − 1`.
pub struct JerrumFilter {
    domain: usize,
    edges: Vec<Edge>,
}

struct Edge {
    a: usize, // least moved point of the label
    b: usize, // image of `a`
    label: LabelPermutation,
}

impl JerrumFilter {
    pub fn new(domain: usize) -> Self {
        JerrumFilter {
            domain,
            edges: Vec::new(),
        }
    }

    pub fn into_generators(self) -> Vec<LabelPermutation> {
        self.edges.into_iter().map(|e| e.label).collect()
    }

    pub fn generators(&self) -> impl Iterator<Item = &LabelPermutation> {
        self.edges.iter().map(|e| e.label())
    }

    /// Path between two points in the edge forest, as a list of
    /// (edge index, traversed forwards) pairs.
    fn path(&self, from: usize, to: usize) -> Option<Vec<(usize, bool)>> {
        // The forest is tiny; a DFS over edge endpoints suffices.
        let mut stack = vec![(from, usize::MAX)];
        let mut prev = [(usize::MAX, 0usize, false); N_MAX]; // node -> (parent, edge, fwd)
        while let Some((node, via)) = stack.pop() {
            if node == to {
                let mut out = Vec::new();
                let mut cur = node;
                while cur != from {
                    let (p, e, fwd) = prev[cur];
                    out.push((e, fwd));
                    cur = p;
                }
                out.reverse();
                return Some(out);
            }
            for (idx, e) in self.edges.iter().enumerate() {
                if idx == via {
                    continue;
                }
                let next = if e.a == node {
                    Some((e.b, true))
                } else if e.b == node {
                    Some((e.a, false))
                } else {
                    None
                };
                if let Some((next, fwd)) = next {
                    if next != from && prev[next].0 == usize::MAX {
                        prev[next] = (node, idx, fwd);
                        stack.push((next, idx));
                    }
                }
            }
        }
        None
    }

    fn path_product(&self, path: &[(usize, bool)]) -> LabelPermutation {
        let mut p = LabelPermutation::identity(self.domain);
        for &(idx, fwd) in path {
            let e = &self.edges[idx];
            p = if fwd {
                p.then(&e.label)
            } else {
                p.then(&e.label.inverse())
            };
        }
        p
    }

    /// [`insert`](Self::insert) with a cheap skip of exact repeats, which
    /// Schreier generation produces in bulk.
    pub fn insert_deduplicated(&mut self, gen: LabelPermutation) {
        if self.edges.iter().any(|e| e.label == gen) {
            return;
        }
        self.insert(gen);
    }

    /// Inserts a permutation, keeping the edge forest acyclic.  When the new
    /// edge would close a cycle, the cycle product (which fixes every point up
    /// to and including the least cycle vertex) replaces one of the cycle
    /// edges, recursing until the forest property is restored.
    pub fn insert(&mut self, gen: LabelPermutation) {
        let mut g = gen;
        loop {
            let a = match g.min_moved() {
                None => return,
                Some(a) => a,
            };
            let b = g.apply(a);
            debug_assert!(b > a);
            let path = match self.path(a, b) {
                None => {
                    self.edges.push(Edge { a, b, label: g });
                    return;
                }
                Some(p) => p,
            };
            // Least vertex on the cycle formed by the path plus the new edge.
            let mut x0 = a.min(b);
            let mut verts = vec![a];
            for &(idx, fwd) in &path {
                let e = &self.edges[idx];
                let v = if fwd { e.b } else { e.a };
                verts.push(v);
                x0 = x0.min(v);
            }
            if x0 == a {
                // Cycle product at `a`: apply g, then walk the path back.
                g = g.then(&self.path_product(&path).inverse());
                continue;
            }
            // An interior path vertex is the least; drop one of its cycle
            // edges and re-insert the cycle product, which moves only points
            // above it.  The dropped label stays expressible through the rest
            // of the cycle.
            let pos = verts.iter().position(|&v| v == x0).unwrap();
            // Cycle product starting at x0: path tail to b, new edge backwards,
            // path head back to a ... equivalently walk the closed cycle once.
            // Closed walk: x0 -> b along the path tail, b -> a via the new
            // label inverted, a -> x0 along the path head.
            let tail = self.path_product(&path[pos..]);
            let head = self.path_product(&path[..pos]);
            let cycle = tail.then(&g.inverse()).then(&head);
            debug_assert_eq!(cycle.apply(x0), x0);
            debug_assert!(cycle.min_moved().map_or(true, |m| m > x0));
            let drop_idx = path[pos].0; // cycle edge incident to x0
            let new_edge = Edge { a, b, label: g };
            self.edges[drop_idx] = new_edge;
            g = cycle;
        }
    }
}

impl Edge {
    fn label(&self) -> &LabelPermutation {
        &self.label
    }
}

/// Reduces a generating set to at most `moved points − 1` permutations
/// generating the same group.
pub fn jerrum_reduce(gens: &[LabelPermutation], domain: usize) -> Vec<LabelPermutation> {
    let mut filter = JerrumFilter::new(domain);
    for g in gens {
        filter.insert(*g);
    }
    filter.into_generators()
}

/// Enumerates the full group generated by `gens`, up to `cap` elements.
/// Returns `None` if the cap is exceeded.  Test-scale only.
pub fn group_closure(
    gens: &[LabelPermutation],
    domain: usize,
    cap: usize,
) -> Option<std::collections::HashSet<LabelPermutation>> {
    let mut set = std::collections::HashSet::new();
    let mut queue = VecDeque::new();
    let id = LabelPermutation::identity(domain);
    set.insert(id);
    queue.push_back(id);
    while let Some(p) = queue.pop_front() {
        for g in gens {
            let q = p.then(g);
            if set.insert(q) {
                if set.len() > cap {
                    return None;
                }
                queue.push_back(q);
            }
        }
    }
    Some(set)
}
