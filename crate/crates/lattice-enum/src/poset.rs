//! Levellised lattices on labels `0..n`, with `0` the bottom and `1` the top.
//!
//! Interior elements (labels `2..n-1`) are arranged by depth: the deeper the
//! element, the larger its label, and the labels of each level are consecutive.
//! Small label sets are bit masks (`bit i` = label `i`), so the weight of a set
//! in the level-major order is just its mask value.

use std::fmt;

use thiserror::Error;

/// Build-time cap on the number of elements; keeps every label set in one
/// 32-bit word and every packed level word in at most 128 bits.
pub const N_MAX: usize = 24;

/// A set of labels, one bit per label.
pub type LabelSet = u32;

/// Mask of all interior labels `2..n-1`.
pub fn interior_mask(n: usize) -> LabelSet {
    if n <= 2 {
        0
    } else {
        ((1u32 << n) - 1) & !0b11
    }
}

fn set_to_vec(mut s: LabelSet) -> Vec<usize> {
    let mut v = Vec::new();
    while s != 0 {
        let i = s.trailing_zeros() as usize;
        v.push(i);
        s &= s - 1;
    }
    v
}

/// Why a candidate structure is not a levellised lattice.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("element count {0} out of range 2..={N_MAX}")]
    BadSize(usize),
    #[error("level structure inconsistent: {0}")]
    BadLevels(String),
    #[error("covering sets inconsistent: {0}")]
    BadCovers(String),
    #[error("pair ({0},{1}) has no unique meet")]
    NoMeet(usize, usize),
    #[error("pair ({0},{1}) has no unique join")]
    NoJoin(usize, usize),
    #[error("meet table mismatch at ({0},{1}): stored {2}, computed {3}")]
    MeetMismatch(usize, usize, usize, usize),
    #[error("up-set of {0} does not match the closure of the covering relation")]
    UpSetMismatch(usize),
    #[error("label {0} out of range")]
    BadLabel(usize),
}

/// An immutable levellised `n`-lattice.
///
/// `level_starts` holds `s_1 = 2, s_2, ..., s_{k+1} = n`; interior level `d`
/// (for `d = 1..=k`) occupies labels `[s_d, s_{d+1})`.  Covers of and by `0`
/// are implicit: an interior element is an atom iff nothing interior is below
/// it.
#[derive(Clone, PartialEq, Eq)]
pub struct LevelledLattice {
    n: usize,
    level_starts: Vec<usize>,
    /// Covering sets, indexed by label; entries for `0`, `1` are unused.
    /// May contain bit 1 (the top); then it is exactly `{1}`.
    cov: Vec<LabelSet>,
    /// Strict interior shade of each interior label (excludes the top).
    up: Vec<LabelSet>,
    /// Dense meet table, `n * n`, all labels; forced entries for 0 and 1.
    meet: Vec<u8>,
}

impl fmt::Debug for LevelledLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LevelledLattice({})", self.serialize())
    }
}

impl LevelledLattice {
    /// The unique 2-lattice (bottom and top only); root of the search tree.
    pub fn root() -> Self {
        LevelledLattice {
            n: 2,
            level_starts: vec![2],
            cov: vec![0, 0],
            up: vec![0, 0],
            meet: vec![0, 0, 0, 1],
        }
    }

    /// Builds a lattice from its level boundaries and covering sets,
    /// recomputing up-sets and the meet table, and validating the result.
    ///
    /// `cov` is indexed by label; entries for labels 0 and 1 are ignored.
    pub fn from_parts(
        n: usize,
        level_starts: Vec<usize>,
        cov: Vec<LabelSet>,
    ) -> Result<Self, LatticeError> {
        if !(2..=N_MAX).contains(&n) {
            return Err(LatticeError::BadSize(n));
        }
        if cov.len() != n {
            return Err(LatticeError::BadCovers(format!(
                "expected {} covering sets, got {}",
                n,
                cov.len()
            )));
        }
        check_level_starts(n, &level_starts)?;

        // Up-sets by transitive closure; covers point to smaller labels, so a
        // single ascending pass suffices.
        let mut up = vec![0u32; n];
        for i in 2..n {
            let mut u = 0u32;
            let mut c = cov[i] & interior_mask(n);
            while c != 0 {
                let j = c.trailing_zeros() as usize;
                c &= c - 1;
                if j >= i {
                    return Err(LatticeError::BadCovers(format!(
                        "cover {j} of {i} is not shallower"
                    )));
                }
                u |= (1 << j) | up[j];
            }
            up[i] = u;
        }

        let meet = compute_meet_table(n, &up)?;
        let lat = LevelledLattice {
            n,
            level_starts,
            cov,
            up,
            meet,
        };
        lat.validate()?;
        Ok(lat)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of interior levels (`k`); 0 for the 2-lattice.
    pub fn num_levels(&self) -> usize {
        self.level_starts.len() - 1
    }

    pub fn level_starts(&self) -> &[usize] {
        &self.level_starts
    }

    /// Labels of interior level `d` (`1 <= d <= k`) as a mask.
    pub fn level_mask(&self, d: usize) -> LabelSet {
        let lo = self.level_starts[d - 1];
        let hi = self.level_starts[d];
        (((1u64 << hi) - (1u64 << lo)) as u32) & u32::MAX
    }

    /// First label and width of interior level `d`.
    pub fn level_range(&self, d: usize) -> (usize, usize) {
        let lo = self.level_starts[d - 1];
        let hi = self.level_starts[d];
        (lo, hi - lo)
    }

    pub fn interior_mask(&self) -> LabelSet {
        interior_mask(self.n)
    }

    /// Depth of a label: 0 for the top, `k+1` for the bottom.
    pub fn depth(&self, label: usize) -> usize {
        assert!(label < self.n);
        if label == 1 {
            return 0;
        }
        if label == 0 {
            return self.num_levels() + 1;
        }
        match self.level_starts.binary_search(&label) {
            Ok(pos) => pos + 1,
            Err(pos) => pos,
        }
    }

    /// Covering set of an interior label (may be `{1}`).
    pub fn cov(&self, label: usize) -> LabelSet {
        self.cov[label]
    }

    /// Strict interior shade of an interior label (top excluded).
    pub fn up(&self, label: usize) -> LabelSet {
        self.up[label]
    }

    /// The meet `a ∧ b`.
    pub fn meet(&self, a: usize, b: usize) -> Result<usize, LatticeError> {
        if a >= self.n {
            return Err(LatticeError::BadLabel(a));
        }
        if b >= self.n {
            return Err(LatticeError::BadLabel(b));
        }
        Ok(self.meet_unchecked(a, b))
    }

    #[inline]
    pub fn meet_unchecked(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.n + b] as usize
    }

    pub(crate) fn cov_all(&self) -> &[LabelSet] {
        &self.cov
    }

    pub(crate) fn up_all(&self) -> &[LabelSet] {
        &self.up
    }

    /// Assembles a lattice from already-consistent fields; used by the
    /// incremental level extension, which maintains every invariant itself.
    pub(crate) fn from_fields(
        n: usize,
        level_starts: Vec<usize>,
        cov: Vec<LabelSet>,
        up: Vec<LabelSet>,
        meet: Vec<u8>,
    ) -> Self {
        LevelledLattice {
            n,
            level_starts,
            cov,
            up,
            meet,
        }
    }

    /// Up-closure of an interior label set: `↑S` restricted to the interior.
    pub fn shade_closure(&self, s: LabelSet) -> LabelSet {
        let mut out = s;
        let mut rest = s;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            out |= self.up[i];
        }
        out
    }

    /// The antichain of minimal elements of an up-closed interior set.
    pub fn minimal_elements(&self, u: LabelSet) -> LabelSet {
        let mut dominated = 0u32;
        let mut rest = u;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            dominated |= self.up[i];
        }
        u & !dominated
    }

    /// The lattice obtained by removing the deepest interior level.
    pub fn parent(&self) -> Result<LevelledLattice, LatticeError> {
        if self.n == 2 {
            return Err(LatticeError::BadSize(1));
        }
        let k = self.num_levels();
        let n2 = self.level_starts[k - 1];
        let level_starts: Vec<usize> = self.level_starts[..k].to_vec();
        let cov: Vec<LabelSet> = self.cov[..n2].to_vec();
        let up: Vec<LabelSet> = self.up[..n2].to_vec();
        let mut meet = vec![0u8; n2 * n2];
        for a in 0..n2 {
            for b in 0..n2 {
                let v = self.meet_unchecked(a, b);
                // Meets that were a removed atom drop to the bottom.
                meet[a * n2 + b] = if v >= n2 { 0 } else { v as u8 };
            }
        }
        Ok(LevelledLattice {
            n: n2,
            level_starts,
            cov,
            up,
            meet,
        })
    }

    /// Relabels with a level-preserving permutation and rebuilds the lattice.
    /// Cold path; used by tests and the brute-force oracle.
    pub fn relabel(&self, perm: &crate::permgroup::LabelPermutation) -> Result<Self, LatticeError> {
        assert_eq!(perm.len(), self.n);
        let mut cov = vec![0u32; self.n];
        for i in 2..self.n {
            cov[perm.apply(i)] = perm.apply_set(self.cov[i]);
        }
        LevelledLattice::from_parts(self.n, self.level_starts.clone(), cov)
    }

    /// One-line text form: `N|w_1,…,w_k|c_2:…:c_{N-1}`.
    pub fn serialize(&self) -> String {
        let widths: Vec<String> = (1..=self.num_levels())
            .map(|d| {
                let (_, w) = self.level_range(d);
                w.to_string()
            })
            .collect();
        let covs: Vec<String> = (2..self.n)
            .map(|i| {
                let labels: Vec<String> =
                    set_to_vec(self.cov[i]).iter().map(|j| j.to_string()).collect();
                labels.join(",")
            })
            .collect();
        format!("{}|{}|{}", self.n, widths.join(","), covs.join(":"))
    }

    /// Parses the text form, recomputing up-sets and the meet table and
    /// validating the result.
    pub fn deserialize(line: &str) -> Result<Self, ParseError> {
        let line = line.trim_end_matches('\n');
        let mut parts = line.split('|');
        let (a, b, c) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(c), None) => (a, b, c),
            _ => return Err(ParseError::Malformed("expected three '|'-fields".into())),
        };
        let n: usize = a
            .parse()
            .map_err(|_| ParseError::Malformed(format!("bad element count {a:?}")))?;
        if !(2..=N_MAX).contains(&n) {
            return Err(ParseError::Malformed(format!("element count {n} out of range")));
        }
        let mut level_starts = vec![2usize];
        if !b.is_empty() {
            for w in b.split(',') {
                let w: usize = w
                    .parse()
                    .map_err(|_| ParseError::Malformed(format!("bad level width {w:?}")))?;
                if w == 0 {
                    return Err(ParseError::Malformed("zero level width".into()));
                }
                let next = level_starts.last().unwrap() + w;
                level_starts.push(next);
            }
        }
        if *level_starts.last().unwrap() != n {
            return Err(ParseError::Malformed("level widths do not sum to N-2".into()));
        }
        let mut cov = vec![0u32; n];
        if n > 2 {
            let entries: Vec<&str> = c.split(':').collect();
            if entries.len() != n - 2 {
                return Err(ParseError::Malformed(format!(
                    "expected {} covering sets, got {}",
                    n - 2,
                    entries.len()
                )));
            }
            for (i, entry) in entries.iter().enumerate() {
                let label = i + 2;
                let mut mask = 0u32;
                let mut prev: Option<usize> = None;
                for item in entry.split(',') {
                    let j: usize = item
                        .parse()
                        .map_err(|_| ParseError::Malformed(format!("bad cover label {item:?}")))?;
                    if j >= n || j == 0 {
                        return Err(ParseError::Malformed(format!("cover label {j} out of range")));
                    }
                    if let Some(p) = prev {
                        if j <= p {
                            return Err(ParseError::Malformed("cover labels not ascending".into()));
                        }
                    }
                    prev = Some(j);
                    mask |= 1 << j;
                }
                cov[label] = mask;
            }
        } else if !c.is_empty() {
            return Err(ParseError::Malformed("unexpected covering sets for N=2".into()));
        }
        LevelledLattice::from_parts(n, level_starts, cov).map_err(ParseError::Invalid)
    }

    /// Checks every invariant of a levellised lattice, reporting the first
    /// violation found.
    pub fn validate(&self) -> Result<(), LatticeError> {
        let n = self.n;
        if !(2..=N_MAX).contains(&n) {
            return Err(LatticeError::BadSize(n));
        }
        check_level_starts(n, &self.level_starts)?;
        if self.cov.len() != n || self.up.len() != n || self.meet.len() != n * n {
            return Err(LatticeError::BadCovers("field lengths inconsistent".into()));
        }
        let interior = interior_mask(n);
        for i in 2..n {
            let c = self.cov[i];
            if c == 0 {
                return Err(LatticeError::BadCovers(format!("element {i} has no covers")));
            }
            if c & !(interior | 0b10) != 0 {
                return Err(LatticeError::BadCovers(format!(
                    "covering set of {i} contains invalid labels"
                )));
            }
            if c & 0b10 != 0 && c != 0b10 {
                return Err(LatticeError::BadCovers(format!(
                    "element {i} covered by the top and by interior elements"
                )));
            }
            let d = self.depth(i);
            let mut has_adjacent = false;
            for j in set_to_vec(c) {
                let dj = self.depth(j);
                if dj >= d {
                    return Err(LatticeError::BadCovers(format!(
                        "cover {j} of {i} is not shallower"
                    )));
                }
                if dj == d - 1 {
                    has_adjacent = true;
                }
            }
            if !has_adjacent {
                return Err(LatticeError::BadLevels(format!(
                    "element {i} has no cover one level above"
                )));
            }
            // Covering sets are antichains: otherwise some listed cover is
            // not actually a cover.
            for a in set_to_vec(c & interior) {
                for b in set_to_vec(c & interior) {
                    if a != b && self.up[a] & (1 << b) != 0 {
                        return Err(LatticeError::BadCovers(format!(
                            "covers {a} and {b} of {i} are comparable"
                        )));
                    }
                }
            }
        }
        // Up-sets are the closure of the covering relation.
        for i in 2..n {
            let mut u = 0u32;
            for j in set_to_vec(self.cov[i] & interior) {
                u |= (1 << j) | self.up[j];
            }
            if u != self.up[i] {
                return Err(LatticeError::UpSetMismatch(i));
            }
        }
        // Meet table, and join existence checked on the fly.
        let computed = compute_meet_table(n, &self.up)?;
        for a in 2..n {
            for b in 2..n {
                let got = self.meet[a * n + b] as usize;
                let want = computed[a * n + b] as usize;
                if got != want {
                    return Err(LatticeError::MeetMismatch(a, b, got, want));
                }
            }
        }
        check_joins(n, &self.up)?;
        // Forced entries for 0 and 1.
        for x in 0..n {
            if self.meet[x] != 0 || self.meet[x * n] != 0 {
                return Err(LatticeError::MeetMismatch(0, x, self.meet[x] as usize, 0));
            }
            if self.meet[n + x] != x as u8 || self.meet[x * n + 1] != x as u8 {
                return Err(LatticeError::MeetMismatch(1, x, self.meet[n + x] as usize, x));
            }
        }
        Ok(())
    }
}

fn check_level_starts(n: usize, starts: &[usize]) -> Result<(), LatticeError> {
    if starts.is_empty() || starts[0] != 2 || *starts.last().unwrap() != n {
        return Err(LatticeError::BadLevels(format!(
            "level boundaries {starts:?} must run from 2 to {n}"
        )));
    }
    for w in starts.windows(2) {
        if w[1] <= w[0] {
            return Err(LatticeError::BadLevels("empty or unordered level".into()));
        }
    }
    Ok(())
}

/// Dense meet table from interior up-sets; errors if some pair has no unique
/// greatest common lower bound.
fn compute_meet_table(n: usize, up: &[LabelSet]) -> Result<Vec<u8>, LatticeError> {
    // Strict interior shadows.
    let mut down = vec![0u32; n];
    for i in 2..n {
        for j in set_to_vec(up[i]) {
            down[j] |= 1 << i;
        }
    }
    let mut meet = vec![0u8; n * n];
    for x in 0..n {
        meet[n + x] = x as u8; // 1 ∧ x = x
        meet[x * n + 1] = x as u8;
        meet[x] = 0; // 0 ∧ x = 0
        meet[x * n] = 0;
    }
    for a in 2..n {
        for b in 2..a + 1 {
            if b < 2 {
                continue;
            }
            let v = if a == b {
                a
            } else if up[a] & (1 << b) != 0 {
                a // b above a
            } else if up[b] & (1 << a) != 0 {
                b
            } else {
                let common = down[a] & down[b];
                if common == 0 {
                    0
                } else {
                    // Unique maximal element of the common lower bounds.
                    let mut dominated = 0u32;
                    for c in set_to_vec(common) {
                        dominated |= down[c];
                    }
                    let maximal = common & !dominated;
                    if maximal.count_ones() != 1 {
                        return Err(LatticeError::NoMeet(b, a));
                    }
                    maximal.trailing_zeros() as usize
                }
            };
            meet[a * n + b] = v as u8;
            meet[b * n + a] = v as u8;
        }
    }
    Ok(meet)
}

/// Checks that every interior pair has a unique least upper bound.  Joins are
/// never stored; this runs only inside validation.
fn check_joins(n: usize, up: &[LabelSet]) -> Result<(), LatticeError> {
    for a in 2..n {
        for b in 2..a {
            if up[a] & (1 << b) != 0 || up[b] & (1 << a) != 0 {
                continue; // comparable
            }
            let common = up[a] & up[b];
            if common == 0 {
                continue; // join is the top
            }
            let mut dominated = 0u32;
            for c in set_to_vec(common) {
                dominated |= up[c];
            }
            let minimal = common & !dominated;
            if minimal.count_ones() != 1 {
                return Err(LatticeError::NoJoin(b, a));
            }
        }
    }
    Ok(())
}

/// Errors from [`LevelledLattice::deserialize`].
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed lattice record: {0}")]
    Malformed(String),
    #[error("record is not a levellised lattice: {0}")]
    Invalid(#[from] LatticeError),
}

/// Standard test fixtures, forced by their covering definitions.
pub mod fixtures {
    use super::LevelledLattice;

    /// n=2: bottom and top only.
    pub fn l2() -> LevelledLattice {
        LevelledLattice::root()
    }

    /// n=4 chain: 0 < 3 < 2 < 1.
    pub fn c4() -> LevelledLattice {
        LevelledLattice::deserialize("4|1,1|1:2").unwrap()
    }

    /// n=4 diamond: two incomparable atoms.
    pub fn d4() -> LevelledLattice {
        LevelledLattice::deserialize("4|2|1:1").unwrap()
    }

    /// n=5 pentagon.
    pub fn n5() -> LevelledLattice {
        LevelledLattice::deserialize("5|2,1|1:1:2").unwrap()
    }

    /// n=5: three atoms under the top.
    pub fn m3() -> LevelledLattice {
        LevelledLattice::deserialize("5|3|1:1:1").unwrap()
    }

    /// n=6 hexagon.
    pub fn h6() -> LevelledLattice {
        LevelledLattice::deserialize("6|2,2|1:1:2:3").unwrap()
    }

    /// n=5: one atom below both elements of a diamond.
    pub fn d4b() -> LevelledLattice {
        LevelledLattice::deserialize("5|2,1|1:1:2,3").unwrap()
    }
}
