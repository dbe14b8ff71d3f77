//! The depth-first tree of canonical lattices rooted at the 2-lattice:
//! children are generated by a backtrack search over per-level words with
//! forced-element propagation, incremental legality checks, and per-level
//! canonicity pruning.  Serial and multi-threaded traversal, plus the
//! vertical composition recurrence.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use crate::canonical::{compile_generators, level_min_test, BitLayout, LevelVerdict};
use crate::extension::{child_is_graded, child_is_vi, extend_unchecked};
use crate::permgroup::{BenesNetwork, LabelPermutation};
use crate::poset::{LabelSet, LevelledLattice, N_MAX};

/// Which class of lattices to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    All,
    Vi,
    Graded,
    ViGraded,
}

impl Mode {
    pub const ALL_MODES: [Mode; 4] = [Mode::All, Mode::Vi, Mode::Graded, Mode::ViGraded];

    fn wants_vi(self) -> bool {
        matches!(self, Mode::Vi | Mode::ViGraded)
    }

    fn wants_graded(self) -> bool {
        matches!(self, Mode::Graded | Mode::ViGraded)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::All => "all",
            Mode::Vi => "vi",
            Mode::Graded => "graded",
            Mode::ViGraded => "vi-graded",
        };
        f.write_str(s)
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Mode::All),
            "vi" => Ok(Mode::Vi),
            "graded" => Ok(Mode::Graded),
            "vi-graded" => Ok(Mode::ViGraded),
            other => Err(format!(
                "unknown mode {other:?} (expected all, vi, graded or vi-graded)"
            )),
        }
    }
}

/// A node of the search tree: a canonical lattice together with generators of
/// its level-preserving automorphism group.
#[derive(Debug, Clone)]
pub struct SearchNode {
    pub lattice: LevelledLattice,
    pub stab_gens: Vec<LabelPermutation>,
}

impl SearchNode {
    /// The root: the 2-lattice with trivial stabiliser.
    pub fn root() -> Self {
        SearchNode {
            lattice: LevelledLattice::root(),
            stab_gens: Vec::new(),
        }
    }
}

/// Enumeration parameters.
#[derive(Debug, Clone)]
pub struct EnumConfig {
    pub n_max: usize,
    pub mode: Mode,
    pub threads: usize,
    /// Nodes of at most this size are produced serially; every extension
    /// reaching past it becomes one work item for the thread pool.  0 means
    /// the default `min(n_max, 12)`.
    pub seed_size: usize,
    /// Abort orbit scans at the first smaller image; disabling this is a
    /// testing hook and must not change any verdict.
    pub early_abort: bool,
}

impl EnumConfig {
    pub fn new(n_max: usize, mode: Mode) -> Self {
        EnumConfig {
            n_max,
            mode,
            threads: 1,
            seed_size: 0,
            early_abort: true,
        }
    }
}

/// Exact per-size counts for one mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub mode: Mode,
    pub max_n: usize,
    /// `counts[n]` for `1 <= n <= max_n`; index 0 unused.
    pub counts: Vec<u64>,
}

/// TSV rendering: one comment header, then `<n>\t<count>` per size.
pub fn format_count_table(table: &CountTable) -> String {
    let mut out = format!("# mode={} max_n={}\n", table.mode, table.max_n);
    for n in 1..=table.max_n {
        out.push_str(&format!("{}\t{}\n", n, table.counts[n]));
    }
    out
}

/// Yields exactly the canonical lattices whose parent is `node.lattice` and
/// whose new deepest level has `m` elements, each with its own stabiliser
/// generators, filtered by `mode`.
pub fn children<F: FnMut(SearchNode)>(
    node: &SearchNode,
    m: usize,
    mode: Mode,
    early_abort: bool,
    mut emit: F,
) {
    let l = &node.lattice;
    let n = l.n();
    assert!(m >= 1 && n + m <= N_MAX);
    // S_k = Stab(L) × Sym(new labels).
    let mut gens: Vec<LabelPermutation> =
        node.stab_gens.iter().map(|g| g.extended(n + m)).collect();
    for t in 0..m.saturating_sub(1) {
        gens.push(LabelPermutation::transposition(n + m, n + t, n + t + 1));
    }
    let mut search = ChildSearch {
        l,
        m,
        mode,
        early_abort,
        upsets: vec![0; m],
        emit: &mut emit,
    };
    search.descend(l.num_levels(), gens);
}

struct ChildSearch<'a, F: FnMut(SearchNode)> {
    l: &'a LevelledLattice,
    m: usize,
    mode: Mode,
    early_abort: bool,
    upsets: Vec<LabelSet>,
    emit: &'a mut F,
}

struct LevelCtx {
    layout: BitLayout,
    lev: LabelSet,
    forced: Vec<LabelSet>,
    compiled: Vec<(BenesNetwork, LabelPermutation)>,
    deepest: bool,
}

impl<F: FnMut(SearchNode)> ChildSearch<'_, F> {
    fn descend(&mut self, d: usize, gens: Vec<LabelPermutation>) {
        if d == 0 {
            if self.mode.wants_vi() && !child_is_vi(self.l, &self.upsets) {
                return;
            }
            (self.emit)(SearchNode {
                lattice: extend_unchecked(self.l, &self.upsets),
                stab_gens: gens,
            });
            return;
        }
        let layout = BitLayout::for_level(self.l, d, self.m);
        let compiled =
            compile_generators(&gens, &layout).expect("stabiliser generators preserve levels");
        let lev = self.l.level_mask(d);
        // Deeper choices force their up-closure into this level.
        let forced: Vec<LabelSet> = self
            .upsets
            .iter()
            .map(|&u| self.l.shade_closure(u) & lev)
            .collect();
        let ctx = LevelCtx {
            layout,
            lev,
            forced,
            compiled,
            deepest: d == self.l.num_levels(),
        };
        self.choose(d, 0, &ctx);
    }

    fn choose(&mut self, d: usize, t: usize, ctx: &LevelCtx) {
        if t == self.m {
            self.test_level(d, ctx);
            return;
        }
        let free = ctx.lev & !ctx.forced[t];
        let mut s: LabelSet = 0;
        loop {
            let c = ctx.forced[t] | s;
            // Choices at the deepest level must be non-empty.
            if !(ctx.deepest && c == 0) && self.check_incremental(t, c) {
                let saved = self.upsets[t];
                self.upsets[t] = saved | c;
                self.choose(d, t + 1, ctx);
                self.upsets[t] = saved;
            }
            s = s.wrapping_sub(free) & free;
            if s == 0 {
                break;
            }
        }
    }

    /// Incremental legality of adding `c` (the level slice) to shade `t`.
    /// Meets of the affected pairs lie at deeper, already fixed levels, so
    /// both verdicts are final.
    fn check_incremental(&self, t: usize, c: LabelSet) -> bool {
        if c == 0 {
            return true;
        }
        let l = self.l;
        let u_new = self.upsets[t] | c;
        // Within a shade, meets stay inside {0} ∪ the shade.
        let mut xs = c;
        while xs != 0 {
            let x = xs.trailing_zeros() as usize;
            xs &= xs - 1;
            let mut ys = u_new;
            while ys != 0 {
                let y = ys.trailing_zeros() as usize;
                ys &= ys - 1;
                let w = l.meet_unchecked(x, y);
                if w != 0 && u_new & (1 << w) == 0 {
                    return false;
                }
            }
        }
        // Elements common to two shades must meet above the bottom.
        for j in 0..self.m {
            if j == t {
                continue;
            }
            let inter = u_new & self.upsets[j];
            let mut xs = c & self.upsets[j];
            while xs != 0 {
                let x = xs.trailing_zeros() as usize;
                xs &= xs - 1;
                let mut ys = inter;
                while ys != 0 {
                    let y = ys.trailing_zeros() as usize;
                    ys &= ys - 1;
                    if x != y && l.meet_unchecked(x, y) == 0 {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn test_level(&mut self, d: usize, ctx: &LevelCtx) {
        if ctx.deepest && self.mode.wants_graded() && !child_is_graded(self.l, &self.upsets) {
            return;
        }
        let mut parts = [0u32; N_MAX];
        for (p, &u) in parts.iter_mut().zip(&self.upsets) {
            *p = u & ctx.lev;
        }
        let word = ctx.layout.pack(&parts[..self.m]);
        match level_min_test(word, &ctx.compiled, self.early_abort) {
            LevelVerdict::Reject => {}
            LevelVerdict::Accept { next_gens } => self.descend(d - 1, next_gens),
        }
    }
}

/// Counts the mode-filtered tree up to `n_max` elements.
pub fn enumerate(config: &EnumConfig) -> CountTable {
    enumerate_with_sink(config, &|_| {})
}

/// Like [`enumerate`], additionally passing every lattice of the tree (sizes
/// 2..=n_max) to `sink`.  Sink call order is unspecified; the set is
/// deterministic.
pub fn enumerate_with_sink(
    config: &EnumConfig,
    sink: &(dyn Fn(&LevelledLattice) + Sync),
) -> CountTable {
    assert!(
        (2..=N_MAX).contains(&config.n_max),
        "n_max {} out of range",
        config.n_max
    );
    let seed_size = if config.seed_size == 0 {
        config.n_max.min(12)
    } else {
        config.seed_size
    };
    let mut counts = vec![0u64; config.n_max + 1];
    counts[1] = 1; // the one-element lattice never enters the tree
    let mut work: Vec<(Arc<SearchNode>, usize)> = Vec::new();
    seed_expand(
        SearchNode::root(),
        config,
        seed_size,
        &mut counts,
        &mut work,
        sink,
    );
    if config.threads <= 1 || work.len() <= 1 {
        for (node, m) in work {
            children(&node, m, config.mode, config.early_abort, |child| {
                dfs(&child, config, &mut counts, sink)
            });
        }
    } else {
        let queue = Mutex::new(work);
        let totals = Mutex::new(&mut counts);
        std::thread::scope(|scope| {
            for _ in 0..config.threads {
                scope.spawn(|| {
                    let mut local = vec![0u64; config.n_max + 1];
                    loop {
                        let item = queue.lock().unwrap().pop();
                        match item {
                            None => break,
                            Some((node, m)) => {
                                children(&node, m, config.mode, config.early_abort, |child| {
                                    dfs(&child, config, &mut local, sink)
                                });
                            }
                        }
                    }
                    let mut totals = totals.lock().unwrap();
                    for (t, v) in totals.iter_mut().zip(&local) {
                        *t += v;
                    }
                });
            }
        });
    }
    CountTable {
        mode: config.mode,
        max_n: config.n_max,
        counts,
    }
}

/// Serial phase: produces and counts every node of size at most `seed_size`;
/// each remaining `(node, m)` extension becomes one work item.
fn seed_expand(
    node: SearchNode,
    config: &EnumConfig,
    seed_size: usize,
    counts: &mut [u64],
    work: &mut Vec<(Arc<SearchNode>, usize)>,
    sink: &(dyn Fn(&LevelledLattice) + Sync),
) {
    let n = node.lattice.n();
    counts[n] += 1;
    sink(&node.lattice);
    let mut shared: Option<Arc<SearchNode>> = None;
    for m in 1..=config.n_max - n {
        if n + m <= seed_size {
            children(&node, m, config.mode, config.early_abort, |child| {
                seed_expand(child, config, seed_size, counts, work, sink)
            });
        } else {
            let node = shared
                .get_or_insert_with(|| Arc::new(node.clone()))
                .clone();
            work.push((node, m));
        }
    }
}

fn dfs(
    node: &SearchNode,
    config: &EnumConfig,
    counts: &mut [u64],
    sink: &(dyn Fn(&LevelledLattice) + Sync),
) {
    let n = node.lattice.n();
    counts[n] += 1;
    sink(&node.lattice);
    for m in 1..=config.n_max - n {
        children(node, m, config.mode, config.early_abort, |child| {
            dfs(&child, config, counts, sink)
        });
    }
}

/// The vertical composition recurrence `u_1 = i_1`,
/// `u_n = i_n + Σ_{m=2}^{n-1} i_m · u_{n-m+1}`.
///
/// `i[n]` holds the count for size `n` (`i[0]` is ignored); returns `u` in the
/// same shape, or `None` on overflow.
pub fn compose_counts(i: &[u64]) -> Option<Vec<u64>> {
    assert!(i.len() >= 2 && i[1] == 1, "i_1 must be 1");
    let mut u = vec![0u64; i.len()];
    u[1] = i[1];
    for n in 2..i.len() {
        let mut acc = i[n];
        for m in 2..n {
            acc = acc.checked_add(i[m].checked_mul(u[n - m + 1])?)?;
        }
        u[n] = acc;
    }
    Some(u)
}

/// A raw timestamp-counter read where available; used only for the
/// informational cycles-per-lattice estimate.
pub fn cycle_counter() -> Option<u64> {
    #[cfg(target_arch = "x86_64")]
    {
        Some(unsafe { core::arch::x86_64::_rdtsc() })
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroup::group_closure;
    use crate::poset::fixtures::*;
    use std::collections::BTreeSet;

    fn child_set(node: &SearchNode, m: usize, mode: Mode) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        children(node, m, mode, true, |c| {
            c.lattice.validate().unwrap();
            assert!(out.insert(c.lattice.serialize()), "duplicate child");
        });
        out
    }

    fn node_of(l: &LevelledLattice) -> SearchNode {
        // Walk the tree to find the canonical node for a fixture.
        let mut found = None;
        let root = SearchNode::root();
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            if node.lattice == *l {
                found = Some(node);
                break;
            }
            let n = node.lattice.n();
            if n < l.n() {
                for m in 1..=l.n() - n {
                    children(&node, m, Mode::All, true, |c| stack.push(c));
                }
            }
        }
        found.expect("fixture is canonical")
    }

    #[test]
    fn mode_round_trips() {
        for mode in Mode::ALL_MODES {
            assert_eq!(mode.to_string().parse::<Mode>().unwrap(), mode);
        }
        assert!("ALL".parse::<Mode>().is_err());
    }

    #[test]
    fn children_of_root() {
        let root = SearchNode::root();
        let c1 = child_set(&root, 1, Mode::All);
        assert_eq!(c1, BTreeSet::from(["3|1|1".to_string()]));
        let c2 = child_set(&root, 2, Mode::All);
        assert_eq!(c2, BTreeSet::from(["4|2|1:1".to_string()]));
        // The 3-chain is vertically decomposable.
        assert!(child_set(&root, 1, Mode::Vi).is_empty());
        assert_eq!(child_set(&root, 2, Mode::Vi).len(), 1);
    }

    #[test]
    fn d4_node_has_full_stabiliser() {
        let node = node_of(&d4());
        let group = group_closure(&node.stab_gens, 4, 100).unwrap();
        assert_eq!(group.len(), 2);
    }

    #[test]
    fn children_of_d4() {
        let node = node_of(&d4());
        let all = child_set(&node, 1, Mode::All);
        assert_eq!(
            all,
            BTreeSet::from([n5().serialize(), d4b().serialize()])
        );
        let vi = child_set(&node, 1, Mode::Vi);
        assert_eq!(vi, BTreeSet::from([n5().serialize()]));
        let m2 = child_set(&node, 2, Mode::All);
        assert!(m2.contains(&h6().serialize()));
    }

    #[test]
    fn enumerate_small_all() {
        let t = enumerate(&EnumConfig::new(6, Mode::All));
        assert_eq!(&t.counts[1..], &[1, 1, 1, 2, 5, 15]);
    }

    #[test]
    fn enumerate_small_vi() {
        let t = enumerate(&EnumConfig::new(6, Mode::Vi));
        assert_eq!(&t.counts[1..], &[1, 1, 0, 1, 2, 7]);
    }

    #[test]
    fn enumerate_root_only() {
        for mode in Mode::ALL_MODES {
            let t = enumerate(&EnumConfig::new(2, mode));
            assert_eq!(&t.counts[1..], &[1, 1]);
        }
    }

    #[test]
    fn compose_examples() {
        let u = compose_counts(&[0, 1, 1, 0, 1, 2, 7]).unwrap();
        assert_eq!(&u[1..], &[1, 1, 1, 2, 5, 15]);
        let u = compose_counts(&[0, 1, 1, 0, 1, 2, 7, 27, 126]).unwrap();
        assert_eq!(u[7], 53);
        assert_eq!(u[8], 222);
    }

    #[test]
    fn compose_overflow_is_detected() {
        assert!(compose_counts(&[0, 1, u64::MAX, u64::MAX]).is_none());
    }

    #[test]
    fn compose_matches_all_mode() {
        let vi = enumerate(&EnumConfig::new(8, Mode::Vi));
        let all = enumerate(&EnumConfig::new(8, Mode::All));
        assert_eq!(compose_counts(&vi.counts).unwrap(), all.counts);
    }

    #[test]
    fn vi_graded_is_intersection_consistent() {
        // Every vi-graded count is bounded by both single-mode counts.
        let vi = enumerate(&EnumConfig::new(7, Mode::Vi));
        let graded = enumerate(&EnumConfig::new(7, Mode::Graded));
        let both = enumerate(&EnumConfig::new(7, Mode::ViGraded));
        for n in 2..=7 {
            assert!(both.counts[n] <= vi.counts[n].min(graded.counts[n]));
        }
    }

    #[test]
    fn threads_and_seed_size_do_not_change_counts() {
        let reference = enumerate(&EnumConfig::new(8, Mode::All));
        for (threads, seed_size) in [(1, 4), (2, 4), (8, 5), (3, 2)] {
            let mut config = EnumConfig::new(8, Mode::All);
            config.threads = threads;
            config.seed_size = seed_size;
            let t = enumerate(&config);
            assert_eq!(t.counts, reference.counts, "threads={threads} seed={seed_size}");
        }
    }

    #[test]
    fn early_abort_changes_nothing() {
        for mode in Mode::ALL_MODES {
            let mut config = EnumConfig::new(7, mode);
            let fast = enumerate(&config);
            config.early_abort = false;
            let slow = enumerate(&config);
            assert_eq!(fast.counts, slow.counts);
        }
    }

    #[test]
    fn sink_receives_every_node_once() {
        let seen = Mutex::new(Vec::<String>::new());
        let config = EnumConfig::new(6, Mode::All);
        let t = enumerate_with_sink(&config, &|l| {
            seen.lock().unwrap().push(l.serialize())
        });
        let seen = seen.into_inner().unwrap();
        let distinct: BTreeSet<&String> = seen.iter().collect();
        assert_eq!(distinct.len(), seen.len());
        let expected: u64 = t.counts[2..].iter().sum();
        assert_eq!(seen.len() as u64, expected);
    }

    #[test]
    fn table_formatting() {
        let t = enumerate(&EnumConfig::new(4, Mode::All));
        assert_eq!(
            format_count_table(&t),
            "# mode=all max_n=4\n1\t1\n2\t1\n3\t1\n4\t2\n"
        );
    }
}
