use proptest::prelude::*;

use lattice_enum::canonical::BitLayout;
use lattice_enum::permgroup::{benes_compile, permute_bits};
use lattice_enum::{enumerate, EnumConfig, LevelledLattice, Mode};

fn arb_perm(width: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..width).collect::<Vec<usize>>()).prop_shuffle()
}

proptest! {
    #[test]
    fn benes_equals_direct_permutation(
        perm in (1usize..=128).prop_flat_map(arb_perm),
        word in any::<u128>(),
    ) {
        let width = perm.len();
        let live = if width == 128 { u128::MAX } else { (1u128 << width) - 1 };
        let net = benes_compile(&perm, width).unwrap();
        prop_assert_eq!(net.apply(word & live), permute_bits(word & live, &perm));
    }

    #[test]
    fn packed_comparison_is_lexicographic(
        a in proptest::collection::vec(0u32..16, 3),
        b in proptest::collection::vec(0u32..16, 3),
    ) {
        let layout = BitLayout { base: 2, width: 4, n: 6, m: 3 };
        let pa: Vec<u32> = a.iter().map(|x| x << 2).collect();
        let pb: Vec<u32> = b.iter().map(|x| x << 2).collect();
        prop_assert_eq!(layout.pack(&pa).cmp(&layout.pack(&pb)), pa.cmp(&pb));
    }
}

#[test]
fn emitted_lattices_round_trip() {
    let config = EnumConfig::new(7, Mode::All);
    let seen = std::sync::Mutex::new(Vec::new());
    lattice_enum::enumerate_with_sink(&config, &|l| {
        seen.lock().unwrap().push(l.serialize());
    });
    for line in seen.into_inner().unwrap() {
        let l = LevelledLattice::deserialize(&line).unwrap();
        l.validate().unwrap();
        assert_eq!(l.serialize(), line);
    }
}

#[test]
fn count_tables_nest_by_max_n() {
    // Counts for a smaller bound are a prefix of counts for a larger one.
    for mode in Mode::ALL_MODES {
        let big = enumerate(&EnumConfig::new(8, mode));
        for n_max in 2..8 {
            let small = enumerate(&EnumConfig::new(n_max, mode));
            assert_eq!(small.counts[..], big.counts[..=n_max]);
        }
    }
}
