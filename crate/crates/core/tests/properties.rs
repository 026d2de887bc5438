use pcot::cachesim::{simulate, CacheConfig, LevelConfig};
use pcot::corpus;
use pcot::kernel::{parse_kernel, print_kernel};
use pcot::memalloc::{check_uov, find_uov_bounded};
use pcot::poly::{IntVec, OrthantBox};
use pcot::tiler::{pad_box, TileSpec};
use proptest::prelude::*;

fn trace() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0u64..1 << 14, 1..3000)
}

fn level(capacity: u64, ways: u64) -> CacheConfig {
    CacheConfig::new(vec![LevelConfig { capacity, ways }], 64).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn padded_box_covers_and_is_minimal(b in prop::collection::vec(1i64..40, 1..4), n in prop::collection::vec(1i64..500, 3)) {
        let d = b.len();
        let bx = OrthantBox::new(IntVec(vec![0; d]), IntVec(n[..d].to_vec()));
        let pb = pad_box(&bx, &TileSpec::new(b.clone()).unwrap());
        for k in 0..d {
            prop_assert_eq!(pb.bx.size[k], b[k] << pb.levels[k]);
            prop_assert!(pb.bx.size[k] >= n[k]);
            prop_assert!(pb.levels[k] == 0 || b[k] << (pb.levels[k] - 1) < n[k]);
        }
    }

    #[test]
    fn more_ways_at_fixed_set_count_never_miss_more(t in trace(), sets in prop::sample::select(vec![1u64, 2, 8, 32]), w in 1u64..8) {
        let few = simulate(t.iter().copied(), &level(64 * sets * w, w));
        let more = simulate(t.iter().copied(), &level(64 * sets * (w + 1), w + 1));
        prop_assert!(more.misses[0] <= few.misses[0]);
    }

    #[test]
    fn larger_fully_associative_cache_never_misses_more(t in trace(), k in 1u64..8) {
        let small = simulate(t.iter().copied(), &level(64 * k, 0));
        let big = simulate(t.iter().copied(), &level(128 * k, 0));
        prop_assert!(big.misses[0] <= small.misses[0]);
    }

    #[test]
    fn found_occupancy_vectors_pass_the_checker(deps in prop::collection::vec((1i64..3, -2i64..3), 1..4)) {
        let deps: Vec<IntVec> = deps.into_iter().map(|(a, b)| IntVec(vec![a, b])).collect();
        let r = find_uov_bounded(&deps, 8);
        if r.valid {
            prop_assert!(check_uov(&r.vector, &deps, 16));
            prop_assert!(r.vector.l1_norm() <= 8);
        }
        // The sum of all dependences is always a UOV.
        let sum = deps.iter().fold(IntVec(vec![0, 0]), |a, d| a.checked_add(d).unwrap());
        prop_assert!(check_uov(&sum, &deps, 16));
        if sum.l1_norm() <= 8 {
            prop_assert!(r.valid && r.vector.l1_norm() <= sum.l1_norm());
        }
    }

    #[test]
    fn cache_spec_round_trips(l1 in 1u64..64, w1 in 0u64..9, l2 in 1u64..8, line in prop::sample::select(vec![32u64, 64, 128])) {
        let spec = format!("{l1}K:{w1},{l2}M:16@{line}");
        if let Ok(cfg) = CacheConfig::parse_spec(&spec) {
            let again = CacheConfig::parse_spec(&cfg.to_string()).unwrap();
            prop_assert_eq!(cfg, again);
        }
    }
}

#[test]
fn kernels_print_and_parse_back() {
    for name in corpus::NAMES {
        let p = corpus::load(name).unwrap();
        let q = parse_kernel(&print_kernel(&p)).unwrap();
        assert_eq!(print_kernel(&p), print_kernel(&q), "{name}");
    }
}
