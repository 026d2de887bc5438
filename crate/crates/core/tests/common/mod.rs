#![allow(dead_code)]

use std::collections::BTreeMap;

use pcot::corpus;
use pcot::kernel::{parse_kernel, Prdg};
use pcot::tiler::TileSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Desk-scale parameter bindings for every builtin kernel.
pub const DESK: [(&str, &[(&str, i64)]); 7] = [
    ("heat1d-fig7", &[("N", 64)]),
    ("heat1d", &[("N", 64)]),
    ("heat2d", &[("T", 16), ("N", 64)]),
    ("heat3d", &[("T", 8), ("N", 24)]),
    ("triangle", &[("N", 32)]),
    ("lud", &[("N", 48)]),
    ("osp", &[("N", 48)]),
];

pub fn load_at(name: &str, binding: &[(&str, i64)]) -> (Prdg, Vec<i64>) {
    let p = corpus::load(name).unwrap();
    let over: BTreeMap<String, i64> = binding.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let params = p.param_values(&over).unwrap();
    (p, params)
}

/// `count` tile specs over the band, sizes in `1..=max`, fixed seed.
pub fn sample_tiles(p: &Prdg, count: usize, max: i64, seed: u64) -> Vec<TileSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| TileSpec::new((0..p.tilable_band.len()).map(|_| rng.gen_range(1..=max)).collect()).unwrap())
        .collect()
}

pub const RECT: &str = r#"{"name": "rect", "params": ["N"], "indices": ["i", "j"],
    "arrays": [{"name": "X", "rank": 2, "extents": ["N", "N"], "role": "output"}],
    "statements": [{"id": "S", "domain": ["i >= 0", "i <= N - 1", "j >= 0", "j <= N - 1"],
                    "writes": {"array": "X", "subscripts": ["i", "j"]}, "body": "1.0"}],
    "tilable_band": [0, 1]}"#;

/// One producer read through two truly affine edges (both boundary
/// columns of the previous row).
pub const TWO_EDGE: &str = r#"{"name": "two-edge", "params": ["N"], "defaults": {"N": 6},
    "indices": ["t", "i"],
    "arrays": [{"name": "A", "rank": 1, "extents": ["N"], "role": "input"},
               {"name": "X", "rank": 2, "extents": ["N", "N"], "role": "temp"},
               {"name": "Out", "rank": 1, "extents": ["N"], "role": "output"}],
    "statements": [
      {"id": "S0", "domain": ["t >= 0", "t <= N - 1", "i >= 0", "i <= N - 1"],
       "writes": {"array": "X", "subscripts": ["t", "i"]},
       "body": "t >= 1 ? 0.5 * X[t - 1, i] + 0.25 * X[t - 1, 0] + 0.25 * X[t - 1, N - 1] : A[i]"},
      {"id": "S1", "domain": ["t == N", "i >= 0", "i <= N - 1"],
       "writes": {"array": "Out", "subscripts": ["i"]}, "body": "X[t - 1, i]"}],
    "edges": [
      {"src": "S0", "dst": "S0", "read": 0, "context": ["t >= 1"], "fn": ["t - 1", "i"]},
      {"src": "S0", "dst": "S0", "read": 1, "context": ["t >= 1"], "fn": ["t - 1", "0"]},
      {"src": "S0", "dst": "S0", "read": 2, "context": ["t >= 1"], "fn": ["t - 1", "N - 1"]},
      {"src": "S1", "dst": "S0", "read": 0, "context": [], "fn": ["t - 1", "i"]}],
    "tilable_band": [0]}"#;

pub fn two_edge() -> Prdg {
    parse_kernel(TWO_EDGE).unwrap()
}

pub fn rect() -> Prdg {
    parse_kernel(RECT).unwrap()
}
