//! Feed the address trace of a run straight into a three-level LRU hierarchy.

use pcot::cachesim::{Cache, CacheConfig};
use pcot::corpus;
use pcot::exec::{self, ExecOptions};
use pcot::memalloc::{affine_split, allocate};
use pcot::tiler::{Scheme, TileSpec, TilingContext};

fn main() {
    let p = corpus::load("heat2d").unwrap();
    let params = [16, 128];
    let split = affine_split(&p, &params).unwrap();
    let maps = allocate(&split, &params).unwrap().maps();
    let ctx = TilingContext::new(&split.prdg, &params).unwrap();
    let cfg = CacheConfig::resolve("32K:8,256K:8@64").unwrap();
    let t = TileSpec::new(vec![8, 16, 16]).unwrap();
    for scheme in [Scheme::Untiled, Scheme::Slt, Scheme::Cot] {
        let order = ctx.order(scheme, Some(&t)).unwrap();
        let mut cache = Cache::new(&cfg);
        exec::run(&split.prdg, &params, &order, &maps, &ExecOptions::default(), Some(&mut cache)).unwrap();
        let s = cache.into_stats();
        println!("{scheme:>7}: accesses {} l1 misses {} l2 misses {}", s.accesses, s.misses[0], s.misses[1]);
    }
}
