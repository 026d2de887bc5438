//! Off-chip accesses over a grid of tile shapes, as CSV.

use pcot::cachesim::{parse_grid, sweep, CacheConfig, Storage};
use pcot::corpus;
use pcot::tiler::Scheme;

fn main() {
    let p = corpus::load("heat2d").unwrap();
    let params = [16, 96];
    let tiles = parse_grid("4,8,16", 3).unwrap();
    let cfg = CacheConfig::resolve("64K:8").unwrap();
    let table = sweep(&p, &params, &tiles, &[Scheme::Slt, Scheme::Cot], &cfg, Storage::Allocated).unwrap();
    print!("{}", table.to_csv());
}
