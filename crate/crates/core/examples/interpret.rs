//! Execute a kernel in tiled order with the dependence oracle watching every access.

use pcot::corpus;
use pcot::exec::{self, check_coverage, ExecOptions};
use pcot::memalloc::{affine_split, allocate};
use pcot::tiler::{TileSpec, TilingContext};

fn main() {
    let p = corpus::load("heat2d").unwrap();
    let params = [8, 32];
    let split = affine_split(&p, &params).unwrap();
    let maps = allocate(&split, &params).unwrap().maps();
    let ctx = TilingContext::new(&split.prdg, &params).unwrap();
    let t = TileSpec::new(vec![4, 8, 8]).unwrap();
    let opts = ExecOptions { oracle: true, record_points: true };

    let reference = exec::run(&split.prdg, &params, &ctx.untiled_order(), &[], &opts, None).unwrap();
    let tiled = exec::run(&split.prdg, &params, &ctx.cot_order(&t).unwrap(), &maps, &opts, None).unwrap();
    check_coverage(&split.prdg, &params, &tiled).unwrap();
    println!("points {} violations {}", tiled.points_executed, tiled.violation_count);
    println!("untiled, full storage   {:016x}", reference.checksum());
    println!("cot {t}, folded storage {:016x}", tiled.checksum());
}
