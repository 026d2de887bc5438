//! Generate the recursive C code for heat2d, build it, and compare with the interpreter.

use pcot::corpus;
use pcot::emitc::{self, EmitOptions};
use pcot::exec::{self, ExecOptions};
use pcot::memalloc::{affine_split, allocate};
use pcot::tiler::{TileSpec, TilingContext};

fn main() {
    let p = corpus::load("heat2d").unwrap();
    let params = [16, 64];
    let split = affine_split(&p, &params).unwrap();
    let maps = allocate(&split, &params).unwrap().maps();
    let bundle = emitc::emit(&split.prdg, &params, &maps, &EmitOptions::default()).unwrap();
    println!("{}: {} lines, {}: {} lines", bundle.header_name(), bundle.header.lines().count(), bundle.source_name(), bundle.source.lines().count());

    let Some(cc) = emitc::find_cc() else {
        println!("no C compiler found, skipping build");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let exe = emitc::build(&bundle, dir.path(), &cc, &[]).unwrap();
    let t = TileSpec::new(vec![8, 16, 16]).unwrap();
    let c = emitc::run_binary(&exe, &t.leaf, false).unwrap();
    let ctx = TilingContext::new(&split.prdg, &params).unwrap();
    let r = exec::run(&split.prdg, &params, &ctx.cot_order(&t).unwrap(), &maps, &ExecOptions::default(), None).unwrap();
    println!("compiled {:016x} interpreted {:016x}", c.checksum, r.checksum());
}
