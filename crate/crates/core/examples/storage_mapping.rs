//! Split truly affine dependences out of the Jacobi kernel and fold its storage.

use pcot::corpus;
use pcot::memalloc::{affine_split, allocate, find_uov};
use pcot::poly::IntVec;

fn main() {
    let n: i64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let p = corpus::load("heat1d-fig7").unwrap();
    let split = affine_split(&p, &[n]).unwrap();
    for c in &split.copies {
        println!("copy {} of {} into {} ({} pieces)", c.id, c.source, c.array, c.pieces.len());
    }
    let alloc = allocate(&split, &[n]).unwrap();
    for a in &alloc.arrays {
        println!("{:>5}: {:<32} {} words", a.map.array, a.map.describe(), a.map.words());
    }
    let fp = alloc.footprint();
    let sa = alloc.single_assignment_footprint();
    println!("N={n}: {fp} words instead of {sa} ({:.0}x smaller)", sa as f64 / fp as f64);

    let stencil = [IntVec(vec![1, -1]), IntVec(vec![1, 0]), IntVec(vec![1, 1])];
    println!("occupancy vector of the 3-point stencil: {}", find_uov(&stencil).vector);
}
