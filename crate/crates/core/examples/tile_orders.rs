//! Leaf order of cache-oblivious tiling next to square-loop tiling on a 16x16 nest.

use pcot::kernel::parse_kernel;
use pcot::tiler::{linearize_wavefront, TileSpec, TilingContext};

const SQUARE: &str = r#"{"name": "square", "params": ["N"], "indices": ["i", "j"],
    "arrays": [{"name": "X", "rank": 2, "extents": ["N", "N"], "role": "output"}],
    "statements": [{"id": "S", "domain": ["i >= 0", "i <= N - 1", "j >= 0", "j <= N - 1"],
                    "writes": {"array": "X", "subscripts": ["i", "j"]}, "body": "1.0"}],
    "tilable_band": [0, 1]}"#;

fn grid(order: &pcot::tiler::TileOrder) -> [[usize; 4]; 4] {
    let mut g = [[0; 4]; 4];
    for (k, leaf) in order.leaves.iter().enumerate() {
        g[(leaf.origin[0] / 4) as usize][(leaf.origin[1] / 4) as usize] = k;
    }
    g
}

fn main() {
    let p = parse_kernel(SQUARE).unwrap();
    let ctx = TilingContext::new(&p, &[16]).unwrap();
    let t = TileSpec::new(vec![4, 4]).unwrap();
    let cot = ctx.cot_order(&t).unwrap();
    for (label, order) in [("slt", ctx.slt_order(&t).unwrap()), ("cot", cot.clone())] {
        println!("{label} visit position per tile:");
        for row in grid(&order) {
            println!("  {}", row.map(|k| format!("{k:>2}")).join(" "));
        }
    }
    println!("cot recursion nodes: {}", cot.nodes);
    println!("one wavefront linearization:");
    print!("{}", linearize_wavefront(&cot, 7).dump());
}
