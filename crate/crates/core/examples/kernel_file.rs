//! Load a built-in kernel, check it, and print it back in the kernel file format.

use std::collections::BTreeMap;

use pcot::corpus;
use pcot::kernel::{check_dependences_sampled, print_kernel};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "heat1d".into());
    let p = corpus::load(&name).unwrap();
    let params = p.param_values(&BTreeMap::new()).unwrap();
    println!("{}: {} statements, {} edges, band {:?}", p.name, p.statements.len(), p.edges.len(), p.tilable_band);
    println!("instances at defaults: {}", p.instance_count(&params).unwrap());

    let small: Vec<i64> = params.iter().map(|&v| v.min(8)).collect();
    let report = check_dependences_sampled(&p, &small).unwrap();
    println!("dependence check at {small:?}: {}", if report.is_clean() { "clean" } else { "problems" });
    print!("{}", print_kernel(&p));
}
