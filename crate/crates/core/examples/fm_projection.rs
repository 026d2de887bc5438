//! Fourier-Motzkin projection of a parametric triangle onto its first index.

use pcot::poly::Domain;

fn main() {
    // Rows are coefficients over (i, j, N, 1), each meaning `row . (i, j, N, 1) >= 0`.
    let tri = Domain::new(
        2,
        1,
        vec![
            vec![1, 0, 0, 0],   // i >= 0
            vec![-1, 1, 0, 0],  // j >= i
            vec![0, -1, 1, -1], // j <= N - 1
        ],
    )
    .unwrap();
    let n = 6;
    println!("points at N={n}: {}", tri.enumerate(&[n]).unwrap().len());
    println!("bounding box at N={n}: {}", tri.bounding_box(&[n]).unwrap());

    let only_i = tri.fm_project(&[1]).unwrap();
    println!("after eliminating j:");
    for row in &only_i.rows {
        println!("  {row:?}");
    }
    println!("range of i + j: {:?}", tri.affine_range(&[1, 1, 0, 0], &[n]).unwrap());
}
