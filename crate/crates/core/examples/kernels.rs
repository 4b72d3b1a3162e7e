//! The four distance kernels on small inputs.
//!
//!     cargo run --example kernels

use logdist::kernels::{
    dl_distance, dl_distance_normalized, emd_1d, optimal_assignment, surplus_penalty,
    wasserstein_1, CostMatrix, Histogram1D,
};

fn main() -> anyhow::Result<()> {
    let x = Histogram1D::new(0, vec![2.0, 0.0, 1.0])?;
    let y = Histogram1D::new(1, vec![1.0, 1.0, 1.0, 1.0])?;
    println!("EMD                 {}", emd_1d(&x, &y));
    println!("surplus penalty     {}", surplus_penalty(&x, &y));
    println!("W1 (normalized)     {:.4}", wasserstein_1(&x, &y)?);

    let (p, q) = ("ABCD".as_bytes(), "ACBD".as_bytes());
    println!(
        "DL(ABCD, ACBD)      {} ({:.2} normalized)",
        dl_distance(p, q),
        dl_distance_normalized(p, q)
    );

    let cost = CostMatrix::new(vec![
        vec![4.0, 1.0, 3.0],
        vec![2.0, 0.0, 5.0],
        vec![3.0, 2.0, 2.0],
    ])?;
    let best = optimal_assignment(&cost);
    println!(
        "assignment          {:?} total {}",
        best.permutation, best.total
    );
    Ok(())
}
