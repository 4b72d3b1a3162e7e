//! Timing measures under the EMD kernel and the normalized 1-Wasserstein kernel.
//!
//!     cargo run --release --example compare_kernels

use chrono::DateTime;
use logdist::harness::compare_kernels;
use logdist::sim::{simulate, Scenario, SimulationConfig};

fn main() -> anyhow::Result<()> {
    let start = DateTime::parse_from_rfc3339("2022-05-02T00:00:00+00:00")?;
    let config = |seed| SimulationConfig::new(100, seed, start).with_arrival_seed(1);
    let alog = simulate(&Scenario::Gt.model(), &config(1))?;
    let glogs = [Scenario::Arr, Scenario::Cal]
        .iter()
        .map(|s| simulate(&s.model(), &config(2)))
        .collect::<Result<Vec<_>, _>>()?;

    let cmp = compare_kernels(&alog, &glogs)?;
    println!("EMD kernel (ARR, CAL)");
    print!("{}", cmp.emd.to_text());
    println!("\n1WD kernel (ARR, CAL)");
    print!("{}", cmp.wasserstein.to_text());
    Ok(())
}
