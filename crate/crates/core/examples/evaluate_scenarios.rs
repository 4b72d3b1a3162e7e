//! Runs the eight loan scenarios against a GT reference log and prints the
//! result table plus the NGD/CFLD rank agreement.
//!
//!     cargo run --release --example evaluate_scenarios -- [seed] [runs] [cases]

use logdist::harness::{evaluate_scenarios, kendall_tau_b, MeasureId, SuiteConfig};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>());
    let defaults = SuiteConfig::default();
    let config = SuiteConfig {
        seed: args.next().transpose()?.unwrap_or(defaults.seed),
        runs: args
            .next()
            .transpose()?
            .map_or(defaults.runs, |v| v as usize),
        cases: args
            .next()
            .transpose()?
            .map_or(defaults.cases, |v| v as usize),
        ..defaults
    };

    let started = std::time::Instant::now();
    let report = evaluate_scenarios(&config, &MeasureId::DEFAULTS)?;
    print!("{}", report.to_text());

    let ngd: Vec<f64> = report.means("NGD").into_iter().flatten().collect();
    let cfld: Vec<f64> = report.means("CFLD").into_iter().flatten().collect();
    if let Some(tau) = kendall_tau_b(&ngd, &cfld) {
        println!("Kendall tau-b (NGD vs CFLD): {tau:.3}");
    }
    println!("elapsed: {:.1?}", started.elapsed());
    Ok(())
}
