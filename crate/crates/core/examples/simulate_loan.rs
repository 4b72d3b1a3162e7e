//! Simulates one loan scenario and writes the log as CSV.
//!
//!     cargo run --example simulate_loan -- [SCENARIO] [CASES] [OUT.csv]

use chrono::DateTime;
use logdist::event_log::write_log;
use logdist::sim::{simulate_detailed, Scenario, SimulationConfig};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let scenario: Scenario = args.next().as_deref().unwrap_or("GT").parse()?;
    let cases: usize = args.next().map(|c| c.parse()).transpose()?.unwrap_or(50);
    let out = args.next().unwrap_or_else(|| "loan.csv".into());

    let start = DateTime::parse_from_rfc3339("2022-05-02T00:00:00+00:00")?;
    let sim = simulate_detailed(&scenario.model(), &SimulationConfig::new(cases, 7, start))?;

    let busiest = sim
        .schedule
        .iter()
        .map(|s| (s.start - s.enabled).num_minutes())
        .max()
        .unwrap_or(0);
    println!(
        "{scenario}: {} cases, {} events",
        sim.log.num_cases(),
        sim.log.num_events()
    );
    println!("longest wait from enablement to start: {busiest} min");
    write_log(&sim.log, &out)?;
    println!("wrote {out}");
    Ok(())
}
