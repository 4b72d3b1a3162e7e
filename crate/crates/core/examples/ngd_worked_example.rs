//! N-gram distance on two tiny logs, printed next to the 2-gram histograms.
//!
//!     cargo run --example ngd_worked_example

use chrono::{DateTime, Duration};
use logdist::control_flow::{ngd, ngram_histogram};
use logdist::event_log::{Event, EventLog};

fn log(traces: &[&[&str]]) -> EventLog {
    let t0 = DateTime::parse_from_rfc3339("2022-05-02T09:00:00+00:00").unwrap();
    let mut events = vec![];
    for (k, trace) in traces.iter().enumerate() {
        for (i, activity) in trace.iter().enumerate() {
            let start = t0 + Duration::hours(i as i64);
            events.push(
                Event::new(
                    format!("case-{k}"),
                    *activity,
                    start,
                    start + Duration::minutes(30),
                )
                .unwrap(),
            );
        }
    }
    EventLog::new(events)
}

fn main() -> anyhow::Result<()> {
    let a = log(&[&["A", "B", "C", "D"], &["A", "B", "C", "D"]]);
    let b = log(&[&["A", "C", "B", "D"], &["A", "B", "C", "D"]]);

    for (name, l) in [("reference", &a), ("candidate", &b)] {
        println!("{name}:");
        for (gram, count) in ngram_histogram(l, 2)?.counts() {
            println!("  {} x{count}", gram.join(" "));
        }
    }
    for n in 2..=4 {
        println!("NGD n={n}: {:.4}", ngd(&a, &b, n)?);
    }
    Ok(())
}
