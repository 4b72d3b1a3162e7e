//! Builds a two-step model in code, round-trips it through JSON and simulates it.
//!
//!     cargo run --example custom_model

use chrono::DateTime;
use logdist::sim::{
    simulate, weekly_windows, Activity, ArrivalModel, BpsModel, DurationDistribution, Edge, Node,
    NodeKind, ResourcePool, SimulationConfig, Weekday,
};

fn edge(from: &str, to: &str) -> Edge {
    Edge {
        from: from.into(),
        to: to.into(),
        probability: None,
    }
}

fn main() -> anyhow::Result<()> {
    let task = |label: &str, minutes: f64| Activity {
        label: label.into(),
        duration: DurationDistribution::exponential(minutes * 60.0),
        pool: "staff".into(),
        timer: None,
    };
    let node = |id: &str, kind| Node {
        id: id.into(),
        kind,
    };
    let model = BpsModel {
        name: "triage".into(),
        activities: vec![task("Register", 5.0), task("Treat", 40.0)],
        nodes: vec![
            node("start", NodeKind::Start),
            node(
                "register",
                NodeKind::Activity {
                    activity: "Register".into(),
                },
            ),
            node(
                "treat",
                NodeKind::Activity {
                    activity: "Treat".into(),
                },
            ),
            node("end", NodeKind::End),
        ],
        edges: vec![
            edge("start", "register"),
            edge("register", "treat"),
            edge("treat", "end"),
        ],
        arrival: ArrivalModel {
            inter_arrival: DurationDistribution::exponential(900.0),
            first_arrival: None,
        },
        pools: vec![ResourcePool {
            id: "staff".into(),
            size: 3,
            calendar: weekly_windows(&Weekday::ALL, "08:00", "20:00"),
        }],
    };

    let json = model.to_json();
    let model = BpsModel::from_json(&json)?;
    println!("{json}");

    let start = DateTime::parse_from_rfc3339("2022-05-02T08:00:00+01:00")?;
    let log = simulate(&model, &SimulationConfig::new(20, 3, start))?;
    let mean = log.cycle_times().iter().sum::<i64>() as f64 / log.num_cases() as f64 / 60.0;
    println!("{} cases, mean cycle time {mean:.1} min", log.num_cases());
    Ok(())
}
