//! Log builders shared by unit tests.

use chrono::{DateTime, Duration, FixedOffset};

use crate::event_log::{Event, EventLog, Timestamp};

pub fn t0() -> Timestamp {
    DateTime::parse_from_rfc3339("2022-05-02T10:00:00+00:00").unwrap()
}

pub fn at(hours: f64) -> Timestamp {
    t0() + Duration::seconds((hours * 3600.0).round() as i64)
}

/// One case per trace; activity k of every case runs during hour k after [`t0`].
pub fn log_from_traces(traces: &[&[&str]]) -> EventLog {
    let mut events = Vec::new();
    for (case, trace) in traces.iter().enumerate() {
        for (k, activity) in trace.iter().enumerate() {
            events.push(
                Event::new(
                    format!("{case:04}"),
                    *activity,
                    at(k as f64),
                    at(k as f64 + 0.5),
                )
                .unwrap(),
            );
        }
    }
    EventLog::new(events)
}

/// Events given as (case, activity, start hour, end hour) offsets from [`t0`].
pub fn log_from_hours(rows: &[(&str, &str, f64, f64)]) -> EventLog {
    log_from_hours_with_offset(rows, 0)
}

pub fn log_from_hours_with_offset(rows: &[(&str, &str, f64, f64)], offset_secs: i32) -> EventLog {
    let offset = FixedOffset::east_opt(offset_secs).unwrap();
    EventLog::new(
        rows.iter()
            .map(|&(case, activity, s, e)| {
                Event::new(
                    case,
                    activity,
                    at(s).with_timezone(&offset),
                    at(e).with_timezone(&offset),
                )
                .unwrap()
            })
            .collect(),
    )
}
