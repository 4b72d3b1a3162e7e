//! Event-log data model and CSV ingestion.
//!
//! An [`EventLog`] is an immutable multiset of activity instances ([`Event`]s),
//! indexed by case. Timestamps keep their original UTC offset so calendar
//! fields (weekday, hour of day) can be read in the local civil time the
//! events were recorded in.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, FixedOffset, NaiveDateTime, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute instant plus the UTC offset it was recorded with.
pub type Timestamp = DateTime<FixedOffset>;

/// Label reserved for the padding activity used by n-gram histograms.
pub const DUMMY_ACTIVITY: &str = "\u{22A5}";

/// Serialization format used by [`write_log`].
pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S%:z";

/// One executed activity instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    case_id: String,
    activity: String,
    start: Timestamp,
    end: Timestamp,
}

impl Event {
    /// Builds an event, truncating both timestamps to whole seconds.
    pub fn new(
        case_id: impl Into<String>,
        activity: impl Into<String>,
        start: Timestamp,
        end: Timestamp,
    ) -> Result<Self> {
        let activity = activity.into();
        if activity.is_empty() {
            return Err(Error::InvalidEvent("empty activity label".into()));
        }
        if activity == DUMMY_ACTIVITY {
            return Err(Error::InvalidEvent(format!(
                "activity label `{DUMMY_ACTIVITY}` is reserved"
            )));
        }
        let start = truncate_to_second(start);
        let end = truncate_to_second(end);
        if start > end {
            return Err(Error::InvalidEvent(format!(
                "start {} is after end {}",
                start.format(TIMESTAMP_FORMAT),
                end.format(TIMESTAMP_FORMAT)
            )));
        }
        Ok(Self {
            case_id: case_id.into(),
            activity,
            start,
            end,
        })
    }

    pub fn case_id(&self) -> &str {
        &self.case_id
    }

    pub fn activity(&self) -> &str {
        &self.activity
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    pub fn end(&self) -> Timestamp {
        self.end
    }

    /// Both timestamps of the event, start first.
    pub fn timestamps(&self) -> [Timestamp; 2] {
        [self.start, self.end]
    }

    fn order_key(&self) -> (i64, i64, &str) {
        (
            self.start.timestamp(),
            self.end.timestamp(),
            self.activity.as_str(),
        )
    }
}

fn truncate_to_second(ts: Timestamp) -> Timestamp {
    ts.with_nanosecond(0).unwrap_or(ts)
}

/// Activity sequence of one case, timestamps abstracted away.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub case_id: String,
    pub activities: Vec<String>,
}

/// An immutable collection of events with a per-case index.
///
/// Within a case, events are ordered by start, then end, then activity label.
/// Cases iterate in lexicographic order of their identifiers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    events: Vec<Event>,
    cases: BTreeMap<String, Vec<usize>>,
}

impl EventLog {
    pub fn new(events: Vec<Event>) -> Self {
        let mut cases: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (idx, event) in events.iter().enumerate() {
            cases.entry(event.case_id.clone()).or_default().push(idx);
        }
        for indices in cases.values_mut() {
            // stable sort keeps insertion order for fully identical rows
            indices.sort_by(|&a, &b| events[a].order_key().cmp(&events[b].order_key()));
        }
        Self { events, cases }
    }

    /// Events in insertion (file) order.
    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn num_events(&self) -> usize {
        self.events.len()
    }

    pub fn num_cases(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn case_ids(&self) -> impl Iterator<Item = &str> {
        self.cases.keys().map(String::as_str)
    }

    /// Events of one case in trace order.
    pub fn case_events<'a>(
        &'a self,
        case_id: &str,
    ) -> Result<impl Iterator<Item = &'a Event> + 'a> {
        let indices = self
            .cases
            .get(case_id)
            .ok_or_else(|| Error::UnknownCase(case_id.to_string()))?;
        Ok(indices.iter().map(move |&i| &self.events[i]))
    }

    /// Iterates over cases as (case id, events in trace order).
    pub fn cases(&self) -> impl Iterator<Item = (&str, Vec<&Event>)> {
        self.cases
            .iter()
            .map(move |(id, idx)| (id.as_str(), idx.iter().map(|&i| &self.events[i]).collect()))
    }

    /// One trace per case, sorted by case id.
    pub fn traces(&self) -> Vec<Trace> {
        self.cases
            .iter()
            .map(|(id, idx)| Trace {
                case_id: id.clone(),
                activities: idx
                    .iter()
                    .map(|&i| self.events[i].activity.clone())
                    .collect(),
            })
            .collect()
    }

    /// Earliest start timestamp of the case.
    pub fn case_arrival(&self, case_id: &str) -> Result<Timestamp> {
        let indices = self
            .cases
            .get(case_id)
            .ok_or_else(|| Error::UnknownCase(case_id.to_string()))?;
        Ok(arrival_of(indices.iter().map(|&i| &self.events[i])))
    }

    /// Latest end minus earliest start of the case, in seconds.
    pub fn cycle_time(&self, case_id: &str) -> Result<i64> {
        let indices = self
            .cases
            .get(case_id)
            .ok_or_else(|| Error::UnknownCase(case_id.to_string()))?;
        Ok(cycle_time_of(indices.iter().map(|&i| &self.events[i])))
    }

    /// Arrival instant of every case, in case-id order.
    pub fn arrivals(&self) -> Vec<Timestamp> {
        self.cases
            .values()
            .map(|idx| arrival_of(idx.iter().map(|&i| &self.events[i])))
            .collect()
    }

    /// Cycle time (seconds) of every case, in case-id order.
    pub fn cycle_times(&self) -> Vec<i64> {
        self.cases
            .values()
            .map(|idx| cycle_time_of(idx.iter().map(|&i| &self.events[i])))
            .collect()
    }
}

fn arrival_of<'a>(events: impl Iterator<Item = &'a Event>) -> Timestamp {
    events
        .map(|e| e.start)
        .min_by_key(|ts| ts.timestamp())
        .expect("cases always hold at least one event")
}

fn cycle_time_of<'a>(events: impl Iterator<Item = &'a Event>) -> i64 {
    let (lo, hi) = events.fold((i64::MAX, i64::MIN), |(lo, hi), e| {
        (lo.min(e.start.timestamp()), hi.max(e.end.timestamp()))
    });
    hi - lo
}

/// Names of the CSV columns holding each event attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMapping {
    pub case_id: String,
    pub activity: String,
    pub start: String,
    pub end: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            case_id: "case_id".into(),
            activity: "activity".into(),
            start: "start_time".into(),
            end: "end_time".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FormatOptions {
    /// strptime-style pattern; `None` accepts ISO-8601 / RFC 3339.
    pub timestamp_format: Option<String>,
    pub delimiter: u8,
}

impl Default for FormatOptions {
    fn default() -> Self {
        Self {
            timestamp_format: None,
            delimiter: b',',
        }
    }
}

/// Parses a timestamp; inputs without an offset are taken as UTC.
pub fn parse_timestamp(raw: &str, format: Option<&str>) -> Option<Timestamp> {
    let raw = raw.trim();
    let utc = FixedOffset::east_opt(0).expect("zero offset");
    match format {
        Some(fmt) => DateTime::parse_from_str(raw, fmt).ok().or_else(|| {
            NaiveDateTime::parse_from_str(raw, fmt)
                .ok()
                .map(|naive| naive.and_utc().with_timezone(&utc))
        }),
        None => DateTime::parse_from_rfc3339(raw)
            .ok()
            .or_else(|| DateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S%.f%:z").ok())
            .or_else(|| DateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S%.f%z").ok())
            .or_else(|| {
                ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"]
                    .iter()
                    .find_map(|fmt| NaiveDateTime::parse_from_str(raw, fmt).ok())
                    .map(|naive| naive.and_utc().with_timezone(&utc))
            })
            .or_else(|| {
                raw.parse::<DateTime<Utc>>()
                    .ok()
                    .map(|ts| ts.with_timezone(&utc))
            }),
    }
}

/// Reads an event log from a CSV file.
pub fn read_log(
    path: impl AsRef<Path>,
    mapping: &ColumnMapping,
    options: &FormatOptions,
) -> Result<EventLog> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_log_from(file, path, mapping, options)
}

/// Reads an event log from any CSV source; `source` names it in error messages.
pub fn read_log_from<R: Read>(
    reader: R,
    source: impl AsRef<Path>,
    mapping: &ColumnMapping,
    options: &FormatOptions,
) -> Result<EventLog> {
    let source = source.as_ref().to_path_buf();
    let mut csv = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    let column = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn {
                path: source.clone(),
                column: name.to_string(),
            })
    };
    let case_col = column(&mapping.case_id)?;
    let activity_col = column(&mapping.activity)?;
    let start_col = column(&mapping.start)?;
    let end_col = column(&mapping.end)?;
    let format = options.timestamp_format.as_deref();

    let mut events = Vec::new();
    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let row_error = |message: String| Error::Row {
            path: source.clone(),
            line,
            message,
        };
        let field = |idx: usize| record.get(idx).unwrap_or("");
        let timestamp = |idx: usize, what: &str| {
            parse_timestamp(field(idx), format)
                .ok_or_else(|| row_error(format!("unparseable {what} timestamp `{}`", field(idx))))
        };
        let start = timestamp(start_col, "start")?;
        let end = timestamp(end_col, "end")?;
        let event = Event::new(
            field(case_col).trim(),
            field(activity_col).trim(),
            start,
            end,
        )
        .map_err(|e| row_error(e.to_string()))?;
        events.push(event);
    }
    Ok(EventLog::new(events))
}

/// Writes a log as CSV with the default column names and ISO-8601 timestamps.
pub fn write_log(log: &EventLog, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: PathBuf::from(path),
        source,
    })?;
    write_log_to(log, file)
}

pub fn write_log_to<W: Write>(log: &EventLog, writer: W) -> Result<()> {
    let mapping = ColumnMapping::default();
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record([
        &mapping.case_id,
        &mapping.activity,
        &mapping.start,
        &mapping.end,
    ])?;
    for event in log.events() {
        csv.write_record([
            event.case_id.as_str(),
            event.activity.as_str(),
            &event.start.format(TIMESTAMP_FORMAT).to_string(),
            &event.end.format(TIMESTAMP_FORMAT).to_string(),
        ])?;
    }
    csv.flush().map_err(|source| Error::Io {
        path: PathBuf::from("<writer>"),
        source,
    })?;
    Ok(())
}
