//! Weekly working calendars and working-time arithmetic.
//!
//! Instants are UTC seconds since the Unix epoch; windows are expressed in
//! the local civil time given by a fixed UTC offset.

use std::fmt;

use serde::{Deserialize, Serialize};

pub const SECONDS_PER_DAY: i64 = 86_400;
pub const SECONDS_PER_WEEK: i64 = 7 * SECONDS_PER_DAY;

/// 1970-01-05, the first Monday after the epoch.
const FIRST_MONDAY: i64 = 4 * SECONDS_PER_DAY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Weekday {
    Mon,
    Tue,
    Wed,
    Thu,
    Fri,
    Sat,
    Sun,
}

impl Weekday {
    pub const ALL: [Weekday; 7] = [
        Weekday::Mon,
        Weekday::Tue,
        Weekday::Wed,
        Weekday::Thu,
        Weekday::Fri,
        Weekday::Sat,
        Weekday::Sun,
    ];
    pub const WORKDAYS: [Weekday; 5] = [
        Weekday::Mon,
        Weekday::Tue,
        Weekday::Wed,
        Weekday::Thu,
        Weekday::Fri,
    ];

    fn index(self) -> i64 {
        self as i64
    }
}

/// Working period `[from, to)` on one weekday, times as `HH:MM` or
/// `HH:MM:SS`; `to` may be `24:00`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkingWindow {
    pub day: Weekday,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CalendarError(String);

impl fmt::Display for CalendarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn parse_time_of_day(raw: &str) -> Result<i64, CalendarError> {
    let parts: Vec<&str> = raw.trim().split(':').collect();
    let bad = || CalendarError(format!("invalid time of day `{raw}`"));
    if !(2..=3).contains(&parts.len()) {
        return Err(bad());
    }
    let mut secs = 0;
    for (part, unit) in parts.iter().zip([3600, 60, 1]) {
        let v: i64 = part.parse().map_err(|_| bad())?;
        if v < 0 || (unit != 3600 && v >= 60) {
            return Err(bad());
        }
        secs += v * unit;
    }
    if secs > SECONDS_PER_DAY {
        return Err(bad());
    }
    Ok(secs)
}

/// Sorted, merged working intervals within one week, as offsets from Monday
/// 00:00 local time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Calendar {
    intervals: Vec<(i64, i64)>,
    offset_secs: i64,
}

impl Calendar {
    pub fn new(windows: &[WorkingWindow]) -> Result<Self, CalendarError> {
        let mut intervals = Vec::with_capacity(windows.len());
        for w in windows {
            let from = parse_time_of_day(&w.from)?;
            let to = parse_time_of_day(&w.to)?;
            if from >= to {
                return Err(CalendarError(format!(
                    "empty window {:?} {}-{}",
                    w.day, w.from, w.to
                )));
            }
            let base = w.day.index() * SECONDS_PER_DAY;
            intervals.push((base + from, base + to));
        }
        if intervals.is_empty() {
            return Err(CalendarError("calendar has no working window".into()));
        }
        intervals.sort_unstable();
        let mut merged: Vec<(i64, i64)> = Vec::with_capacity(intervals.len());
        for (s, e) in intervals {
            match merged.last_mut() {
                Some(last) if s < last.1 => {
                    return Err(CalendarError(format!(
                        "overlapping working windows around week second {s}"
                    )))
                }
                Some(last) if s == last.1 => last.1 = e,
                _ => merged.push((s, e)),
            }
        }
        Ok(Self {
            intervals: merged,
            offset_secs: 0,
        })
    }

    pub fn always() -> Self {
        Self {
            intervals: vec![(0, SECONDS_PER_WEEK)],
            offset_secs: 0,
        }
    }

    /// Same windows interpreted in local time `offset_secs` east of UTC.
    pub fn with_offset(mut self, offset_secs: i64) -> Self {
        self.offset_secs = offset_secs;
        self
    }

    /// Splits a UTC instant into (start of its local week in UTC, position within the week).
    fn locate(&self, t: i64) -> (i64, i64) {
        let pos = (t + self.offset_secs - FIRST_MONDAY).rem_euclid(SECONDS_PER_WEEK);
        (t - pos, pos)
    }

    /// Earliest instant at or after `t` that lies inside a working window.
    pub fn next_working(&self, t: i64) -> i64 {
        let (week, pos) = self.locate(t);
        match self.intervals.iter().find(|&&(_, e)| e > pos) {
            Some(&(s, _)) if s <= pos => t,
            Some(&(s, _)) => week + s,
            None => week + SECONDS_PER_WEEK + self.intervals[0].0,
        }
    }

    pub fn is_working(&self, t: i64) -> bool {
        self.next_working(t) == t
    }

    /// Instant at which `work` seconds of working time, started no earlier
    /// than `t`, are complete.
    pub fn add_working(&self, t: i64, work: i64) -> i64 {
        let mut t = self.next_working(t);
        let mut left = work;
        loop {
            let (week, pos) = self.locate(t);
            let &(_, end) = self
                .intervals
                .iter()
                .find(|&&(s, e)| s <= pos && pos < e)
                .expect("t is a working instant");
            let available = end - pos;
            if left <= available {
                return t + left;
            }
            left -= available;
            t = self.next_working(week + end);
        }
    }

    /// Working seconds inside `[a, b)`.
    pub fn working_seconds_between(&self, a: i64, b: i64) -> i64 {
        if b <= a {
            return 0;
        }
        let (week, _) = self.locate(a);
        let mut total = 0;
        let mut base = week;
        while base < b {
            for &(s, e) in &self.intervals {
                let lo = (base + s).max(a);
                let hi = (base + e).min(b);
                if hi > lo {
                    total += hi - lo;
                }
            }
            base += SECONDS_PER_WEEK;
        }
        total
    }
}
