//! Temporal distances over hourly-binned timestamps: absolute (AED),
//! circadian (CED) and relative-to-arrival (RED) event distributions.
//!
//! Every event contributes two observations, its start and its end. Results
//! are scaled by the observation count of the first (reference) log, so a
//! value of `k` reads as "each reference observation moves `k` hours on
//! average". The measures are therefore not symmetric in their arguments.

use chrono::{Datelike, Timelike};

use crate::error::{Error, Result};
use crate::event_log::{EventLog, Timestamp};
use crate::kernels::{Histogram1D, Kernel};

pub const SECONDS_PER_BIN: i64 = 3600;

/// Contribution of a weekday that has observations in only one of the logs.
pub const EMPTY_WEEKDAY_PENALTY: f64 = 24.0;

fn ensure_non_empty(log1: &EventLog, log2: &EventLog, measure: &str) -> Result<()> {
    if log1.is_empty() || log2.is_empty() {
        return Err(Error::UndefinedInput(format!(
            "{measure} needs two non-empty logs"
        )));
    }
    Ok(())
}

/// Global date-hour bin of an absolute instant.
pub fn hour_bin(ts: &Timestamp) -> i64 {
    ts.timestamp().div_euclid(SECONDS_PER_BIN)
}

fn observations(log: &EventLog) -> impl Iterator<Item = Timestamp> + '_ {
    log.events().iter().flat_map(|e| e.timestamps())
}

pub fn absolute_histogram(log: &EventLog) -> Histogram1D {
    Histogram1D::from_indices(observations(log).map(|ts| hour_bin(&ts)))
}

pub fn aed(log1: &EventLog, log2: &EventLog) -> Result<f64> {
    aed_with(log1, log2, Kernel::Emd)
}

pub fn aed_with(log1: &EventLog, log2: &EventLog, kernel: Kernel) -> Result<f64> {
    ensure_non_empty(log1, log2, "AED")?;
    let count = 2.0 * log1.num_events() as f64;
    kernel.scaled_distance(&absolute_histogram(log1), &absolute_histogram(log2), count)
}

/// Hour-of-day histograms of a log's observations, one per local weekday
/// (Monday first).
pub fn circadian_histograms(log: &EventLog) -> [Histogram1D; 7] {
    let mut hours: [Vec<i64>; 7] = Default::default();
    for ts in observations(log) {
        let local = ts.naive_local();
        hours[local.weekday().num_days_from_monday() as usize].push(local.hour() as i64);
    }
    hours.map(Histogram1D::from_indices)
}

pub fn ced(log1: &EventLog, log2: &EventLog) -> Result<f64> {
    ced_with(log1, log2, Kernel::Emd)
}

/// Mean over the seven weekdays of the per-weekday scaled distance.
///
/// A weekday empty in both logs contributes 0; empty in exactly one of them
/// it contributes [`EMPTY_WEEKDAY_PENALTY`].
pub fn ced_with(log1: &EventLog, log2: &EventLog, kernel: Kernel) -> Result<f64> {
    ensure_non_empty(log1, log2, "CED")?;
    let days1 = circadian_histograms(log1);
    let days2 = circadian_histograms(log2);
    let mut sum = 0.0;
    for (h1, h2) in days1.iter().zip(&days2) {
        let (c1, c2) = (h1.total(), h2.total());
        sum += match (c1 > 0.0, c2 > 0.0) {
            (false, false) => 0.0,
            (true, true) => kernel.scaled_distance(h1, h2, c1)?,
            _ => EMPTY_WEEKDAY_PENALTY,
        };
    }
    Ok(sum / 7.0)
}

/// Histogram of observation offsets from their case arrival, in whole hours.
pub fn relative_histogram(log: &EventLog) -> Histogram1D {
    let mut bins = Vec::with_capacity(2 * log.num_events());
    for (_, events) in log.cases() {
        let arrival = events
            .iter()
            .map(|e| e.start().timestamp())
            .min()
            .expect("non-empty case");
        for e in events {
            for ts in e.timestamps() {
                bins.push((ts.timestamp() - arrival).div_euclid(SECONDS_PER_BIN));
            }
        }
    }
    Histogram1D::from_indices(bins)
}

pub fn red(log1: &EventLog, log2: &EventLog) -> Result<f64> {
    red_with(log1, log2, Kernel::Emd)
}

pub fn red_with(log1: &EventLog, log2: &EventLog, kernel: Kernel) -> Result<f64> {
    ensure_non_empty(log1, log2, "RED")?;
    let count = 2.0 * log1.num_events() as f64;
    kernel.scaled_distance(&relative_histogram(log1), &relative_histogram(log2), count)
}
