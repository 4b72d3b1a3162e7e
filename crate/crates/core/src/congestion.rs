//! Congestion distances: case arrival rate (CAR) and cycle time
//! distribution (CTD).

use crate::error::{Error, Result};
use crate::event_log::EventLog;
use crate::kernels::{wasserstein_1, Histogram1D, Kernel};
use crate::temporal::{hour_bin, SECONDS_PER_BIN};

fn ensure_non_empty(log1: &EventLog, log2: &EventLog, measure: &str) -> Result<()> {
    if log1.is_empty() || log2.is_empty() {
        return Err(Error::UndefinedInput(format!(
            "{measure} needs two non-empty logs"
        )));
    }
    Ok(())
}

/// Date-hour histogram of case arrivals (earliest start of each case).
pub fn arrival_histogram(log: &EventLog) -> Histogram1D {
    Histogram1D::from_indices(log.arrivals().iter().map(hour_bin))
}

pub fn car(log1: &EventLog, log2: &EventLog) -> Result<f64> {
    car_with(log1, log2, Kernel::Emd)
}

/// Arrival-time distance scaled by the reference log's case count.
pub fn car_with(log1: &EventLog, log2: &EventLog, kernel: Kernel) -> Result<f64> {
    ensure_non_empty(log1, log2, "CAR")?;
    kernel.scaled_distance(
        &arrival_histogram(log1),
        &arrival_histogram(log2),
        log1.num_cases() as f64,
    )
}

/// Histogram of case cycle times in whole hours.
pub fn cycle_time_histogram(log: &EventLog) -> Histogram1D {
    Histogram1D::from_indices(
        log.cycle_times()
            .into_iter()
            .map(|secs| secs.div_euclid(SECONDS_PER_BIN)),
    )
}

/// W1 between the normalized cycle-time histograms, in hours.
pub fn ctd(log1: &EventLog, log2: &EventLog) -> Result<f64> {
    ensure_non_empty(log1, log2, "CTD")?;
    wasserstein_1(&cycle_time_histogram(log1), &cycle_time_histogram(log2))
}
