//! Control-flow distances: n-gram distance (NGD) and control-flow log
//! distance (CFLD). Both look only at activity sequences.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::event_log::{EventLog, DUMMY_ACTIVITY};
use crate::kernels::{dl_distance_normalized, optimal_assignment, CostMatrix};

pub const DEFAULT_NGRAM_SIZE: usize = 2;

/// Largest case count for which [`cfld`] materializes its N×N cost matrix.
pub const DEFAULT_MAX_CASES: usize = 5_000;

/// Frequencies of the n-grams of a log, each trace padded with `n - 1`
/// dummy activities on both ends.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NGramHistogram {
    n: usize,
    counts: BTreeMap<Vec<String>, u64>,
}

impl NGramHistogram {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &BTreeMap<Vec<String>, u64> {
        &self.counts
    }

    pub fn get(&self, gram: &[&str]) -> u64 {
        let key: Vec<String> = gram.iter().map(|s| s.to_string()).collect();
        self.counts.get(&key).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

pub fn ngram_histogram(log: &EventLog, n: usize) -> Result<NGramHistogram> {
    if n < 2 {
        return Err(Error::Parameter(format!(
            "n-gram size must be at least 2, got {n}"
        )));
    }
    let mut counts = BTreeMap::new();
    for trace in log.traces() {
        let mut padded: Vec<&str> = vec![DUMMY_ACTIVITY; n - 1];
        padded.extend(trace.activities.iter().map(String::as_str));
        padded.extend(std::iter::repeat_n(DUMMY_ACTIVITY, n - 1));
        for window in padded.windows(n) {
            let key = window.iter().map(|s| s.to_string()).collect();
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    Ok(NGramHistogram { n, counts })
}

/// Sum of absolute n-gram frequency differences over the sum of all
/// frequencies in both logs. Two empty logs are at distance 0.
pub fn ngd(log1: &EventLog, log2: &EventLog, n: usize) -> Result<f64> {
    let h1 = ngram_histogram(log1, n)?;
    let h2 = ngram_histogram(log2, n)?;
    let total = h1.total() + h2.total();
    if total == 0 {
        return Ok(0.0);
    }
    let mut diff = 0u64;
    for (gram, &c1) in &h1.counts {
        diff += c1.abs_diff(h2.counts.get(gram).copied().unwrap_or(0));
    }
    for (gram, &c2) in &h2.counts {
        if !h1.counts.contains_key(gram) {
            diff += c2;
        }
    }
    Ok(diff as f64 / total as f64)
}

pub fn cfld(log1: &EventLog, log2: &EventLog) -> Result<f64> {
    cfld_with_budget(log1, log2, DEFAULT_MAX_CASES)
}

/// Mean normalized Damerau-Levenshtein distance under the optimal
/// one-to-one pairing of the cases of both logs.
pub fn cfld_with_budget(log1: &EventLog, log2: &EventLog, max_cases: usize) -> Result<f64> {
    let n = log1.num_cases();
    if n != log2.num_cases() {
        return Err(Error::Precondition(format!(
            "CFLD needs logs with the same number of cases ({} vs {})",
            n,
            log2.num_cases()
        )));
    }
    if n == 0 {
        return Err(Error::Precondition("CFLD needs at least one case".into()));
    }
    if n > max_cases {
        return Err(Error::Resource(format!(
            "{n} cases exceed the CFLD budget of {max_cases} (raise --max-cases)"
        )));
    }
    let t1: Vec<Vec<String>> = log1.traces().into_iter().map(|t| t.activities).collect();
    let t2: Vec<Vec<String>> = log2.traces().into_iter().map(|t| t.activities).collect();
    let matrix = CostMatrix::from_fn(n, |i, j| dl_distance_normalized(&t1[i], &t2[j]))?;
    let assignment = optimal_assignment(&matrix);
    Ok(assignment.total / n as f64)
}
