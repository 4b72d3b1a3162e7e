mod common;

use chrono::{DateTime, Duration, FixedOffset};
use proptest::prelude::*;

use logdist::congestion::ctd;
use logdist::event_log::{Event, EventLog};
use logdist::kernels::{
    dl_distance, dl_distance_normalized, emd_1d, optimal_assignment, wasserstein_1, CostMatrix,
    Histogram1D,
};
use logdist::temporal::{aed, ced, red};

fn histogram() -> impl Strategy<Value = Histogram1D> {
    (-20i64..20, prop::collection::vec(0u32..5, 1..8))
        .prop_map(|(o, m)| Histogram1D::new(o, m.into_iter().map(f64::from).collect()).unwrap())
}

fn word() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(b'a'..b'e', 0..7)
}

fn base() -> DateTime<FixedOffset> {
    DateTime::parse_from_rfc3339("2022-05-02T06:00:00+00:00").unwrap()
}

/// Cases of (start offset in minutes, activity lengths in minutes).
fn log_shape() -> impl Strategy<Value = Vec<(i64, Vec<i64>)>> {
    prop::collection::vec((0i64..5000, prop::collection::vec(1i64..300, 1..4)), 1..6)
}

fn build(shape: &[(i64, Vec<i64>)], shift_of: impl Fn(usize) -> Duration) -> EventLog {
    let mut events = vec![];
    for (k, (offset, lengths)) in shape.iter().enumerate() {
        let mut t = base() + Duration::minutes(*offset) + shift_of(k);
        for (i, len) in lengths.iter().enumerate() {
            let end = t + Duration::minutes(*len);
            events.push(Event::new(format!("c{k}"), format!("T{i}"), t, end).unwrap());
            t = end;
        }
    }
    EventLog::new(events)
}

proptest! {
    #[test]
    fn emd_is_a_symmetric_premetric(x in histogram(), y in histogram()) {
        let d = emd_1d(&x, &y);
        prop_assert!(d >= 0.0);
        prop_assert_eq!(d, emd_1d(&y, &x));
        prop_assert_eq!(emd_1d(&x, &x), 0.0);
    }

    #[test]
    fn emd_matches_flow_oracle(x in histogram(), y in histogram()) {
        let ints = |h: &Histogram1D| h.masses().iter().map(|&m| m as u32).collect::<Vec<_>>();
        let (mx, my) = (ints(&x), ints(&y));
        let expected = common::emd_min_cost_flow((x.origin(), &mx), (y.origin(), &my));
        prop_assert!((emd_1d(&x, &y) - expected).abs() < 1e-9);
    }

    #[test]
    fn emd_translation_invariant(x in histogram(), y in histogram(), s in -50i64..50) {
        let d = emd_1d(&x, &y);
        prop_assert!((emd_1d(&x.shifted(s), &y.shifted(s)) - d).abs() < 1e-9);
    }

    #[test]
    fn w1_bounded_by_support_span(x in histogram(), y in histogram()) {
        prop_assume!(x.total() > 0.0 && y.total() > 0.0);
        let d = wasserstein_1(&x, &y).unwrap();
        let (xl, xh) = x.support().unwrap();
        let (yl, yh) = y.support().unwrap();
        prop_assert!(d >= 0.0);
        prop_assert!(d <= (xh.max(yh) - xl.min(yl)) as f64 + 1e-9);
        prop_assert!((d - wasserstein_1(&y, &x).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn dl_agrees_with_recursion(a in word(), b in word()) {
        prop_assert_eq!(dl_distance(&a, &b), common::osa_recursive(&a, &b));
        let n = dl_distance_normalized(&a, &b);
        prop_assert!((0.0..=1.0).contains(&n));
    }

    #[test]
    fn assignment_is_optimal(rows in (1usize..6).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0u8..20, n), n))) {
        let cost: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&c| f64::from(c)).collect()).collect();
        let result = optimal_assignment(&CostMatrix::new(cost.clone()).unwrap());
        prop_assert_eq!(result.total, common::assignment_brute_force(&cost));
        let mut seen = result.permutation.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..cost.len()).collect::<Vec<_>>());
    }

    #[test]
    fn timing_measures_respect_their_invariances(a in log_shape(), b in log_shape(), shifts in prop::collection::vec(-300i64..300, 6), weeks in 1i64..4) {
        let la = build(&a, |_| Duration::zero());
        let lb = build(&b, |_| Duration::zero());

        // whole-log shift by whole weeks keeps CED
        let lb_weeks = build(&b, |_| Duration::weeks(weeks));
        prop_assert!((ced(&la, &lb).unwrap() - ced(&la, &lb_weeks).unwrap()).abs() < 1e-9);

        // AED of the same amount on both sides
        let la_h = build(&a, |_| Duration::hours(weeks * 7));
        let lb_h = build(&b, |_| Duration::hours(weeks * 7));
        prop_assert!((aed(&la, &lb).unwrap() - aed(&la_h, &lb_h).unwrap()).abs() < 1e-9);

        // per-case shifts leave RED and CTD unchanged
        let lb_cases = build(&b, |k| Duration::minutes(shifts[k]));
        prop_assert!((red(&la, &lb).unwrap() - red(&la, &lb_cases).unwrap()).abs() < 1e-9);
        prop_assert!((ctd(&la, &lb).unwrap() - ctd(&la, &lb_cases).unwrap()).abs() < 1e-9);
    }
}
