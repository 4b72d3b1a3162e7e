//! One PASS/FAIL line per acceptance criterion; exits non-zero on any failure.

mod common;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use chrono::{Duration as Span, FixedOffset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use logdist::event_log::{Event, EventLog};
use logdist::harness::evaluate_scenarios;
use logdist::harness::{evaluate, kendall_tau_b, MeasureId, ScenarioReport, SuiteConfig};
use logdist::kernels::{
    dl_distance_normalized, emd_1d, optimal_assignment, wasserstein_1, CostMatrix, Histogram1D,
    Kernel,
};
use logdist::sim::{simulate_detailed, Scenario, SimulationConfig};
use logdist::{congestion, control_flow, temporal};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(
        elapsed < limit,
        format!("took {elapsed:?}, limit {limit:?}"),
    )
}

fn random_histogram(rng: &mut ChaCha8Rng) -> (i64, Vec<u32>) {
    let bins = rng.gen_range(1..=8);
    (
        rng.gen_range(-3..=3),
        (0..bins).map(|_| rng.gen_range(0..=5)).collect(),
    )
}

fn histogram((origin, masses): &(i64, Vec<u32>)) -> Histogram1D {
    Histogram1D::new(*origin, masses.iter().map(|&m| f64::from(m)).collect()).unwrap()
}

fn ngd_worked_example() -> Outcome {
    let alog = common::load("abcd.csv");
    let glog = common::load("abed.csv");
    let t = Instant::now();
    let d = control_flow::ngd(&alog, &glog, 2).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    ensure((d - 0.4).abs() < 1e-12, format!("NGD = {d}, expected 0.4"))?;
    within(elapsed, Duration::from_millis(1))?;
    Ok(format!("NGD = {d} in {elapsed:?}"))
}

fn kernel_oracles() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let (x, y) = (random_histogram(&mut rng), random_histogram(&mut rng));
        let got = emd_1d(&histogram(&x), &histogram(&y));
        let want = common::emd_min_cost_flow((x.0, &x.1), (y.0, &y.1));
        ensure(
            (got - want).abs() < 1e-9,
            format!("emd_1d {x:?} {y:?} = {got}, oracle {want}"),
        )?;
    }
    let mut balanced = 0;
    while balanced < 200 {
        let (x, mut y) = (random_histogram(&mut rng), random_histogram(&mut rng));
        let (sx, sy): (u32, u32) = (x.1.iter().sum(), y.1.iter().sum());
        if sx == 0 {
            continue;
        }
        // move mass around until the totals agree
        let mut diff = sx as i64 - sy as i64;
        while diff != 0 {
            let i = rng.gen_range(0..y.1.len());
            if diff > 0 {
                y.1[i] += 1;
                diff -= 1;
            } else if y.1[i] > 0 {
                y.1[i] -= 1;
                diff += 1;
            }
        }
        let (hx, hy) = (histogram(&x), histogram(&y));
        let emd = emd_1d(&hx, &hy);
        let w1 = wasserstein_1(&hx, &hy).map_err(|e| e.to_string())?;
        ensure(
            (emd - w1 * f64::from(sx)).abs() < 1e-9,
            format!(
                "equal mass {x:?} {y:?}: emd {emd} vs w1*mass {}",
                w1 * f64::from(sx)
            ),
        )?;
        balanced += 1;
    }
    within(t.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "200 unbalanced + 200 equal-mass pairs in {:?}",
        t.elapsed()
    ))
}

fn assignment_and_dl_oracles() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let n = rng.gen_range(1..=6);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| f64::from(rng.gen_range(0..20u32)) / 4.0)
                    .collect()
            })
            .collect();
        let got = optimal_assignment(&CostMatrix::new(rows.clone()).unwrap());
        let want = common::assignment_brute_force(&rows);
        ensure(
            (got.total - want).abs() < 1e-9,
            format!("{rows:?}: {} vs {want}", got.total),
        )?;
    }
    let alphabet = ['A', 'B', 'C', 'D'];
    for _ in 0..500 {
        let mut seq = || -> Vec<char> {
            let len = rng.gen_range(0..=6);
            (0..len).map(|_| alphabet[rng.gen_range(0..4)]).collect()
        };
        let (a, b) = (seq(), seq());
        let got = dl_distance_normalized(&a, &b);
        let longest = a.len().max(b.len());
        let want = if longest == 0 {
            0.0
        } else {
            common::osa_recursive(&a, &b) as f64 / longest as f64
        };
        ensure(
            (got - want).abs() < 1e-12,
            format!("{a:?} {b:?}: {got} vs {want}"),
        )?;
    }
    within(t.elapsed(), Duration::from_secs(10))?;
    Ok(format!(
        "100 matrices + 500 sequence pairs in {:?}",
        t.elapsed()
    ))
}

fn scenario_signatures(report: &ScenarioReport, elapsed: Duration) -> Outcome {
    use Scenario::*;
    let mean = |sc: Scenario, m: &str| {
        report
            .row(sc)
            .and_then(|r| r.mean(m))
            .ok_or(format!("{sc} {m} missing"))
    };
    let all = |m: &str| -> Vec<f64> { report.means(m).into_iter().flatten().collect() };
    let is_max = |sc: Scenario, m: &str| -> Result<(), String> {
        let v = mean(sc, m)?;
        ensure(
            all(m).iter().all(|&o| o <= v),
            format!("{sc} is not the largest {m}: {:?}", all(m)),
        )
    };
    ensure(all("NGD").len() == 8, "a scenario failed to evaluate")?;

    // a. CAR
    for sc in [Seq, SeqGateways, Ext] {
        let v = mean(sc, "CAR")?;
        ensure(v.abs() < 1e-9, format!("a: CAR {sc} = {v}"))?;
    }
    is_max(Arr, "CAR").map_err(|e| format!("a: {e}"))?;
    // b. CED
    is_max(Cal, "CED").map_err(|e| format!("b: {e}"))?;
    // c. NGD and CFLD
    for m in ["NGD", "CFLD"] {
        let (gt, seq, sg) = (mean(Gt, m)?, mean(Seq, m)?, mean(SeqGateways, m)?);
        ensure(
            sg > seq && seq > gt,
            format!("c: {m} S-G {sg} > SEQ {seq} > GT {gt} violated"),
        )?;
        for sc in [Dur, Cal, Ext] {
            let v = mean(sc, m)?;
            ensure(
                v <= 2.0 * gt,
                format!("c: {m} {sc} = {v} exceeds 2 x GT {gt}"),
            )?;
        }
    }
    // d. RED
    let (red_cal, red_gt) = (mean(Cal, "RED")?, mean(Gt, "RED")?);
    ensure(
        red_cal <= 2.0 * red_gt,
        format!("d: RED CAL {red_cal} vs GT {red_gt}"),
    )?;
    is_max(SeqGateways, "RED").map_err(|e| format!("d: {e}"))?;
    // e. CTD
    let mut ctd = all("CTD");
    ctd.sort_by(f64::total_cmp);
    for sc in [Gt, Cal] {
        let v = mean(sc, "CTD")?;
        ensure(
            v <= ctd[1],
            format!("e: CTD {sc} = {v} not among two smallest {ctd:?}"),
        )?;
    }
    within(elapsed, Duration::from_secs(300))?;
    Ok(format!("a-e hold; suite took {elapsed:?}"))
}

fn rank_agreement(report: &ScenarioReport) -> Outcome {
    let ngd: Vec<f64> = report.means("NGD").into_iter().flatten().collect();
    let cfld: Vec<f64> = report.means("CFLD").into_iter().flatten().collect();
    let tau = kendall_tau_b(&ngd, &cfld).ok_or("rankings are constant")?;
    ensure(tau >= 0.9, format!("Kendall tau-b = {tau:.3}"))?;
    Ok(format!("Kendall tau-b = {tau:.3}"))
}

fn all_measures() -> Vec<MeasureId> {
    let mut ms = MeasureId::DEFAULTS.to_vec();
    ms.extend(
        logdist::harness::KERNEL_MEASURES
            .iter()
            .map(|m| m.with_kernel(Kernel::Wasserstein)),
    );
    ms.push(MeasureId::Ngd { n: 3 });
    ms
}

fn self_distance() -> Outcome {
    let fixtures = [
        "procure_to_pay.csv",
        "two_cases.csv",
        "three_cases.csv",
        "abcd.csv",
        "abed.csv",
        "loan_gt_20.csv",
        "loan_seq_20.csv",
    ];
    for name in fixtures {
        let log = common::load(name);
        for m in all_measures() {
            let d = m
                .compute(&log, &log, 5000)
                .map_err(|e| format!("{name} {m}: {e}"))?;
            ensure(d.abs() < 1e-9, format!("{name}: {m}(L, L) = {d}"))?;
        }
        let report = evaluate(
            &log,
            &[log.clone(), log.clone(), log.clone()],
            &all_measures(),
        )
        .map_err(|e| e.to_string())?;
        for r in &report.measures {
            let s = r.summary().ok_or(format!("{name} {}: failed", r.measure))?;
            ensure(
                s.mean.abs() < 1e-9 && s.ci_halfwidth == 0.0,
                format!(
                    "{name} {}: mean {} hw {}",
                    r.measure, s.mean, s.ci_halfwidth
                ),
            )?;
        }
    }
    Ok(format!(
        "{} fixture logs x {} measures",
        fixtures.len(),
        all_measures().len()
    ))
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("logdist-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut outputs = vec![];
    for i in 0..2 {
        let out = dir.join(format!("report-{i}.json"));
        let status = Command::new(env!("CARGO_BIN_EXE_logdist"))
            .args(["evaluate-scenarios", "--seed", "42", "--out"])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), format!("run {i} exited with {status}"))?;
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    ensure(outputs[0] == outputs[1], "reports differ")?;
    Ok(format!("two runs, {} identical bytes", outputs[0].len()))
}

fn shift(log: &EventLog, by: impl Fn(&str) -> Span) -> EventLog {
    EventLog::new(
        log.events()
            .iter()
            .map(|e| {
                let d = by(e.case_id());
                Event::new(e.case_id(), e.activity(), e.start() + d, e.end() + d).unwrap()
            })
            .collect(),
    )
}

fn properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    // translation covariance of the kernels
    for _ in 0..200 {
        let (x, y) = (random_histogram(&mut rng), random_histogram(&mut rng));
        let k = rng.gen_range(-1000..=1000);
        let (hx, hy) = (histogram(&x), histogram(&y));
        let (sx, sy) = (hx.shifted(k), hy.shifted(k));
        let d = (emd_1d(&hx, &hy) - emd_1d(&sx, &sy)).abs();
        ensure(
            d < 1e-9,
            format!("EMD not translation covariant on {x:?} {y:?}"),
        )?;
        if hx.total() > 0.0 && hy.total() > 0.0 {
            let d = (wasserstein_1(&hx, &hy).unwrap() - wasserstein_1(&sx, &sy).unwrap()).abs();
            ensure(
                d < 1e-9,
                format!("W1 not translation covariant on {x:?} {y:?}"),
            )?;
        }
    }

    let log = common::load("loan_gt_20.csv");
    // RED: moving whole cases changes nothing
    let moved = shift(&log, |case| {
        Span::hours(case.bytes().map(i64::from).sum::<i64>() % 97 - 40)
    });
    let red = temporal::red(&log, &moved).map_err(|e| e.to_string())?;
    ensure(
        red.abs() < 1e-9,
        format!("RED after per-case shifts = {red}"),
    )?;
    // CED: a whole week later is the same week
    let week = shift(&log, |_| Span::hours(168));
    let ced = temporal::ced(&log, &week).map_err(|e| e.to_string())?;
    ensure(ced.abs() < 1e-9, format!("CED after 168h shift = {ced}"))?;
    let ctd = congestion::ctd(&log, &moved).map_err(|e| e.to_string())?;
    ensure(
        ctd.abs() < 1e-9,
        format!("CTD after per-case shifts = {ctd}"),
    )?;

    // capacity and calendar sweeps over simulated schedules
    let offset = FixedOffset::east_opt(2 * 3600).unwrap();
    let start = SuiteConfig::default().start.with_timezone(&offset);
    for sc in Scenario::ALL {
        let model = sc.model();
        let compiled = model.compile().map_err(|e| e.to_string())?;
        let out = simulate_detailed(&model, &SimulationConfig::new(150, 11, start))
            .map_err(|e| e.to_string())?;
        for pool in &model.pools {
            let mut sweep: Vec<(i64, i32)> = vec![];
            let mut per_resource: std::collections::BTreeMap<usize, Vec<(i64, i64)>> =
                Default::default();
            for s in out.schedule.iter().filter(|s| s.pool == pool.id) {
                let (a, b) = (s.start.timestamp(), s.end.timestamp());
                if b > a {
                    sweep.push((a, 1));
                    sweep.push((b, -1));
                }
                ensure(
                    (s.resource as u32) < pool.size,
                    format!("{sc}: resource {} outside pool {}", s.resource, pool.id),
                )?;
                per_resource.entry(s.resource).or_default().push((a, b));
                let cal = compiled
                    .calendar(&pool.id)
                    .ok_or("pool missing")?
                    .clone()
                    .with_offset(offset.local_minus_utc() as i64);
                let worked = cal.working_seconds_between(a, b);
                ensure(
                    worked == s.work,
                    format!("{sc}: {} worked {worked}s of {}s", s.activity, s.work),
                )?;
                ensure(
                    s.work == 0 || cal.is_working(a),
                    format!("{sc}: {} starts outside hours", s.activity),
                )?;
            }
            sweep.sort();
            let mut busy = 0;
            for (_, delta) in sweep {
                busy += delta;
                ensure(
                    busy <= pool.size as i32,
                    format!("{sc}: pool {} over capacity", pool.id),
                )?;
            }
            for (r, mut spans) in per_resource {
                spans.sort();
                for w in spans.windows(2) {
                    ensure(
                        w[0].1 <= w[1].0,
                        format!("{sc}: resource {r} of {} double-booked", pool.id),
                    )?;
                }
            }
        }
    }
    Ok(
        "kernel translation, RED/CTD per-case shifts, CED 168h, capacity and calendar sweeps"
            .into(),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: &str, title: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("PASS [{id}] {title}: {detail}"),
        Err(why) => {
            failed += 1;
            println!("FAIL [{id}] {title}: {why}");
        }
    };

    report("1", "NGD worked example", ngd_worked_example());
    report("2", "EMD and W1 against transport oracle", kernel_oracles());
    report(
        "3",
        "assignment and DL against brute force",
        assignment_and_dl_oracles(),
    );

    let t = Instant::now();
    let suite = evaluate_scenarios(&SuiteConfig::default(), &MeasureId::DEFAULTS);
    let elapsed = t.elapsed();
    match suite {
        Ok(suite) => {
            report(
                "4",
                "loan scenario signatures",
                scenario_signatures(&suite, elapsed),
            );
            report("5", "NGD and CFLD rank agreement", rank_agreement(&suite));
        }
        Err(e) => {
            report("4", "loan scenario signatures", Err(e.to_string()));
            report("5", "NGD and CFLD rank agreement", Err(e.to_string()));
        }
    }

    report("6", "self-distance is zero", self_distance());
    report("7", "evaluate-scenarios is deterministic", determinism());
    report("8", "property suites", properties());

    if failed == 0 {
        println!("acceptance: all 8 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
