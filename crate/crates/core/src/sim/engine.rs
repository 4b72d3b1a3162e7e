//! Discrete-event execution of a compiled BPS model.
//!
//! Randomness comes from ChaCha8 streams keyed by the run seed. The arrival
//! process owns one stream; every case owns three more (routing, durations,
//! timers), selected by case index, so adding cases or timers never changes
//! the draws seen by earlier cases or by other purposes. Each case's path
//! through the control-flow graph, with all of its durations and timer
//! delays, is drawn when the case is created; the event loop then only
//! schedules that partial order onto resources.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use chrono::{DateTime, FixedOffset};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event_log::{Event, EventLog, Timestamp};

use super::model::{BpsModel, CompiledKind, CompiledModel};

/// Largest number of activity executions a single case may produce.
pub const STEP_BUDGET_PER_CASE: usize = 10_000;

const ARRIVAL_STREAM: u64 = u64::MAX;
const ROUTING: u64 = 0;
const DURATIONS: u64 = 1;
const TIMERS: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub num_cases: usize,
    pub seed: u64,
    pub start: Timestamp,
    /// Seed of the arrival stream; `seed` when absent. Runs sharing it see
    /// the same arrival instants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival_seed: Option<u64>,
}

impl SimulationConfig {
    pub fn new(num_cases: usize, seed: u64, start: Timestamp) -> Self {
        Self {
            num_cases,
            seed,
            start,
            arrival_seed: None,
        }
    }

    pub fn with_arrival_seed(mut self, seed: u64) -> Self {
        self.arrival_seed = Some(seed);
        self
    }
}

/// One activity execution with the resource that performed it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledActivity {
    pub case_id: String,
    pub activity: String,
    pub pool: String,
    pub resource: usize,
    /// Working seconds the activity required.
    pub work: i64,
    pub enabled: Timestamp,
    pub start: Timestamp,
    pub end: Timestamp,
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub log: EventLog,
    pub schedule: Vec<ScheduledActivity>,
}

/// Simulates `config.num_cases` cases and returns their event log.
pub fn simulate(model: &BpsModel, config: &SimulationConfig) -> Result<EventLog> {
    Ok(simulate_detailed(model, config)?.log)
}

/// Like [`simulate`], also returning the resource-level schedule.
pub fn simulate_detailed(model: &BpsModel, config: &SimulationConfig) -> Result<SimulationOutput> {
    if config.num_cases == 0 {
        return Err(Error::Parameter(
            "number of cases must be at least 1".into(),
        ));
    }
    let compiled = model.compile()?;
    Engine::new(&compiled, config)?.run()
}

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn case_stream(seed: u64, case: usize, purpose: u64) -> ChaCha8Rng {
    stream(seed, ((case as u64) << 2) | purpose)
}

#[derive(Debug, Clone)]
struct PlannedActivity {
    activity: usize,
    successors: Vec<usize>,
    pending: usize,
    work: i64,
    timer: i64,
}

/// Draws the partial order of activity executions of one case.
fn plan_case(
    model: &CompiledModel,
    seed: u64,
    case: usize,
    case_id: &str,
) -> Result<Vec<PlannedActivity>> {
    use rand::Rng;

    let mut routing = case_stream(seed, case, ROUTING);
    let mut durations = case_stream(seed, case, DURATIONS);
    let mut timers = case_stream(seed, case, TIMERS);

    let mut plan: Vec<PlannedActivity> = Vec::new();
    let mut tokens: VecDeque<(usize, Vec<usize>)> =
        VecDeque::from([(model.nodes[model.start].successors[0], vec![])]);
    let mut joins: HashMap<usize, (usize, Vec<usize>)> = HashMap::new();
    let mut steps = 0usize;

    while let Some((node_idx, preds)) = tokens.pop_front() {
        steps += 1;
        if plan.len() > STEP_BUDGET_PER_CASE || steps > 100 * STEP_BUDGET_PER_CASE {
            return Err(Error::Simulation(format!(
                "case {case_id} exceeded the budget of {STEP_BUDGET_PER_CASE} activity executions"
            )));
        }
        let node = &model.nodes[node_idx];
        match node.kind {
            CompiledKind::Start => unreachable!("start has no incoming edges"),
            CompiledKind::End => {}
            CompiledKind::Activity(activity) => {
                let spec = &model.activities[activity];
                let id = plan.len();
                let timer = spec.timer.as_ref().map_or(0, |t| t.sample(&mut timers));
                plan.push(PlannedActivity {
                    activity,
                    successors: vec![],
                    pending: preds.len(),
                    work: spec.duration.sample(&mut durations),
                    timer,
                });
                for &p in &preds {
                    plan[p].successors.push(id);
                }
                tokens.push_back((node.successors[0], vec![id]));
            }
            CompiledKind::XorSplit => {
                let u: f64 = routing.gen();
                let branch = node
                    .cumulative
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(node.successors.len() - 1);
                tokens.push_back((node.successors[branch], preds));
            }
            CompiledKind::XorJoin => tokens.push_back((node.successors[0], preds)),
            CompiledKind::AndSplit => {
                for &s in &node.successors {
                    tokens.push_back((s, preds.clone()));
                }
            }
            CompiledKind::AndJoin => {
                let entry = joins.entry(node_idx).or_default();
                entry.0 += 1;
                entry.1.extend(preds);
                if entry.0 == node.in_degree {
                    let (_, mut merged) = joins.remove(&node_idx).expect("entry exists");
                    merged.sort_unstable();
                    merged.dedup();
                    tokens.push_back((node.successors[0], merged));
                }
            }
        }
    }
    if !joins.is_empty() {
        return Err(Error::Simulation(format!(
            "case {case_id} left tokens waiting at an AND join"
        )));
    }
    Ok(plan)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Request,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Scheduled {
    time: i64,
    seq: u64,
    kind: Kind,
    case: usize,
    step: usize,
}

struct PoolState {
    busy: Vec<bool>,
    queue: VecDeque<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Execution {
    enabled: i64,
    start: i64,
    end: i64,
    resource: usize,
}

struct Engine<'a> {
    model: &'a CompiledModel,
    offset: FixedOffset,
    case_ids: Vec<String>,
    plans: Vec<Vec<PlannedActivity>>,
    executions: Vec<Vec<Execution>>,
    pools: Vec<PoolState>,
    calendars: Vec<super::calendar::Calendar>,
    agenda: BinaryHeap<Reverse<Scheduled>>,
    seq: u64,
}

impl<'a> Engine<'a> {
    fn new(model: &'a CompiledModel, config: &SimulationConfig) -> Result<Self> {
        let offset = *config.start.offset();
        let width = config.num_cases.to_string().len();
        let case_ids: Vec<String> = (1..=config.num_cases)
            .map(|k| format!("case-{k:0width$}"))
            .collect();

        let mut arrival_rng = stream(config.arrival_seed.unwrap_or(config.seed), ARRIVAL_STREAM);
        let first = model.first_arrival.unwrap_or(config.start).timestamp();
        let mut arrivals = Vec::with_capacity(config.num_cases);
        let mut t = first;
        for k in 0..config.num_cases {
            if k > 0 {
                t += model.inter_arrival.sample(&mut arrival_rng);
            }
            arrivals.push(t);
        }

        let plans = case_ids
            .iter()
            .enumerate()
            .map(|(k, id)| plan_case(model, config.seed, k, id))
            .collect::<Result<Vec<_>>>()?;
        let executions = plans
            .iter()
            .map(|p| vec![Execution::default(); p.len()])
            .collect();
        let pools = model
            .pools
            .iter()
            .map(|p| PoolState {
                busy: vec![false; p.size],
                queue: VecDeque::new(),
            })
            .collect();
        let calendars = model
            .pools
            .iter()
            .map(|p| {
                p.calendar
                    .clone()
                    .with_offset(offset.local_minus_utc() as i64)
            })
            .collect();

        let mut engine = Self {
            model,
            offset,
            case_ids,
            plans,
            executions,
            pools,
            calendars,
            agenda: BinaryHeap::new(),
            seq: 0,
        };
        for (case, &arrival) in arrivals.iter().enumerate() {
            for step in 0..engine.plans[case].len() {
                if engine.plans[case][step].pending == 0 {
                    engine.enable(case, step, arrival);
                }
            }
        }
        Ok(engine)
    }

    fn push(&mut self, time: i64, kind: Kind, case: usize, step: usize) {
        self.seq += 1;
        self.agenda.push(Reverse(Scheduled {
            time,
            seq: self.seq,
            kind,
            case,
            step,
        }));
    }

    fn enable(&mut self, case: usize, step: usize, at: i64) {
        self.executions[case][step].enabled = at;
        let timer = self.plans[case][step].timer;
        self.push(at + timer, Kind::Request, case, step);
    }

    fn pool_of(&self, case: usize, step: usize) -> usize {
        self.model.activities[self.plans[case][step].activity].pool
    }

    fn dispatch(&mut self, pool: usize, now: i64) {
        loop {
            let state = &mut self.pools[pool];
            let Some(resource) = state.busy.iter().position(|b| !b) else {
                return;
            };
            let Some((case, step)) = state.queue.pop_front() else {
                return;
            };
            state.busy[resource] = true;
            let calendar = &self.calendars[pool];
            let work = self.plans[case][step].work;
            let start = calendar.next_working(now);
            let end = calendar.add_working(now, work);
            let exec = &mut self.executions[case][step];
            exec.start = start;
            exec.end = end;
            exec.resource = resource;
            self.push(end, Kind::Complete, case, step);
        }
    }

    fn run(mut self) -> Result<SimulationOutput> {
        while let Some(Reverse(ev)) = self.agenda.pop() {
            let pool = self.pool_of(ev.case, ev.step);
            match ev.kind {
                Kind::Request => {
                    self.pools[pool].queue.push_back((ev.case, ev.step));
                }
                Kind::Complete => {
                    let resource = self.executions[ev.case][ev.step].resource;
                    self.pools[pool].busy[resource] = false;
                    let successors = self.plans[ev.case][ev.step].successors.clone();
                    for s in successors {
                        let next = &mut self.plans[ev.case][s];
                        next.pending -= 1;
                        if next.pending == 0 {
                            self.enable(ev.case, s, ev.time);
                        }
                    }
                }
            }
            self.dispatch(pool, ev.time);
        }
        Ok(self.into_output())
    }

    fn timestamp(&self, secs: i64) -> Timestamp {
        DateTime::from_timestamp(secs, 0)
            .expect("simulated instants stay in range")
            .with_timezone(&self.offset)
    }

    fn into_output(self) -> SimulationOutput {
        let mut rows: Vec<(usize, i64, i64, &str, ScheduledActivity)> = Vec::new();
        for (case, plan) in self.plans.iter().enumerate() {
            for (step, planned) in plan.iter().enumerate() {
                let exec = self.executions[case][step];
                let activity = &self.model.activities[planned.activity];
                rows.push((
                    case,
                    exec.start,
                    exec.end,
                    activity.label.as_str(),
                    ScheduledActivity {
                        case_id: self.case_ids[case].clone(),
                        activity: activity.label.clone(),
                        pool: self.model.pools[activity.pool].id.clone(),
                        resource: exec.resource,
                        work: planned.work,
                        enabled: self.timestamp(exec.enabled),
                        start: self.timestamp(exec.start),
                        end: self.timestamp(exec.end),
                    },
                ));
            }
        }
        rows.sort_by(|a, b| (a.0, a.1, a.2, a.3).cmp(&(b.0, b.1, b.2, b.3)));
        let schedule: Vec<ScheduledActivity> = rows.into_iter().map(|r| r.4).collect();
        let events = schedule
            .iter()
            .map(|s| Event::new(s.case_id.clone(), s.activity.clone(), s.start, s.end))
            .collect::<Result<Vec<_>>>()
            .expect("engine never schedules an end before its start");
        SimulationOutput {
            log: EventLog::new(events),
            schedule,
        }
    }
}
