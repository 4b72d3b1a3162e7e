//! Serializable BPS model: control-flow graph, activity performance,
//! arrival process and resource pools with weekly calendars.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event_log::Timestamp;

use super::calendar::{Calendar, Weekday, WorkingWindow};

/// Tolerance on the sum of the branch probabilities of an XOR split.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Non-negative random duration, parameters in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DurationDistribution {
    Fixed {
        value: f64,
    },
    Uniform {
        min: f64,
        max: f64,
    },
    Exponential {
        mean: f64,
    },
    /// Normal distribution truncated at zero by rejection.
    Normal {
        mean: f64,
        std_dev: f64,
    },
}

impl DurationDistribution {
    pub fn fixed(secs: f64) -> Self {
        Self::Fixed { value: secs }
    }

    pub fn uniform(min: f64, max: f64) -> Self {
        Self::Uniform { min, max }
    }

    pub fn exponential(mean: f64) -> Self {
        Self::Exponential { mean }
    }

    pub fn normal(mean: f64, std_dev: f64) -> Self {
        Self::Normal { mean, std_dev }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Fixed { value } => value.is_finite() && value >= 0.0,
            Self::Uniform { min, max } => {
                min.is_finite() && max.is_finite() && 0.0 <= min && min <= max
            }
            Self::Exponential { mean } => mean.is_finite() && mean > 0.0,
            Self::Normal { mean, std_dev } => {
                mean.is_finite()
                    && std_dev.is_finite()
                    && std_dev >= 0.0
                    && (mean > 0.0 || std_dev > 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Model(format!(
                "invalid duration distribution {self:?}"
            )))
        }
    }

    /// Every parameter multiplied by `factor`; samples drawn from the same
    /// random stream scale accordingly.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            Self::Fixed { value } => Self::Fixed {
                value: value * factor,
            },
            Self::Uniform { min, max } => Self::Uniform {
                min: min * factor,
                max: max * factor,
            },
            Self::Exponential { mean } => Self::Exponential {
                mean: mean * factor,
            },
            Self::Normal { mean, std_dev } => Self::Normal {
                mean: mean * factor,
                std_dev: std_dev * factor,
            },
        }
    }

    /// Draws a duration in whole seconds.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let secs = match *self {
            Self::Fixed { value } => value,
            Self::Uniform { min, max } => min + (max - min) * rng.gen::<f64>(),
            Self::Exponential { mean } => Exp::new(1.0 / mean).expect("validated").sample(rng),
            Self::Normal { mean, std_dev } => {
                let normal = Normal::new(mean, std_dev).expect("validated");
                let mut draw = normal.sample(rng);
                let mut tries = 0;
                while draw < 0.0 && tries < 1_000 {
                    draw = normal.sample(rng);
                    tries += 1;
                }
                draw
            }
        };
        secs.max(0.0).round() as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub label: String,
    pub duration: DurationDistribution,
    pub pool: String,
    /// Wall-clock delay elapsing between enablement and the resource request.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timer: Option<DurationDistribution>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NodeKind {
    Start,
    End,
    Activity { activity: String },
    XorSplit,
    XorJoin,
    AndSplit,
    AndJoin,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    #[serde(flatten)]
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    /// Branch probability; only on edges leaving an XOR split.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrivalModel {
    pub inter_arrival: DurationDistribution,
    /// First case arrival; the simulation start instant when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_arrival: Option<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourcePool {
    pub id: String,
    pub size: u32,
    pub calendar: Vec<WorkingWindow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpsModel {
    pub name: String,
    pub activities: Vec<Activity>,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub arrival: ArrivalModel,
    pub pools: Vec<ResourcePool>,
}

impl BpsModel {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn activity(&self, label: &str) -> Option<&Activity> {
        self.activities.iter().find(|a| a.label == label)
    }

    pub fn activity_mut(&mut self, label: &str) -> Option<&mut Activity> {
        self.activities.iter_mut().find(|a| a.label == label)
    }

    pub fn pool(&self, id: &str) -> Option<&ResourcePool> {
        self.pools.iter().find(|p| p.id == id)
    }

    /// Checks every structural invariant and returns the indexed form used by
    /// the simulator.
    pub fn compile(&self) -> Result<CompiledModel> {
        CompiledModel::new(self)
    }
}

impl fmt::Display for BpsModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} activities, {} pools)",
            self.name,
            self.activities.len(),
            self.pools.len()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CompiledKind {
    Start,
    End,
    Activity(usize),
    XorSplit,
    XorJoin,
    AndSplit,
    AndJoin,
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledNode {
    pub kind: CompiledKind,
    pub successors: Vec<usize>,
    /// Cumulative branch probabilities for XOR splits, aligned with `successors`.
    pub cumulative: Vec<f64>,
    pub in_degree: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledActivity {
    pub label: String,
    pub duration: DurationDistribution,
    pub timer: Option<DurationDistribution>,
    pub pool: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct CompiledPool {
    pub id: String,
    pub size: usize,
    pub calendar: Calendar,
}

/// Index-based, validated form of a [`BpsModel`].
#[derive(Debug, Clone)]
pub struct CompiledModel {
    pub(crate) nodes: Vec<CompiledNode>,
    pub(crate) start: usize,
    pub(crate) activities: Vec<CompiledActivity>,
    pub(crate) pools: Vec<CompiledPool>,
    pub(crate) inter_arrival: DurationDistribution,
    pub(crate) first_arrival: Option<Timestamp>,
}

impl CompiledModel {
    fn new(model: &BpsModel) -> Result<Self> {
        let mut pool_index = HashMap::new();
        let mut pools = Vec::new();
        for pool in &model.pools {
            if pool.size == 0 {
                return Err(Error::Model(format!("pool `{}` has size 0", pool.id)));
            }
            let calendar = Calendar::new(&pool.calendar)
                .map_err(|e| Error::Model(format!("pool `{}`: {e}", pool.id)))?;
            if pool_index.insert(pool.id.clone(), pools.len()).is_some() {
                return Err(Error::Model(format!("duplicate pool `{}`", pool.id)));
            }
            pools.push(CompiledPool {
                id: pool.id.clone(),
                size: pool.size as usize,
                calendar,
            });
        }

        let mut activity_index = HashMap::new();
        let mut activities = Vec::new();
        for activity in &model.activities {
            if activity.label.is_empty() || activity.label == crate::event_log::DUMMY_ACTIVITY {
                return Err(Error::Model(format!(
                    "invalid activity label `{}`",
                    activity.label
                )));
            }
            activity.duration.validate()?;
            if let Some(timer) = &activity.timer {
                timer.validate()?;
            }
            let pool = *pool_index.get(&activity.pool).ok_or_else(|| {
                Error::Model(format!(
                    "activity `{}` refers to unknown pool `{}`",
                    activity.label, activity.pool
                ))
            })?;
            if activity_index
                .insert(activity.label.clone(), activities.len())
                .is_some()
            {
                return Err(Error::Model(format!(
                    "duplicate activity `{}`",
                    activity.label
                )));
            }
            activities.push(CompiledActivity {
                label: activity.label.clone(),
                duration: activity.duration.clone(),
                timer: activity.timer.clone(),
                pool,
            });
        }
        model.arrival.inter_arrival.validate()?;

        let mut node_index = HashMap::new();
        let mut nodes = Vec::new();
        let mut used_activities = BTreeSet::new();
        for node in &model.nodes {
            let kind = match &node.kind {
                NodeKind::Start => CompiledKind::Start,
                NodeKind::End => CompiledKind::End,
                NodeKind::Activity { activity } => {
                    let idx = *activity_index.get(activity).ok_or_else(|| {
                        Error::Model(format!(
                            "node `{}` refers to unknown activity `{activity}`",
                            node.id
                        ))
                    })?;
                    if !used_activities.insert(idx) {
                        return Err(Error::Model(format!(
                            "activity `{activity}` appears on more than one node"
                        )));
                    }
                    CompiledKind::Activity(idx)
                }
                NodeKind::XorSplit => CompiledKind::XorSplit,
                NodeKind::XorJoin => CompiledKind::XorJoin,
                NodeKind::AndSplit => CompiledKind::AndSplit,
                NodeKind::AndJoin => CompiledKind::AndJoin,
            };
            if node_index.insert(node.id.clone(), nodes.len()).is_some() {
                return Err(Error::Model(format!("duplicate node `{}`", node.id)));
            }
            nodes.push(CompiledNode {
                kind,
                successors: vec![],
                cumulative: vec![],
                in_degree: 0,
            });
        }

        let mut probabilities: Vec<Vec<f64>> = vec![vec![]; nodes.len()];
        for edge in &model.edges {
            let lookup = |id: &str| {
                node_index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::Model(format!("edge refers to unknown node `{id}`")))
            };
            let (from, to) = (lookup(&edge.from)?, lookup(&edge.to)?);
            nodes[from].successors.push(to);
            nodes[to].in_degree += 1;
            match (nodes[from].kind, edge.probability) {
                (CompiledKind::XorSplit, Some(p)) if p.is_finite() && (0.0..=1.0).contains(&p) => {
                    probabilities[from].push(p)
                }
                (CompiledKind::XorSplit, _) => {
                    return Err(Error::Model(format!(
                        "edge {} -> {} leaves an XOR split and needs a probability in [0, 1]",
                        edge.from, edge.to
                    )))
                }
                (_, Some(_)) => {
                    return Err(Error::Model(format!(
                        "edge {} -> {} carries a probability but does not leave an XOR split",
                        edge.from, edge.to
                    )))
                }
                _ => {}
            }
        }

        let starts: Vec<usize> = (0..nodes.len())
            .filter(|&i| nodes[i].kind == CompiledKind::Start)
            .collect();
        if starts.len() != 1 {
            return Err(Error::Model(format!(
                "model needs exactly one start node, found {}",
                starts.len()
            )));
        }
        if !nodes.iter().any(|n| n.kind == CompiledKind::End) {
            return Err(Error::Model("model has no end node".into()));
        }

        for (i, node) in nodes.iter_mut().enumerate() {
            let id = &model.nodes[i].id;
            let out = node.successors.len();
            let inn = node.in_degree;
            let shape_ok = match node.kind {
                CompiledKind::Start => out == 1 && inn == 0,
                CompiledKind::End => out == 0 && inn >= 1,
                CompiledKind::Activity(_) => out == 1 && inn == 1,
                CompiledKind::XorSplit | CompiledKind::AndSplit => out >= 2 && inn == 1,
                CompiledKind::XorJoin | CompiledKind::AndJoin => out == 1 && inn >= 2,
            };
            if !shape_ok {
                return Err(Error::Model(format!(
                    "node `{id}` ({:?}) has {inn} incoming and {out} outgoing edges",
                    node.kind
                )));
            }
            if node.kind == CompiledKind::XorSplit {
                let probs = &probabilities[i];
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
                    return Err(Error::Model(format!(
                        "branch probabilities of `{id}` sum to {sum}"
                    )));
                }
                let mut acc = 0.0;
                node.cumulative = probs
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect();
            }
        }

        let start = starts[0];
        let reachable = reachable_from(&nodes, start);
        if let Some(i) = (0..nodes.len()).find(|i| !reachable.contains(i)) {
            return Err(Error::Model(format!(
                "node `{}` is not reachable from the start node",
                model.nodes[i].id
            )));
        }
        check_and_pairs(&nodes, &model.nodes)?;

        Ok(Self {
            nodes,
            start,
            activities,
            pools,
            inter_arrival: model.arrival.inter_arrival.clone(),
            first_arrival: model.arrival.first_arrival,
        })
    }

    pub fn num_activities(&self) -> usize {
        self.activities.len()
    }

    /// Calendar of the named pool, in the local time of the simulation.
    pub fn calendar(&self, pool: &str) -> Option<&Calendar> {
        self.pools
            .iter()
            .find(|p| p.id == pool)
            .map(|p| &p.calendar)
    }
}

fn reachable_from(nodes: &[CompiledNode], from: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(n) = queue.pop_front() {
        for &s in &nodes[n].successors {
            if seen.insert(s) {
                queue.push_back(s);
            }
        }
    }
    seen
}

/// Every AND split must have a join, reachable from all of its branches,
/// whose in-degree equals the split's out-degree; AND splits and joins are
/// paired one-to-one.
fn check_and_pairs(nodes: &[CompiledNode], raw: &[Node]) -> Result<()> {
    let joins: BTreeSet<usize> = (0..nodes.len())
        .filter(|&i| nodes[i].kind == CompiledKind::AndJoin)
        .collect();
    let mut matched: BTreeMap<usize, usize> = BTreeMap::new();
    for split in (0..nodes.len()).filter(|&i| nodes[i].kind == CompiledKind::AndSplit) {
        // nearest join (by BFS depth) reachable from every branch
        let per_branch: Vec<BTreeMap<usize, usize>> = nodes[split]
            .successors
            .iter()
            .map(|&b| join_depths(nodes, b, split))
            .collect();
        let common = joins
            .iter()
            .filter(|j| per_branch.iter().all(|d| d.contains_key(j)))
            .min_by_key(|j| per_branch.iter().map(|d| d[j]).max().unwrap_or(0));
        let Some(&join) = common else {
            return Err(Error::Model(format!(
                "AND split `{}` has no matching AND join",
                raw[split].id
            )));
        };
        if nodes[join].in_degree != nodes[split].successors.len() {
            return Err(Error::Model(format!(
                "AND split `{}` has {} branches but its join `{}` has {} inputs",
                raw[split].id,
                nodes[split].successors.len(),
                raw[join].id,
                nodes[join].in_degree
            )));
        }
        if let Some(other) = matched.insert(join, split) {
            return Err(Error::Model(format!(
                "AND join `{}` closes both `{}` and `{}`",
                raw[join].id, raw[other].id, raw[split].id
            )));
        }
    }
    if let Some(&orphan) = joins.iter().find(|j| !matched.contains_key(j)) {
        return Err(Error::Model(format!(
            "AND join `{}` has no matching AND split",
            raw[orphan].id
        )));
    }
    Ok(())
}

fn join_depths(nodes: &[CompiledNode], from: usize, split: usize) -> BTreeMap<usize, usize> {
    let mut depth = BTreeMap::new();
    let mut seen = BTreeSet::from([from, split]);
    let mut queue = VecDeque::from([(from, 0usize)]);
    while let Some((n, d)) = queue.pop_front() {
        if nodes[n].kind == CompiledKind::AndJoin {
            depth.entry(n).or_insert(d);
        }
        for &s in &nodes[n].successors {
            if seen.insert(s) {
                queue.push_back((s, d + 1));
            }
        }
    }
    depth
}

/// Convenience for building calendars in code: the same window on each of
/// the given weekdays.
pub fn weekly_windows(days: &[Weekday], from: &str, to: &str) -> Vec<WorkingWindow> {
    days.iter()
        .map(|&day| WorkingWindow {
            day,
            from: from.to_string(),
            to: to.to_string(),
        })
        .collect()
}
