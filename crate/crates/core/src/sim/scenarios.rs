//! The loan-application baseline model and its seven perturbations.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::calendar::Weekday;
use super::model::{
    weekly_windows, Activity, ArrivalModel, BpsModel, DurationDistribution, Edge, Node, NodeKind,
    ResourcePool,
};

const MIN: f64 = 60.0;
const HOUR: f64 = 3600.0;

/// Activities that receive an extra timer in [`Scenario::Ext`].
pub const EXTRANEOUS_DELAY_ACTIVITIES: [&str; 4] = [
    "Assess eligibility",
    "Prepare acceptance pack",
    "Verify repayment agreement",
    "Approve application",
];

/// Activities run concurrently in the baseline and in sequence in SEQ.
pub const PARALLEL_ACTIVITIES: [&str; 3] = [
    "Check credit history",
    "Appraise property",
    "Assess loan risk",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "GT")]
    Gt,
    #[serde(rename = "SEQ")]
    Seq,
    #[serde(rename = "S-G")]
    SeqGateways,
    #[serde(rename = "ARR")]
    Arr,
    #[serde(rename = "DUR")]
    Dur,
    #[serde(rename = "RC")]
    Rc,
    #[serde(rename = "CAL")]
    Cal,
    #[serde(rename = "EXT")]
    Ext,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Gt,
        Scenario::Seq,
        Scenario::SeqGateways,
        Scenario::Arr,
        Scenario::Dur,
        Scenario::Rc,
        Scenario::Cal,
        Scenario::Ext,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Gt => "GT",
            Scenario::Seq => "SEQ",
            Scenario::SeqGateways => "S-G",
            Scenario::Arr => "ARR",
            Scenario::Dur => "DUR",
            Scenario::Rc => "RC",
            Scenario::Cal => "CAL",
            Scenario::Ext => "EXT",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::Gt => "baseline model",
            Scenario::Seq => "parallel credit, appraisal and risk checks run in sequence",
            Scenario::SeqGateways => "SEQ with shifted branching probabilities",
            Scenario::Arr => "mean inter-arrival time halved from 2h to 1h",
            Scenario::Dur => "every activity duration 50% longer",
            Scenario::Rc => "every resource pool halved (at least one resource)",
            Scenario::Cal => "working hours moved from 09:00-17:00 to 14:00-22:00",
            Scenario::Ext => "4-12h timer before four downstream activities",
        }
    }

    pub fn model(self) -> BpsModel {
        let mut model = baseline();
        match self {
            Scenario::Gt => {}
            Scenario::Seq => sequentialize(&mut model),
            Scenario::SeqGateways => {
                sequentialize(&mut model);
                set_probability(&mut model, "completeness", "missing", 0.6);
                set_probability(&mut model, "completeness", "credit", 0.4);
                set_probability(&mut model, "eligibility", "reject", 0.5);
                set_probability(&mut model, "eligibility", "prepare", 0.5);
                set_probability(&mut model, "agreement", "verify", 0.5);
                set_probability(&mut model, "agreement", "end_cancelled", 0.5);
            }
            Scenario::Arr => model.arrival.inter_arrival = DurationDistribution::exponential(HOUR),
            Scenario::Dur => {
                for a in &mut model.activities {
                    a.duration = a.duration.scaled(1.5);
                }
            }
            Scenario::Rc => {
                for p in &mut model.pools {
                    p.size = (p.size / 2).max(1);
                }
            }
            Scenario::Cal => {
                for p in &mut model.pools {
                    p.calendar = weekly_windows(&Weekday::WORKDAYS, "14:00", "22:00");
                }
            }
            Scenario::Ext => {
                for label in EXTRANEOUS_DELAY_ACTIVITIES {
                    let a = model.activity_mut(label).expect("baseline activity");
                    a.timer = Some(DurationDistribution::uniform(4.0 * HOUR, 12.0 * HOUR));
                }
            }
        }
        if self != Scenario::Gt {
            model.name = format!("loan-{}", self.name());
        }
        model
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase();
        let key = key.strip_prefix("LOAN_").unwrap_or(&key);
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == key || (key == "SG" && *sc == Scenario::SeqGateways))
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown scenario `{s}` (expected one of GT, SEQ, S-G, ARR, DUR, RC, CAL, EXT)"
                ))
            })
    }
}

/// Model of the named scenario.
pub fn scenario(name: &str) -> Result<BpsModel> {
    Ok(name.parse::<Scenario>()?.model())
}

fn activity(label: &str, pool: &str, duration: DurationDistribution) -> Activity {
    Activity {
        label: label.into(),
        duration,
        pool: pool.into(),
        timer: None,
    }
}

fn node(id: &str, kind: NodeKind) -> Node {
    Node {
        id: id.into(),
        kind,
    }
}

fn task(id: &str, label: &str) -> Node {
    node(
        id,
        NodeKind::Activity {
            activity: label.into(),
        },
    )
}

fn edge(from: &str, to: &str) -> Edge {
    Edge {
        from: from.into(),
        to: to.into(),
        probability: None,
    }
}

fn branch(from: &str, to: &str, p: f64) -> Edge {
    Edge {
        probability: Some(p),
        ..edge(from, to)
    }
}

fn pool(id: &str, size: u32) -> ResourcePool {
    ResourcePool {
        id: id.into(),
        size,
        calendar: weekly_windows(&Weekday::WORKDAYS, "09:00", "17:00"),
    }
}

/// Loan application handling: intake, a completeness loop, three parallel
/// checks, an eligibility decision and an offer that may be cancelled.
pub fn baseline() -> BpsModel {
    use DurationDistribution as D;

    let activities = vec![
        activity("Receive application", "intake", D::fixed(10.0 * MIN)),
        activity(
            "Check application completeness",
            "clerk",
            D::uniform(15.0 * MIN, 45.0 * MIN),
        ),
        Activity {
            timer: Some(D::uniform(12.0 * HOUR, 48.0 * HOUR)),
            ..activity(
                "Receive missing documents",
                "clerk",
                D::uniform(5.0 * MIN, 15.0 * MIN),
            )
        },
        activity(
            "Check credit history",
            "analyst",
            D::uniform(60.0 * MIN, 120.0 * MIN),
        ),
        activity(
            "Appraise property",
            "appraiser",
            D::normal(150.0 * MIN, 30.0 * MIN),
        ),
        activity("Assess loan risk", "analyst", D::exponential(60.0 * MIN)),
        activity(
            "Assess eligibility",
            "loan_officer",
            D::uniform(20.0 * MIN, 40.0 * MIN),
        ),
        activity(
            "Reject application",
            "loan_officer",
            D::uniform(10.0 * MIN, 20.0 * MIN),
        ),
        activity(
            "Prepare acceptance pack",
            "loan_officer",
            D::uniform(30.0 * MIN, 60.0 * MIN),
        ),
        activity(
            "Send acceptance pack",
            "clerk",
            D::uniform(10.0 * MIN, 20.0 * MIN),
        ),
        activity(
            "Verify repayment agreement",
            "loan_officer",
            D::uniform(20.0 * MIN, 40.0 * MIN),
        ),
        activity(
            "Approve application",
            "manager",
            D::uniform(10.0 * MIN, 30.0 * MIN),
        ),
    ];

    let nodes = vec![
        node("start", NodeKind::Start),
        task("receive", "Receive application"),
        node("recheck", NodeKind::XorJoin),
        task("check", "Check application completeness"),
        node("completeness", NodeKind::XorSplit),
        task("missing", "Receive missing documents"),
        node("fork", NodeKind::AndSplit),
        task("credit", "Check credit history"),
        task("appraise", "Appraise property"),
        task("risk", "Assess loan risk"),
        node("sync", NodeKind::AndJoin),
        task("assess", "Assess eligibility"),
        node("eligibility", NodeKind::XorSplit),
        task("reject", "Reject application"),
        node("end_rejected", NodeKind::End),
        task("prepare", "Prepare acceptance pack"),
        task("send", "Send acceptance pack"),
        node("agreement", NodeKind::XorSplit),
        task("verify", "Verify repayment agreement"),
        task("approve", "Approve application"),
        node("end_approved", NodeKind::End),
        node("end_cancelled", NodeKind::End),
    ];

    let edges = vec![
        edge("start", "receive"),
        edge("receive", "recheck"),
        edge("recheck", "check"),
        edge("check", "completeness"),
        branch("completeness", "missing", 0.2),
        branch("completeness", "fork", 0.8),
        edge("missing", "recheck"),
        edge("fork", "credit"),
        edge("fork", "appraise"),
        edge("fork", "risk"),
        edge("credit", "sync"),
        edge("appraise", "sync"),
        edge("risk", "sync"),
        edge("sync", "assess"),
        edge("assess", "eligibility"),
        branch("eligibility", "reject", 0.2),
        branch("eligibility", "prepare", 0.8),
        edge("reject", "end_rejected"),
        edge("prepare", "send"),
        edge("send", "agreement"),
        branch("agreement", "verify", 0.85),
        branch("agreement", "end_cancelled", 0.15),
        edge("verify", "approve"),
        edge("approve", "end_approved"),
    ];

    BpsModel {
        name: "loan".into(),
        activities,
        nodes,
        edges,
        arrival: ArrivalModel {
            inter_arrival: D::exponential(2.0 * HOUR),
            first_arrival: None,
        },
        pools: vec![
            pool("intake", 2),
            pool("clerk", 6),
            pool("analyst", 48),
            pool("appraiser", 48),
            pool("loan_officer", 8),
            pool("manager", 2),
        ],
    }
}

/// Replaces the AND split/join around the three checks by a chain.
fn sequentialize(model: &mut BpsModel) {
    for e in &mut model.edges {
        if e.to == "fork" {
            e.to = "credit".into();
        }
    }
    model.nodes.retain(|n| n.id != "fork" && n.id != "sync");
    model
        .edges
        .retain(|e| e.from != "fork" && e.from != "sync" && e.to != "sync");
    model.edges.extend([
        edge("credit", "appraise"),
        edge("appraise", "risk"),
        edge("risk", "assess"),
    ]);
}

fn set_probability(model: &mut BpsModel, from: &str, to: &str, p: f64) {
    let e = model
        .edges
        .iter_mut()
        .find(|e| e.from == from && e.to == to)
        .unwrap_or_else(|| panic!("no edge {from} -> {to}"));
    e.probability = Some(p);
}
