//! Seeded discrete-event simulation of business process models.

pub mod calendar;
pub mod engine;
pub mod model;
pub mod scenarios;

pub use calendar::{Calendar, Weekday, WorkingWindow};
pub use engine::{
    simulate, simulate_detailed, ScheduledActivity, SimulationConfig, SimulationOutput,
    STEP_BUDGET_PER_CASE,
};
pub use model::{
    weekly_windows, Activity, ArrivalModel, BpsModel, CompiledModel, DurationDistribution, Edge,
    Node, NodeKind, ResourcePool,
};
pub use scenarios::{baseline, scenario, Scenario};
