//! Synthetic sequences and evaluation for end-to-end checks of the
//! selection behaviour.

mod eval;
mod scenario;

use std::collections::BTreeMap;

pub use eval::{box_overlap, center_error, evaluate, EvalReport, RejectionStats, PRECISION_AT};
pub use scenario::{
    generate, to_pgm, Corruption, EventSpec, GroundTruth, Motion, Scenario, ScenarioSpec, TargetShape, TargetSpec,
};

use crate::error::Result;
use crate::tracker::{FrameResult, Tracker, TrackerConfig};

/// Everything produced by tracking one scenario.
#[derive(Debug, Clone)]
pub struct Run {
    pub results: Vec<FrameResult>,
    pub truth: GroundTruth,
    pub final_weights: BTreeMap<u64, f64>,
    pub report: EvalReport,
}

/// Tracks `scenario` from the ground-truth first position and evaluates
/// the outcome. Frames are rendered lazily.
pub fn simulate(scenario: &Scenario, config: &TrackerConfig) -> Result<Run> {
    let mut tracker = Tracker::new(config.clone())?;
    let truth = scenario.truth().clone();
    let mut results = Vec::with_capacity(scenario.len());
    results.push(tracker.initialize(&scenario.frame(1)?, truth.positions[0])?);
    for t in 2..=scenario.len() {
        results.push(tracker.step(&scenario.frame(t)?)?);
    }
    let final_weights = tracker.final_weights();
    let report = evaluate(&results, &truth, &final_weights, scenario.spec().target.size as f64)?;
    Ok(Run { results, truth, final_weights, report })
}
