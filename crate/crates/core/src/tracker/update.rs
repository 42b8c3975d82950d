//! Progressive multi-stage alternating optimisation.
//!
//! For each pace `lambda_1 < ... < lambda_N` the weights and the model are
//! minimised in turn: closed-form weights with the model fixed, then an
//! exact weighted refit with the weights fixed. Each stage starts from the
//! previous stage's model and weights.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::buffer::TrainingBuffer;
use crate::error::{Error, Result};
use crate::learner::{losses, Learner};
use crate::pacing::{regularizer_value, solve_weights_batch, RegularizerKind};
use crate::schedule::{PacingSchedule, StageTrace};

/// How sample weights are chosen before each refit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Selection {
    /// No selection: every weight equals its temporal prior.
    Baseline,
    SelfPaced(RegularizerKind),
}

impl Selection {
    pub fn name(&self) -> &'static str {
        match self {
            Selection::Baseline => "baseline",
            Selection::SelfPaced(kind) => kind.name(),
        }
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "baseline" {
            Ok(Selection::Baseline)
        } else {
            s.parse().map(Selection::SelfPaced)
        }
    }
}

impl TryFrom<String> for Selection {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Selection> for String {
    fn from(s: Selection) -> String {
        s.name().to_string()
    }
}

/// Parameters of one multi-stage update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateConfig {
    pub schedule: PacingSchedule,
    /// Cap on weight/model alternations per stage.
    pub acs_iters: usize,
    pub selection: Selection,
    /// A stage stops early once no weight moves by more than this.
    pub tolerance: f64,
}

impl UpdateConfig {
    pub fn new(schedule: PacingSchedule, acs_iters: usize, selection: Selection) -> Self {
        UpdateConfig { schedule, acs_iters, selection, tolerance: 1e-6 }
    }
}

/// Learner after the update, with one trace per stage.
#[derive(Debug, Clone)]
pub struct UpdateOutcome<L> {
    pub learner: L,
    pub traces: Vec<StageTrace>,
}

fn compose<L: Learner>(
    state: &L,
    weights: &[f64],
    losses: &[f64],
    buffer: &TrainingBuffer<L::Payload>,
    lambda: f64,
    xi: f64,
    kind: RegularizerKind,
) -> Result<f64> {
    let data: f64 = weights.iter().zip(losses).filter(|(v, _)| **v != 0.0).map(|(v, l)| v * l).sum();
    let pace = regularizer_value(weights, &buffer.rhos(), &buffer.confidences(), lambda, xi, kind)?;
    Ok(data + state.alpha() * state.regularization() + pace)
}

/// Runs every stage of the schedule over `buffer`, writing the final
/// weights back into it.
///
/// A stage whose pace admits no sample keeps the incoming model; if the
/// last stage admits none the update fails with [`Error::AllWeightsZero`].
pub fn multi_stage_update<L: Learner>(
    learner: &L,
    buffer: &mut TrainingBuffer<L::Payload>,
    cfg: &UpdateConfig,
) -> Result<UpdateOutcome<L>> {
    if buffer.is_empty() {
        return Err(Error::AllWeightsZero);
    }
    if cfg.acs_iters == 0 {
        return Err(Error::config("acs_iters", "must be a positive integer"));
    }
    match cfg.selection {
        Selection::Baseline => baseline_update(learner, buffer),
        Selection::SelfPaced(kind) => paced_update(learner, buffer, cfg, kind),
    }
}

fn baseline_update<L: Learner>(learner: &L, buffer: &mut TrainingBuffer<L::Payload>) -> Result<UpdateOutcome<L>> {
    let priors = buffer.rhos();
    buffer.set_weights(&priors)?;
    let data = |state: &L, losses: &[f64]| -> f64 {
        priors.iter().zip(losses).map(|(v, l)| v * l).sum::<f64>() + state.alpha() * state.regularization()
    };
    let before = data(learner, &losses(learner, buffer)?);
    let fitted = learner.refit(buffer)?;
    let after = data(&fitted, &losses(&fitted, buffer)?);
    let trace = StageTrace { stage: 1, lambda: 0.0, objectives: vec![before, after], weights: priors, iterations: 1 };
    Ok(UpdateOutcome { learner: fitted, traces: vec![trace] })
}

fn paced_update<L: Learner>(
    learner: &L,
    buffer: &mut TrainingBuffer<L::Payload>,
    cfg: &UpdateConfig,
    kind: RegularizerKind,
) -> Result<UpdateOutcome<L>> {
    let xi = cfg.schedule.xi;
    let lambdas = cfg.schedule.lambdas();
    let mut state = learner.clone();
    let mut current = losses(&state, buffer)?;
    let mut traces = Vec::with_capacity(lambdas.len());

    for (index, &lambda) in lambdas.iter().enumerate() {
        let last_stage = index + 1 == lambdas.len();
        let mut objectives = vec![compose(&state, &buffer.weights(), &current, buffer, lambda, xi, kind)?];
        let mut iterations = 0;

        for iter in 0..cfg.acs_iters {
            let previous = buffer.weights();
            let weights = solve_weights_batch(buffer, &current, lambda, xi, kind)?;
            objectives.push(compose(&state, &weights, &current, buffer, lambda, xi, kind)?);
            iterations += 1;

            if weights.iter().all(|&v| v == 0.0) {
                if last_stage {
                    return Err(Error::AllWeightsZero);
                }
                break;
            }
            let moved = previous.iter().zip(&weights).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if iter > 0 && moved < cfg.tolerance {
                break;
            }

            state = state.refit(buffer)?;
            current = losses(&state, buffer)?;
            objectives.push(compose(&state, &weights, &current, buffer, lambda, xi, kind)?);
        }

        traces.push(StageTrace { stage: index + 1, lambda, objectives, weights: buffer.weights(), iterations });
    }
    Ok(UpdateOutcome { learner: state, traces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::buffer::Sample;
    use crate::learner::{RidgeLearner, RidgeSample};

    fn line_buffer(outlier: Option<f64>) -> TrainingBuffer<RidgeSample> {
        let mut b = TrainingBuffer::new(16, 0.05).unwrap();
        for k in 0..10u64 {
            let x = k as f64 / 10.0;
            let y = match outlier {
                Some(o) if k == 4 => o,
                _ => 2.0 * x + 1.0,
            };
            b.push(Sample::new(k + 1, RidgeSample { x: vec![x, 1.0], y }).with_weight(1.0)).unwrap();
        }
        b.update_priors();
        b
    }

    #[test]
    fn outlier_is_excluded_at_every_stage() {
        let mut b = line_buffer(Some(40.0));
        let start = RidgeLearner::with_weights(vec![1.5, 1.2], 1e-8).unwrap();
        // pace stays far below the outlier loss at every stage
        let schedule = PacingSchedule::new(0.5, 1.5, 3, 0.0).unwrap();
        let cfg = UpdateConfig::new(schedule, 5, Selection::SelfPaced(RegularizerKind::TimeWeighted));
        let out = multi_stage_update(&start, &mut b, &cfg).unwrap();
        for t in &out.traces {
            assert_eq!(t.weights[4], 0.0, "stage {}", t.stage);
        }
        assert!((out.learner.weights()[0] - 2.0).abs() < 1e-3);
    }

    #[test]
    fn identical_samples_share_weight_over_prior() {
        let mut b = TrainingBuffer::new(8, 0.2).unwrap();
        for k in 0..5u64 {
            b.push(Sample::new(k + 1, RidgeSample { x: vec![1.0], y: 1.0 }).with_weight(1.0)).unwrap();
        }
        b.update_priors();
        let start = RidgeLearner::new(1, 0.1).unwrap();
        let cfg = UpdateConfig::new(PacingSchedule::new(2.0, 2.0, 3, 0.0).unwrap(), 4, Selection::SelfPaced(RegularizerKind::TimeWeighted));
        multi_stage_update(&start, &mut b, &cfg).unwrap();
        let ratios: Vec<f64> = b.iter().map(|s| s.weight / s.rho).collect();
        for r in &ratios {
            assert!((r - ratios[0]).abs() < 1e-12, "{ratios:?}");
        }
    }

    #[test]
    fn pace_admitting_nothing_fails() {
        let mut b = line_buffer(None);
        let start = RidgeLearner::with_weights(vec![-50.0, 30.0], 0.0).unwrap();
        let cfg = UpdateConfig::new(PacingSchedule::new(1e-6, 2.0, 2, 0.0).unwrap(), 2, Selection::SelfPaced(RegularizerKind::Plain));
        assert_eq!(multi_stage_update(&start, &mut b, &cfg).unwrap_err(), Error::AllWeightsZero);
    }

    #[test]
    fn baseline_uses_priors() {
        let mut b = line_buffer(Some(40.0));
        let start = RidgeLearner::new(2, 1e-3).unwrap();
        let cfg = UpdateConfig::new(PacingSchedule::new(1.0, 2.0, 3, 0.0).unwrap(), 1, Selection::Baseline);
        let out = multi_stage_update(&start, &mut b, &cfg).unwrap();
        assert_eq!(out.traces.len(), 1);
        assert_eq!(b.weights(), b.rhos());
    }

    #[test]
    fn selection_names_round_trip() {
        for name in ["baseline", "plain", "time-weighted", "detection-guided"] {
            assert_eq!(name.parse::<Selection>().unwrap().name(), name);
        }
    }
}
