//! Online tracking loop with progressive sample selection.
//!
//! Each frame: locate the target at the response argmax, extract a new
//! sample there, score its detection confidence, refresh the temporal
//! priors, run the multi-stage update on the configured interval and
//! finally evict the weakest sample if the buffer overflowed.

mod update;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use update::{multi_stage_update, Selection, UpdateConfig, UpdateOutcome};

use crate::buffer::{Sample, TrainingBuffer};
use crate::confidence::{detection_confidence, ConfidenceConfig};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::learner::{gaussian_response, hann_window, preprocess, CorrelationFilterLearner, FilterSample, Learner};
use crate::pacing::solve_weight;
use crate::schedule::{PacingSchedule, StageTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    pub schedule: PacingSchedule,
    pub confidence: ConfidenceConfig,
    /// Buffer capacity `T`.
    pub capacity: usize,
    /// Temporal learning rate.
    pub eta: f64,
    /// Frames between model updates.
    pub update_interval: usize,
    /// Weight/model alternations per stage.
    pub acs_iters: usize,
    pub selection: Selection,
    pub alpha: f64,
    /// Side of the square search window, in pixels.
    pub patch_size: usize,
    /// Bandwidth of the desired response; `None` means `patch_size / 16`.
    pub sigma: Option<f64>,
    /// Replace `lambda0` by the median buffer loss at the first update.
    pub auto_lambda: bool,
    pub normalize_priors: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            schedule: PacingSchedule::default(),
            confidence: ConfidenceConfig::default(),
            capacity: 50,
            eta: 0.025,
            update_interval: 6,
            acs_iters: 1,
            selection: Selection::SelfPaced(crate::pacing::RegularizerKind::DetectionGuided),
            alpha: 0.01,
            patch_size: 64,
            sigma: None,
            auto_lambda: false,
            normalize_priors: false,
        }
    }
}

impl TrackerConfig {
    /// Parses and validates a TOML config; omitted fields keep their defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: TrackerConfig = toml::from_str(text).map_err(|e| Error::config("toml", e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        self.confidence.validate()?;
        if self.capacity == 0 {
            return Err(Error::config("capacity", "must be a positive integer"));
        }
        if !(self.eta.is_finite() && (0.0..1.0).contains(&self.eta)) {
            return Err(Error::config("eta", format!("must satisfy 0 <= eta < 1, got {}", self.eta)));
        }
        if self.update_interval == 0 {
            return Err(Error::config("interval", "must be a positive integer"));
        }
        if self.acs_iters == 0 {
            return Err(Error::config("acs_iters", "must be a positive integer"));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::config("alpha", format!("must satisfy alpha > 0, got {}", self.alpha)));
        }
        if self.patch_size < 8 {
            return Err(Error::config("patch_size", "must be at least 8"));
        }
        if let Some(sigma) = self.sigma {
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(Error::config("sigma", format!("must be positive, got {sigma}")));
            }
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.sigma.unwrap_or(self.patch_size as f64 / 16.0)
    }
}

/// Outcome of one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameResult {
    pub frame: u64,
    /// Predicted target centre `(x, y)`.
    pub position: (usize, usize),
    pub confidence: f64,
    /// `(sample id, weight)` for every buffered sample after the frame.
    pub weights: Vec<(u64, f64)>,
    /// Empty unless the model was updated on this frame.
    pub stages: Vec<StageTrace>,
}

impl FrameResult {
    pub fn updated(&self) -> bool {
        !self.stages.is_empty()
    }
}

#[derive(Debug, Clone)]
struct Located {
    position: (usize, usize),
    frame_size: (usize, usize),
}

/// Correlation-filter tracker with self-paced sample selection.
#[derive(Debug, Clone)]
pub struct Tracker {
    config: TrackerConfig,
    schedule: PacingSchedule,
    learner: CorrelationFilterLearner,
    buffer: TrainingBuffer<FilterSample>,
    window: Grid,
    label: Grid,
    state: Option<Located>,
    frame: u64,
    paced_once: bool,
    retired: BTreeMap<u64, f64>,
}

impl Tracker {
    pub fn new(config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        let m = config.patch_size;
        let buffer = TrainingBuffer::new(config.capacity, config.eta)?.with_normalized_priors(config.normalize_priors);
        Ok(Tracker {
            schedule: config.schedule,
            learner: CorrelationFilterLearner::new(m, config.alpha)?,
            buffer,
            window: hann_window(m),
            label: gaussian_response(m, config.sigma(), m / 2, m / 2),
            state: None,
            frame: 0,
            paced_once: false,
            retired: BTreeMap::new(),
            config,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    /// Schedule in effect; differs from the configured one after auto-scaling.
    pub fn schedule(&self) -> &PacingSchedule {
        &self.schedule
    }

    pub fn learner(&self) -> &CorrelationFilterLearner {
        &self.learner
    }

    pub fn buffer(&self) -> &TrainingBuffer<FilterSample> {
        &self.buffer
    }

    pub fn position(&self) -> Option<(usize, usize)> {
        self.state.as_ref().map(|s| s.position)
    }

    pub fn frame_index(&self) -> u64 {
        self.frame
    }

    /// Final weight of every sample seen so far: the weight at eviction for
    /// retired samples, the current weight for buffered ones.
    pub fn final_weights(&self) -> BTreeMap<u64, f64> {
        let mut all = self.retired.clone();
        for s in &self.buffer {
            all.insert(s.id, s.weight);
        }
        all
    }

    fn check_frame(frame: &Grid) -> Result<()> {
        if frame.is_empty() {
            return Err(Error::EmptyFrame);
        }
        if frame.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("frame"));
        }
        Ok(())
    }

    fn extract(&self, frame: &Grid, at: (usize, usize)) -> Result<FilterSample> {
        let patch = frame.window(at.0 as isize, at.1 as isize, self.config.patch_size);
        self.learner.sample(preprocess(&patch, &self.window), self.label.clone())
    }

    /// Bootstraps on the first frame with the ground-truth position; the
    /// first sample enters with full weight and no selection.
    pub fn initialize(&mut self, frame: &Grid, position: (usize, usize)) -> Result<FrameResult> {
        Self::check_frame(frame)?;
        if position.0 >= frame.width() || position.1 >= frame.height() {
            return Err(Error::invariant("position", "initial position outside the frame"));
        }
        self.frame = 1;
        let sample = Sample::new(1, self.extract(frame, position)?).with_weight(1.0);
        self.buffer.push(sample)?;
        self.buffer.update_priors();
        self.learner = self.learner.refit(&self.buffer)?;
        self.state = Some(Located { position, frame_size: (frame.width(), frame.height()) });
        Ok(FrameResult { frame: 1, position, confidence: 0.0, weights: self.snapshot(), stages: Vec::new() })
    }

    fn snapshot(&self) -> Vec<(u64, f64)> {
        self.buffer.iter().map(|s| (s.id, s.weight)).collect()
    }

    fn provisional_weight(&self, loss: f64, confidence: f64, rho: f64) -> Result<f64> {
        match self.config.selection {
            Selection::Baseline => Ok(rho),
            Selection::SelfPaced(kind) => {
                solve_weight(kind, loss, confidence, rho, self.schedule.final_lambda(), self.schedule.xi)
            }
        }
    }

    /// Processes the next frame.
    pub fn step(&mut self, frame: &Grid) -> Result<FrameResult> {
        let located = self.state.clone().ok_or(Error::NotInitialized)?;
        Self::check_frame(frame)?;
        if (frame.width(), frame.height()) != located.frame_size {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", located.frame_size.0, located.frame_size.1),
                got: format!("{}x{}", frame.width(), frame.height()),
            });
        }
        self.frame += 1;
        let t = self.frame;
        let m = self.config.patch_size;

        // locate
        let (px, py) = located.position;
        let search = self.extract(frame, (px, py))?;
        let response = self.learner.respond_sample(&search)?;
        let (ax, ay) = response.grid().argmax();
        let dx = ax as isize - (m / 2) as isize;
        let dy = ay as isize - (m / 2) as isize;
        let position = (
            (px as isize + dx).clamp(0, frame.width() as isize - 1) as usize,
            (py as isize + dy).clamp(0, frame.height() as isize - 1) as usize,
        );
        let confidence = detection_confidence(&response, &self.config.confidence)?;

        // new sample at the predicted position
        let payload = self.extract(frame, position)?;
        let loss = self.learner.loss(&payload)?;
        self.buffer.push(Sample::new(t, payload).with_confidence(confidence))?;
        self.buffer.update_priors();
        let rho = self.buffer.last().map(|s| s.rho).unwrap_or(1.0);
        let provisional = self.provisional_weight(loss, confidence, rho)?;
        if let Some(newest) = self.buffer.last_mut() {
            newest.weight = provisional;
        }

        let mut stages = Vec::new();
        if t % self.config.update_interval as u64 == 0 {
            if self.config.auto_lambda && !self.paced_once {
                let mut current = crate::learner::losses(&self.learner, &self.buffer)?;
                current.sort_by(f64::total_cmp);
                let median = current[current.len() / 2];
                if median > 0.0 {
                    self.schedule = self.schedule.with_lambda0(median)?;
                }
            }
            self.paced_once = true;
            let cfg = UpdateConfig::new(self.schedule, self.config.acs_iters, self.config.selection);
            let outcome = multi_stage_update(&self.learner, &mut self.buffer, &cfg)?;
            self.learner = outcome.learner;
            stages = outcome.traces;
        }

        for gone in self.buffer.replace_if_full() {
            self.retired.insert(gone.id, gone.weight);
        }
        self.state = Some(Located { position, ..located });
        Ok(FrameResult { frame: t, position, confidence, weights: self.snapshot(), stages })
    }
}
