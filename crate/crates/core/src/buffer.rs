//! Training samples and the bounded buffer that holds them.
//!
//! Every sample carries a temporal prior `rho`, a detection confidence and
//! a self-paced weight next to its learner-specific payload. The buffer keeps
//! samples ordered by id, maintains the exponentially decaying priors and
//! evicts the lowest-weight sample once it overflows its capacity.

use crate::error::{Error, Result};

/// One training instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<P> {
    /// Frame index; strictly increasing within a buffer.
    pub id: u64,
    /// Learner-specific features and label.
    pub payload: P,
    /// Temporal prior in (0, 1].
    pub rho: f64,
    /// Detection confidence, lower is more reliable.
    pub confidence: f64,
    /// Self-paced weight in [0, 1].
    pub weight: f64,
}

impl<P> Sample<P> {
    /// A fresh sample with full prior, zero confidence and zero weight.
    pub fn new(id: u64, payload: P) -> Self {
        Sample { id, payload, rho: 1.0, confidence: 0.0, weight: 0.0 }
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }
}

/// Checks the per-sample invariants: `0 <= weight <= 1`, `0 < rho <= 1`, `confidence >= 0`.
pub fn validate_sample<P>(s: &Sample<P>) -> Result<()> {
    if !(s.weight.is_finite() && (0.0..=1.0).contains(&s.weight)) {
        return Err(Error::invariant("v", format!("weight {} outside [0, 1]", s.weight)));
    }
    if !(s.rho.is_finite() && s.rho > 0.0 && s.rho <= 1.0) {
        return Err(Error::invariant("rho", format!("prior {} outside (0, 1]", s.rho)));
    }
    if !(s.confidence.is_finite() && s.confidence >= 0.0) {
        return Err(Error::invariant("c", format!("confidence {} is negative or non-finite", s.confidence)));
    }
    Ok(())
}

/// Bounded, id-ordered collection of samples.
///
/// A single pending sample may sit above capacity between [`push`] and
/// [`replace_if_full`]; that is the window in which the paced update runs
/// over `capacity + 1` samples before the weakest one is dropped.
///
/// [`push`]: TrainingBuffer::push
/// [`replace_if_full`]: TrainingBuffer::replace_if_full
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingBuffer<P> {
    samples: Vec<Sample<P>>,
    capacity: usize,
    eta: f64,
    normalize_priors: bool,
}

impl<P> TrainingBuffer<P> {
    /// `eta` is the temporal learning rate; it must lie in `[0, 1)` so the
    /// oldest prior stays strictly positive.
    pub fn new(capacity: usize, eta: f64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::config("capacity", "must be a positive integer"));
        }
        if !(eta.is_finite() && (0.0..1.0).contains(&eta)) {
            return Err(Error::config("eta", format!("must lie in [0, 1), got {eta}")));
        }
        Ok(TrainingBuffer { samples: Vec::new(), capacity, eta, normalize_priors: false })
    }

    /// Rescale priors to sum to one after each update instead of anchoring
    /// the newest sample at one. Off by default.
    pub fn with_normalized_priors(mut self, on: bool) -> Self {
        self.normalize_priors = on;
        self
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn normalizes_priors(&self) -> bool {
        self.normalize_priors
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Sample<P>] {
        &self.samples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Sample<P>> {
        self.samples.iter()
    }

    pub fn get(&self, index: usize) -> Option<&Sample<P>> {
        self.samples.get(index)
    }

    pub fn last(&self) -> Option<&Sample<P>> {
        self.samples.last()
    }

    pub fn last_mut(&mut self) -> Option<&mut Sample<P>> {
        self.samples.last_mut()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.weight).collect()
    }

    pub fn rhos(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.rho).collect()
    }

    pub fn confidences(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.confidence).collect()
    }

    pub fn ids(&self) -> Vec<u64> {
        self.samples.iter().map(|s| s.id).collect()
    }

    /// Overwrites every sample weight, validating the `[0, 1]` box.
    pub fn set_weights(&mut self, weights: &[f64]) -> Result<()> {
        if weights.len() != self.samples.len() {
            return Err(Error::LengthMismatch { expected: self.samples.len(), got: weights.len() });
        }
        if let Some(&bad) = weights.iter().find(|w| !(w.is_finite() && (0.0..=1.0).contains(*w))) {
            return Err(Error::invariant("v", format!("weight {bad} outside [0, 1]")));
        }
        for (s, &w) in self.samples.iter_mut().zip(weights) {
            s.weight = w;
        }
        Ok(())
    }

    /// Appends a sample. The id must exceed every id already held and the
    /// buffer may overflow its capacity by at most one pending sample.
    pub fn push(&mut self, sample: Sample<P>) -> Result<()> {
        validate_sample(&sample)?;
        if let Some(last) = self.samples.last() {
            if sample.id <= last.id {
                return Err(Error::invariant(
                    "id",
                    format!("id {} does not follow {}", sample.id, last.id),
                ));
            }
        }
        if self.samples.len() > self.capacity {
            return Err(Error::invariant("capacity", "buffer already holds a pending sample"));
        }
        self.samples.push(sample);
        Ok(())
    }

    /// Recomputes the temporal priors: the newest sample gets 1 and each
    /// older neighbour `(1 - eta)` times its successor's prior.
    pub fn update_priors(&mut self) {
        let decay = 1.0 - self.eta;
        let mut rho = 1.0;
        for s in self.samples.iter_mut().rev() {
            s.rho = rho;
            rho *= decay;
        }
        if self.normalize_priors {
            let total: f64 = self.samples.iter().map(|s| s.rho).sum();
            if total > 0.0 {
                for s in &mut self.samples {
                    s.rho /= total;
                }
            }
        }
    }

    /// Drops minimum-weight samples while the buffer exceeds capacity,
    /// oldest first among ties, and returns what was evicted.
    pub fn replace_if_full(&mut self) -> Vec<Sample<P>> {
        let mut evicted = Vec::new();
        while self.samples.len() > self.capacity {
            let mut victim = 0;
            for (i, s) in self.samples.iter().enumerate().skip(1) {
                // strict comparison keeps the earliest (oldest) of tied minima
                if s.weight < self.samples[victim].weight {
                    victim = i;
                }
            }
            evicted.push(self.samples.remove(victim));
        }
        evicted
    }
}

impl<'a, P> IntoIterator for &'a TrainingBuffer<P> {
    type Item = &'a Sample<P>;
    type IntoIter = std::slice::Iter<'a, Sample<P>>;

    fn into_iter(self) -> Self::IntoIter {
        self.samples.iter()
    }
}
