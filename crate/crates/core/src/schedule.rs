use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric sequence of learning paces `lambda_n = mu^(n-1) * lambda0`,
/// plus the loss/confidence trade-off `xi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PacingSchedule {
    pub lambda0: f64,
    pub mu: f64,
    pub stages: usize,
    pub xi: f64,
}

impl Default for PacingSchedule {
    fn default() -> Self {
        PacingSchedule { lambda0: 0.005, mu: 1.5, stages: 3, xi: 0.02 }
    }
}

impl PacingSchedule {
    pub fn new(lambda0: f64, mu: f64, stages: usize, xi: f64) -> Result<Self> {
        let s = PacingSchedule { lambda0, mu, stages, xi };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0.is_finite() && self.lambda0 > 0.0) {
            return Err(Error::config("lambda0", format!("must satisfy lambda0 > 0, got {}", self.lambda0)));
        }
        if !(self.mu.is_finite() && self.mu > 1.0) {
            return Err(Error::config("mu", format!("must satisfy mu > 1, got {}", self.mu)));
        }
        if self.stages == 0 {
            return Err(Error::config("stages", "must satisfy stages >= 1"));
        }
        if !(self.xi.is_finite() && self.xi >= 0.0) {
            return Err(Error::config("xi", format!("must satisfy xi >= 0, got {}", self.xi)));
        }
        Ok(())
    }

    /// Pace of stage `n`, counting from 1.
    pub fn lambda(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        self.lambda0 * self.mu.powi(n as i32 - 1)
    }

    /// All `stages` paces, strictly increasing.
    pub fn lambdas(&self) -> Vec<f64> {
        (1..=self.stages).map(|n| self.lambda(n)).collect()
    }

    pub fn final_lambda(&self) -> f64 {
        self.lambda(self.stages)
    }

    pub fn with_lambda0(self, lambda0: f64) -> Result<Self> {
        PacingSchedule::new(lambda0, self.mu, self.stages, self.xi)
    }
}

/// Diagnostics of one stage of the alternating optimisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    /// Stage index, counting from 1.
    pub stage: usize,
    pub lambda: f64,
    /// Joint objective before the first half-step and after every half-step.
    pub objectives: Vec<f64>,
    /// Weight vector at the end of the stage, buffer order.
    pub weights: Vec<f64>,
    /// Alternations performed before convergence or the iteration cap.
    pub iterations: usize,
}

impl StageTrace {
    /// Number of samples with a positive weight.
    pub fn selected(&self) -> usize {
        self.weights.iter().filter(|&&v| v > 0.0).count()
    }

    /// Largest increase between consecutive objective values (0 when monotone).
    pub fn max_ascent(&self) -> f64 {
        self.objectives.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expands_to_exactly_n_increasing_values() {
        let s = PacingSchedule::new(0.5, 2.0, 4, 1.0).unwrap();
        assert_eq!(s.lambdas(), vec![0.5, 1.0, 2.0, 4.0]);
        assert_eq!(s.final_lambda(), 4.0);
    }

    #[test]
    fn rejects_mu_at_or_below_one() {
        let err = PacingSchedule::new(1.0, 0.9, 3, 1.0).unwrap_err();
        assert!(err.to_string().contains("mu > 1"), "{err}");
        assert!(PacingSchedule::new(1.0, 1.0, 3, 1.0).is_err());
    }

    #[test]
    fn rejects_degenerate_values() {
        assert!(PacingSchedule::new(0.0, 2.0, 3, 1.0).is_err());
        assert!(PacingSchedule::new(1.0, 2.0, 0, 1.0).is_err());
        assert!(PacingSchedule::new(1.0, 2.0, 3, -1.0).is_err());
    }

    #[test]
    fn ascent_is_zero_for_monotone_traces() {
        let t = StageTrace { stage: 1, lambda: 1.0, objectives: vec![3.0, 2.0, 2.0, 1.5], weights: vec![0.0, 0.3], iterations: 2 };
        assert_eq!(t.max_ascent(), 0.0);
        assert_eq!(t.selected(), 1);
    }
}
