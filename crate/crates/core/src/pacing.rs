//! Self-paced regularizers and their closed-form weight solutions.
//!
//! With the model fixed, the weight subproblem is separable and each
//! coordinate minimises
//!
//! ```text
//! v * l + lambda * (v^2 / (2 rho) - v) + xi * c * v      over v in [0, 1]
//! ```
//!
//! whose minimiser is `rho * (1 - (l + xi c) / lambda)` when
//! `l + xi c < lambda` and `0` otherwise. The plain regularizer is the
//! special case `rho = 1, xi = 0`; the time-weighted one is `xi = 0`.
//!
//! [`oracle`] re-derives the same minimiser from objective evaluations alone
//! and is used by the test suites and the `verify` command.

use serde::{Deserialize, Serialize};

use crate::buffer::TrainingBuffer;
use crate::error::{Error, Result};
use crate::schedule::PacingSchedule;

/// Which self-paced regularizer drives the weight update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegularizerKind {
    /// Linear weighting, every sample equally important.
    Plain,
    /// Linear weighting scaled by the temporal prior.
    TimeWeighted,
    /// Time-weighted plus a linear penalty on detection confidence.
    DetectionGuided,
}

impl RegularizerKind {
    pub const ALL: [RegularizerKind; 3] =
        [RegularizerKind::Plain, RegularizerKind::TimeWeighted, RegularizerKind::DetectionGuided];

    pub fn name(&self) -> &'static str {
        match self {
            RegularizerKind::Plain => "plain",
            RegularizerKind::TimeWeighted => "time-weighted",
            RegularizerKind::DetectionGuided => "detection-guided",
        }
    }
}

impl std::fmt::Display for RegularizerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RegularizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(RegularizerKind::Plain),
            "time-weighted" | "time" => Ok(RegularizerKind::TimeWeighted),
            "detection-guided" | "guided" => Ok(RegularizerKind::DetectionGuided),
            other => Err(Error::config("kind", format!("unknown regularizer `{other}`"))),
        }
    }
}

fn check_loss(l: f64) -> Result<()> {
    if !l.is_finite() {
        return Err(Error::NonFinite("loss"));
    }
    if l < 0.0 {
        return Err(Error::invariant("l", format!("loss {l} is negative")));
    }
    Ok(())
}

fn check_pace(lambda: f64) -> Result<()> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite("lambda"));
    }
    if lambda <= 0.0 {
        return Err(Error::NonPositivePace(lambda));
    }
    Ok(())
}

fn check_prior(rho: f64) -> Result<()> {
    if !(rho.is_finite() && rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidPrior(rho));
    }
    Ok(())
}

fn check_nonneg(value: f64, field: &'static str) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite(field));
    }
    if value < 0.0 {
        return Err(Error::invariant(field, format!("{value} is negative")));
    }
    Ok(())
}

/// `1 - l / lambda` below the pace, `0` at or above it.
pub fn solve_weight_plain(l: f64, lambda: f64) -> Result<f64> {
    check_loss(l)?;
    check_pace(lambda)?;
    Ok(if l < lambda { 1.0 - l / lambda } else { 0.0 })
}

/// `rho * (1 - l / lambda)` below the pace, `0` at or above it.
pub fn solve_weight_time(l: f64, rho: f64, lambda: f64) -> Result<f64> {
    check_loss(l)?;
    check_prior(rho)?;
    check_pace(lambda)?;
    Ok(if l < lambda { rho * (1.0 - l / lambda) } else { 0.0 })
}

/// `rho * (1 - (l + xi c) / lambda)` while `l + xi c < lambda`, else `0`.
pub fn solve_weight_guided(l: f64, c: f64, rho: f64, lambda: f64, xi: f64) -> Result<f64> {
    check_loss(l)?;
    check_nonneg(c, "c")?;
    check_prior(rho)?;
    check_pace(lambda)?;
    check_nonneg(xi, "xi")?;
    let effective = l + xi * c;
    Ok(if effective < lambda { rho * (1.0 - effective / lambda) } else { 0.0 })
}

/// Dispatches to the solver matching `kind`; unused inputs are ignored.
pub fn solve_weight(kind: RegularizerKind, l: f64, c: f64, rho: f64, lambda: f64, xi: f64) -> Result<f64> {
    match kind {
        RegularizerKind::Plain => solve_weight_plain(l, lambda),
        RegularizerKind::TimeWeighted => solve_weight_time(l, rho, lambda),
        RegularizerKind::DetectionGuided => solve_weight_guided(l, c, rho, lambda, xi),
    }
}

fn check_aligned(expected: usize, others: &[usize]) -> Result<()> {
    match others.iter().find(|&&n| n != expected) {
        Some(&got) => Err(Error::LengthMismatch { expected, got }),
        None => Ok(()),
    }
}

/// Element-wise weight solution over aligned slices.
pub fn solve_weights(
    losses: &[f64],
    rhos: &[f64],
    confidences: &[f64],
    lambda: f64,
    xi: f64,
    kind: RegularizerKind,
) -> Result<Vec<f64>> {
    check_aligned(losses.len(), &[rhos.len(), confidences.len()])?;
    losses
        .iter()
        .zip(rhos)
        .zip(confidences)
        .map(|((&l, &rho), &c)| solve_weight(kind, l, c, rho, lambda, xi))
        .collect()
}

/// Solves the weights for every sample in `buffer` given aligned `losses`
/// and writes them back into the samples.
pub fn solve_weights_batch<P>(
    buffer: &mut TrainingBuffer<P>,
    losses: &[f64],
    lambda: f64,
    xi: f64,
    kind: RegularizerKind,
) -> Result<Vec<f64>> {
    if losses.len() != buffer.len() {
        return Err(Error::LengthMismatch { expected: buffer.len(), got: losses.len() });
    }
    let weights = solve_weights(losses, &buffer.rhos(), &buffer.confidences(), lambda, xi, kind)?;
    buffer.set_weights(&weights)?;
    Ok(weights)
}

/// Weights at every pace of `schedule` with the losses held fixed.
pub fn progressive_weights(
    losses: &[f64],
    rhos: &[f64],
    confidences: &[f64],
    schedule: &PacingSchedule,
    kind: RegularizerKind,
) -> Result<Vec<Vec<f64>>> {
    schedule
        .lambdas()
        .into_iter()
        .map(|lambda| solve_weights(losses, rhos, confidences, lambda, schedule.xi, kind))
        .collect()
}

/// Value of the selection regularizer `f(v; lambda)` for `kind`.
pub fn regularizer_value(
    weights: &[f64],
    rhos: &[f64],
    confidences: &[f64],
    lambda: f64,
    xi: f64,
    kind: RegularizerKind,
) -> Result<f64> {
    check_aligned(weights.len(), &[rhos.len(), confidences.len()])?;
    let value = match kind {
        RegularizerKind::Plain => lambda * weights.iter().map(|&v| 0.5 * v * v - v).sum::<f64>(),
        RegularizerKind::TimeWeighted => {
            lambda * weights.iter().zip(rhos).map(|(&v, &rho)| 0.5 * v * v / rho - v).sum::<f64>()
        }
        RegularizerKind::DetectionGuided => {
            let paced: f64 = weights.iter().zip(rhos).map(|(&v, &rho)| 0.5 * v * v / rho - v).sum();
            let penalty: f64 = weights.iter().zip(confidences).map(|(&v, &c)| c * v).sum();
            lambda * paced + xi * penalty
        }
    };
    Ok(value)
}

/// Derivative-free reference minimiser of the weight subproblem.
///
/// Works only with evaluations of the full objective: each coordinate is
/// located on a dense grid over `[0, 1]`, refined by the vertex of the
/// parabola through the three bracketing grid points, and the best of
/// {grid point, clamped vertex, 0, 1} is kept. Sweeps repeat to a fixed
/// point. Meant for instances of at most a hundred samples.
pub mod oracle {
    use crate::error::{Error, Result};

    const GRID: usize = 200;
    const MAX_SWEEPS: usize = 50;

    /// Objective of the weight subproblem with the detection-guided
    /// regularizer; plain and time-weighted follow with `rho = 1` / `xi = 0`.
    pub fn weight_objective(v: &[f64], losses: &[f64], rhos: &[f64], cs: &[f64], lambda: f64, xi: f64) -> f64 {
        let mut total = 0.0;
        for k in 0..v.len() {
            total += v[k] * losses[k] + lambda * (0.5 * v[k] * v[k] / rhos[k] - v[k]) + xi * cs[k] * v[k];
        }
        total
    }

    fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<f64> {
        let d1 = (y[1] - y[0]) / (x[1] - x[0]);
        let d2 = (y[2] - y[1]) / (x[2] - x[1]);
        let curvature = (d2 - d1) / (x[2] - x[0]);
        if curvature <= 0.0 || !curvature.is_finite() {
            return None;
        }
        // vertex of the interpolating quadratic
        Some(0.5 * (x[0] + x[1]) - d1 / (2.0 * curvature))
    }

    pub fn oracle_minimize_weights(
        losses: &[f64],
        rhos: &[f64],
        cs: &[f64],
        lambda: f64,
        xi: f64,
    ) -> Result<Vec<f64>> {
        let t = losses.len();
        if rhos.len() != t || cs.len() != t {
            return Err(Error::LengthMismatch { expected: t, got: rhos.len().min(cs.len()) });
        }
        let mut v = vec![0.0; t];
        let mut probe = v.clone();
        for _ in 0..MAX_SWEEPS {
            let mut moved: f64 = 0.0;
            for k in 0..t {
                probe.copy_from_slice(&v);
                let mut at = |x: f64| {
                    probe[k] = x;
                    weight_objective(&probe, losses, rhos, cs, lambda, xi)
                };

                let grid: Vec<f64> = (0..=GRID).map(|i| i as f64 / GRID as f64).collect();
                let values: Vec<f64> = grid.iter().map(|&x| at(x)).collect();
                let mut best = 0;
                for i in 1..=GRID {
                    if values[i] < values[best] {
                        best = i;
                    }
                }

                let mid = best.clamp(1, GRID - 1);
                let xs = [grid[mid - 1], grid[mid], grid[mid + 1]];
                let ys = [values[mid - 1], values[mid], values[mid + 1]];
                let mut candidates = vec![grid[best], 0.0, 1.0];
                if let Some(x) = parabola_vertex(xs, ys) {
                    candidates.push(x.clamp(0.0, 1.0));
                }
                let mut chosen = candidates[0];
                let mut chosen_value = at(chosen);
                for &x in &candidates[1..] {
                    let value = at(x);
                    if value < chosen_value {
                        chosen = x;
                        chosen_value = value;
                    }
                }
                moved = moved.max((chosen - v[k]).abs());
                v[k] = chosen;
            }
            if moved < 1e-15 {
                break;
            }
        }
        Ok(v)
    }
}

pub use oracle::oracle_minimize_weights;
