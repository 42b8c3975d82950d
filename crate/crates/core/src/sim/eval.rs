//! Tracking accuracy and corruption-rejection metrics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::scenario::GroundTruth;
use crate::tracker::FrameResult;

/// Centre-error thresholds of the precision curve, pixels.
pub const PRECISION_THRESHOLDS: usize = 50;
/// Pixel threshold of the headline precision score.
pub const PRECISION_AT: f64 = 20.0;
/// Number of overlap thresholds in `[0, 1]` for the success curve.
pub const SUCCESS_STEPS: usize = 20;

/// Final-weight statistics split by ground-truth corruption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionStats {
    pub corrupted_frames: usize,
    pub clean_frames: usize,
    /// `None` when there are no frames of that kind.
    pub mean_weight_corrupted: Option<f64>,
    pub mean_weight_clean: Option<f64>,
    /// Fraction of corrupted frames whose final weight is exactly zero.
    pub corrupted_rejected_fraction: Option<f64>,
    pub clean_rejected_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub frames: usize,
    /// Thresholds `0, 1, ..., 50` px.
    pub precision_thresholds: Vec<f64>,
    /// Fraction of frames with centre error at or below each threshold.
    pub precision: Vec<f64>,
    pub precision_at_20: f64,
    /// Overlap thresholds `0, 0.05, ..., 1`.
    pub success_thresholds: Vec<f64>,
    /// Fraction of frames whose box overlap exceeds each threshold.
    pub success: Vec<f64>,
    /// Mean of the success curve. Boxes have a fixed size, so this is a
    /// function of centre error only.
    pub auc: f64,
    pub mean_center_error: f64,
    pub rejection: RejectionStats,
}

pub fn center_error(a: (usize, usize), b: (usize, usize)) -> f64 {
    let dx = a.0 as f64 - b.0 as f64;
    let dy = a.1 as f64 - b.1 as f64;
    (dx * dx + dy * dy).sqrt()
}

/// Intersection over union of two `side`x`side` boxes centred at `a` and `b`.
pub fn box_overlap(a: (usize, usize), b: (usize, usize), side: f64) -> f64 {
    let ix = (side - (a.0 as f64 - b.0 as f64).abs()).max(0.0);
    let iy = (side - (a.1 as f64 - b.1 as f64).abs()).max(0.0);
    let inter = ix * iy;
    inter / (2.0 * side * side - inter)
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn zero_fraction(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().filter(|&&v| v == 0.0).count() as f64 / values.len() as f64)
}

/// Scores `results` against `truth`. Results must cover every frame in
/// order; `final_weights` maps frame ids to the sample's final weight.
pub fn evaluate(
    results: &[FrameResult],
    truth: &GroundTruth,
    final_weights: &BTreeMap<u64, f64>,
    box_side: f64,
) -> Result<EvalReport> {
    if results.len() != truth.len() {
        return Err(Error::LengthMismatch { expected: truth.len(), got: results.len() });
    }
    if let Some((i, r)) = results.iter().enumerate().find(|(i, r)| r.frame != *i as u64 + 1) {
        return Err(Error::invariant("frame", format!("result {i} carries frame id {}", r.frame)));
    }
    let errors: Vec<f64> =
        results.iter().zip(&truth.positions).map(|(r, &p)| center_error(r.position, p)).collect();
    let overlaps: Vec<f64> =
        results.iter().zip(&truth.positions).map(|(r, &p)| box_overlap(r.position, p, box_side)).collect();
    let n = results.len() as f64;

    let precision_thresholds: Vec<f64> = (0..=PRECISION_THRESHOLDS).map(|t| t as f64).collect();
    let precision_at = |tau: f64| errors.iter().filter(|&&e| e <= tau).count() as f64 / n;
    let precision = precision_thresholds.iter().map(|&tau| precision_at(tau)).collect();

    let success_thresholds: Vec<f64> = (0..=SUCCESS_STEPS).map(|i| i as f64 / SUCCESS_STEPS as f64).collect();
    let success: Vec<f64> = success_thresholds
        .iter()
        .map(|&o| overlaps.iter().filter(|&&v| v > o).count() as f64 / n)
        .collect();
    let auc = success.iter().sum::<f64>() / success.len() as f64;

    let mut corrupted = Vec::new();
    let mut clean = Vec::new();
    for (i, &flag) in truth.corrupted.iter().enumerate() {
        if let Some(&w) = final_weights.get(&(i as u64 + 1)) {
            if flag {
                corrupted.push(w);
            } else {
                clean.push(w);
            }
        }
    }

    Ok(EvalReport {
        frames: results.len(),
        precision_thresholds,
        precision,
        precision_at_20: precision_at(PRECISION_AT),
        success_thresholds,
        success,
        auc,
        mean_center_error: errors.iter().sum::<f64>() / n,
        rejection: RejectionStats {
            corrupted_frames: corrupted.len(),
            clean_frames: clean.len(),
            mean_weight_corrupted: mean(&corrupted),
            mean_weight_clean: mean(&clean),
            corrupted_rejected_fraction: zero_fraction(&corrupted),
            clean_rejected_fraction: zero_fraction(&clean),
        },
    })
}
