//! Detection confidence from the shape of a response map.
//!
//! A reliable detection shows one strong, isolated peak. The peak ratio
//! compares the best response outside a suppression zone around the
//! primary peak with the primary peak itself; a sharp strong peak yields
//! confidence 0, anything else yields the ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ResponseMap;

/// Thresholds for [`detection_confidence`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfidenceConfig {
    /// Peak-ratio threshold, in (0, 1).
    pub beta1: f64,
    /// Primary-peak magnitude threshold, in response units.
    pub beta2: f64,
    /// Chebyshev radius excluded around the primary peak. `None` picks
    /// a tenth of the smaller map side, at least 3.
    pub suppression_radius: Option<usize>,
}

impl Default for ConfidenceConfig {
    fn default() -> Self {
        ConfidenceConfig { beta1: 0.4, beta2: 0.25, suppression_radius: None }
    }
}

impl ConfidenceConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) {
            return Err(Error::config("beta1", format!("must satisfy 0 < beta1 < 1, got {}", self.beta1)));
        }
        if !(self.beta2.is_finite() && self.beta2 > 0.0) {
            return Err(Error::config("beta2", format!("must satisfy beta2 > 0, got {}", self.beta2)));
        }
        if self.suppression_radius == Some(0) {
            return Err(Error::config("suppression_radius", "must be at least 1"));
        }
        Ok(())
    }

    pub fn radius_for(&self, map: &ResponseMap) -> usize {
        self.suppression_radius.unwrap_or_else(|| default_radius(map.width(), map.height()))
    }
}

pub fn default_radius(width: usize, height: usize) -> usize {
    (width.min(height) / 10).max(3)
}

/// Primary and secondary peaks of a response map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peaks {
    pub primary: f64,
    pub primary_at: (usize, usize),
    pub secondary: f64,
    pub secondary_at: (usize, usize),
}

fn wrapped_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

/// Global maximum, then the maximum over cells whose toroidal Chebyshev
/// distance from it exceeds `radius`. Ties go to the first cell in
/// row-major order.
pub fn find_two_peaks(map: &ResponseMap, radius: usize) -> Result<Peaks> {
    let (w, h) = (map.width(), map.height());
    // each side must leave at least one column/row outside the zone
    if w < 2 * radius + 2 || h < 2 * radius + 2 {
        return Err(Error::MapTooSmall { width: w, height: h, radius });
    }
    let primary_at = map.grid().argmax();
    let primary = map.get(primary_at.0, primary_at.1);

    let mut secondary = f64::NEG_INFINITY;
    let mut secondary_at = (0, 0);
    for y in 0..h {
        for x in 0..w {
            let near = wrapped_distance(x, primary_at.0, w) <= radius
                && wrapped_distance(y, primary_at.1, h) <= radius;
            if near {
                continue;
            }
            let value = map.get(x, y);
            if value > secondary {
                secondary = value;
                secondary_at = (x, y);
            }
        }
    }
    Ok(Peaks { primary, primary_at, secondary, secondary_at })
}

/// `secondary / primary`.
pub fn peak_ratio(primary: f64, secondary: f64) -> Result<f64> {
    if !(primary.is_finite() && secondary.is_finite()) {
        return Err(Error::NonFinite("peak"));
    }
    if primary <= 0.0 {
        return Err(Error::NonPositivePeak(primary));
    }
    if secondary < 0.0 || secondary > primary {
        return Err(Error::invariant("g_max2", format!("{secondary} outside [0, {primary}]")));
    }
    Ok(secondary / primary)
}

/// Confidence `c` in [0, 1]: 0 for a sharp strong peak, otherwise the
/// peak ratio. A map whose maximum is not positive scores 1.
///
/// Negative secondary responses count as 0.
pub fn detection_confidence(map: &ResponseMap, cfg: &ConfidenceConfig) -> Result<f64> {
    let peaks = find_two_peaks(map, cfg.radius_for(map))?;
    if peaks.primary <= 0.0 {
        return Ok(1.0);
    }
    let pr = peak_ratio(peaks.primary, peaks.secondary.max(0.0))?;
    if pr <= cfg.beta1 && peaks.primary > cfg.beta2 {
        Ok(0.0)
    } else {
        Ok(pr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn map(grid: Grid) -> ResponseMap {
        ResponseMap::new(grid).unwrap()
    }

    fn cfg(beta1: f64, beta2: f64) -> ConfidenceConfig {
        ConfidenceConfig { beta1, beta2, suppression_radius: Some(2) }
    }

    /// Map of size 20x20 with a primary and one far secondary impulse.
    fn two_impulses(primary: f64, secondary: f64) -> ResponseMap {
        let mut g = Grid::zeros(20, 20);
        g.set(5, 5, primary);
        g.set(15, 14, secondary);
        map(g)
    }

    #[test]
    fn single_impulse() {
        let mut g = Grid::zeros(16, 16);
        g.set(8, 8, 0.7);
        let p = find_two_peaks(&map(g), 3).unwrap();
        assert_eq!((p.primary, p.primary_at), (0.7, (8, 8)));
        assert_eq!(p.secondary, 0.0);
    }

    #[test]
    fn twin_impulses_tie() {
        let p = find_two_peaks(&two_impulses(0.9, 0.9), 3).unwrap();
        assert_eq!(p.primary, p.secondary);
        assert_eq!(p.primary_at, (5, 5));
        assert_eq!(p.secondary_at, (15, 14));
    }

    #[test]
    fn uniform_map_ties_in_scan_order() {
        let p = find_two_peaks(&map(Grid::filled(12, 12, 0.3)), 3).unwrap();
        assert_eq!((p.primary, p.secondary), (0.3, 0.3));
        assert_eq!(p.primary_at, (0, 0));
        // first cell outside the wrapped zone around (0, 0)
        assert_eq!(p.secondary_at, (4, 0));
    }

    #[test]
    fn suppression_zone_wraps_around() {
        let mut g = Grid::zeros(12, 12);
        g.set(0, 0, 1.0);
        g.set(11, 11, 0.8); // toroidal neighbour
        g.set(6, 6, 0.2);
        let p = find_two_peaks(&map(g), 2).unwrap();
        assert_eq!(p.secondary, 0.2);
    }

    #[test]
    fn too_small_maps_are_rejected() {
        let g = Grid::zeros(7, 20);
        assert!(matches!(find_two_peaks(&map(g), 3), Err(Error::MapTooSmall { .. })));
    }

    #[test]
    fn peak_ratio_examples() {
        assert_eq!(peak_ratio(0.8, 0.0).unwrap(), 0.0);
        assert_eq!(peak_ratio(0.8, 0.8).unwrap(), 1.0);
        assert_eq!(peak_ratio(0.8, 0.2).unwrap(), 0.25);
        assert_eq!(peak_ratio(0.0, 0.0), Err(Error::NonPositivePeak(0.0)));
    }

    #[test]
    fn sharp_strong_peak_is_fully_confident() {
        let c = detection_confidence(&two_impulses(0.9, 0.09), &cfg(0.3, 0.5)).unwrap();
        assert_eq!(c, 0.0);
    }

    #[test]
    fn ambiguous_peaks_report_the_ratio() {
        let c = detection_confidence(&two_impulses(0.9, 0.54), &cfg(0.3, 0.5)).unwrap();
        assert!((c - 0.6).abs() < 1e-15);
        let c = detection_confidence(&two_impulses(2.0, 1.2), &cfg(0.3, 0.5)).unwrap();
        assert!((c - 0.6).abs() < 1e-15);
    }

    #[test]
    fn weak_peak_reports_the_ratio() {
        let c = detection_confidence(&two_impulses(0.3, 0.03), &cfg(0.3, 0.5)).unwrap();
        assert!((c - 0.1).abs() < 1e-15);
    }

    #[test]
    fn non_positive_map_is_least_confident() {
        let c = detection_confidence(&map(Grid::filled(20, 20, -1.0)), &cfg(0.3, 0.5)).unwrap();
        assert_eq!(c, 1.0);
    }

    #[test]
    fn default_radius_floor() {
        assert_eq!(default_radius(20, 64), 3);
        assert_eq!(default_radius(64, 64), 6);
    }

    #[test]
    fn config_validation() {
        assert!(cfg(0.3, 0.5).validate().is_ok());
        assert!(cfg(1.0, 0.5).validate().is_err());
        assert!(cfg(0.3, 0.0).validate().is_err());
    }
}
