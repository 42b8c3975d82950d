//! Dense row-major 2D grids: frames, patches, desired responses and
//! detection response maps.

use crate::error::{Error, Result};

/// Row-major grid of real values.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::LengthMismatch { expected: width * height, got: data.len() });
        }
        Ok(Grid { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Grid { width, height, data: vec![0.0; width * height] }
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Grid { width, height, data: vec![value; width * height] }
    }

    /// Builds a grid by evaluating `f(x, y)` at every cell.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Grid { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Grid {
        Grid { width: self.width, height: self.height, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Circular shift: the value at `(x, y)` moves to `(x + dx, y + dy)` modulo the size.
    pub fn roll(&self, dx: isize, dy: isize) -> Grid {
        let (w, h) = (self.width as isize, self.height as isize);
        let mut out = Grid::zeros(self.width, self.height);
        for y in 0..h {
            for x in 0..w {
                let tx = (x + dx).rem_euclid(w) as usize;
                let ty = (y + dy).rem_euclid(h) as usize;
                out.set(tx, ty, self.get(x as usize, y as usize));
            }
        }
        out
    }

    /// Extracts a `size`x`size` window centred on `(cx, cy)`; out-of-frame
    /// reads are clamped to the nearest edge pixel.
    pub fn window(&self, cx: isize, cy: isize, size: usize) -> Grid {
        let half = (size / 2) as isize;
        let (w, h) = (self.width as isize, self.height as isize);
        Grid::from_fn(size, size, |x, y| {
            let sx = (cx - half + x as isize).clamp(0, w - 1) as usize;
            let sy = (cy - half + y as isize).clamp(0, h - 1) as usize;
            self.get(sx, sy)
        })
    }

    /// Row-major argmax; the first maximal cell wins ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &v) in self.data.iter().enumerate() {
            if v > self.data[best] {
                best = i;
            }
        }
        (best % self.width, best / self.width)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Detection scores over every cyclic shift of a search window.
///
/// Only finite entries are admitted.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMap(Grid);

impl ResponseMap {
    pub fn new(grid: Grid) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::EmptyFrame);
        }
        if grid.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response map"));
        }
        Ok(ResponseMap(grid))
    }

    pub fn from_vec(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        Self::new(Grid::new(width, height, values)?)
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.0.get(x, y)
    }

    pub fn grid(&self) -> &Grid {
        &self.0
    }

    pub fn into_grid(self) -> Grid {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roll_moves_values_forward() {
        let g = Grid::from_fn(4, 3, |x, y| (y * 4 + x) as f64);
        let r = g.roll(1, 2);
        assert_eq!(r.get(1, 2), g.get(0, 0));
        assert_eq!(r.get(0, 0), g.get(3, 1));
        assert_eq!(r.roll(-1, -2), g);
    }

    #[test]
    fn window_clamps_at_edges() {
        let g = Grid::from_fn(5, 5, |x, y| (10 * y + x) as f64);
        let w = g.window(0, 0, 4);
        assert_eq!(w.get(0, 0), 0.0);
        assert_eq!(w.get(2, 2), 0.0);
        assert_eq!(w.get(3, 3), 11.0);
    }

    #[test]
    fn argmax_prefers_first_in_scan_order() {
        let g = Grid::new(3, 2, vec![0.0, 2.0, 1.0, 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(g.argmax(), (1, 0));
    }

    #[test]
    fn response_map_rejects_nan() {
        assert_eq!(
            ResponseMap::from_vec(2, 1, vec![0.0, f64::NAN]),
            Err(Error::NonFinite("response map"))
        );
        assert!(ResponseMap::from_vec(2, 1, vec![0.0, 1.0]).is_ok());
    }
}
