//! Discriminative learners driven by the paced optimiser.
//!
//! A learner exposes a per-sample loss, the value of its parameter
//! regularizer and an exact weighted refit, which is all the alternating
//! optimisation needs. Two learners are provided: weighted ridge regression
//! over feature vectors, and a single-channel correlation filter trained in
//! the Fourier domain.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
pub use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::buffer::{Sample, TrainingBuffer};
use crate::error::{Error, Result};
use crate::grid::{Grid, ResponseMap};
use crate::pacing::{regularizer_value, RegularizerKind};

/// Contract between a model and the paced optimiser.
pub trait Learner: Clone {
    /// Features and label of one sample.
    type Payload;
    type Input: ?Sized;
    type Output;

    /// Regularization strength `alpha`.
    fn alpha(&self) -> f64;

    /// Mean squared error of the model on one sample.
    fn loss(&self, payload: &Self::Payload) -> Result<f64>;

    /// Parameter regularizer `R(theta)`.
    fn regularization(&self) -> f64;

    /// Exact minimiser of `sum_k v_k l_k(theta) + alpha R(theta)` over the
    /// buffer's current weights. Zero-weight samples do not participate.
    fn refit(&self, buffer: &TrainingBuffer<Self::Payload>) -> Result<Self>;

    fn respond(&self, input: &Self::Input) -> Result<Self::Output>;
}

pub fn per_sample_loss<L: Learner>(state: &L, sample: &Sample<L::Payload>) -> Result<f64> {
    state.loss(&sample.payload)
}

/// Losses of every buffered sample, buffer order.
pub fn losses<L: Learner>(state: &L, buffer: &TrainingBuffer<L::Payload>) -> Result<Vec<f64>> {
    buffer.iter().map(|s| state.loss(&s.payload)).collect()
}

/// Weighted data term `sum_k v_k l_k`.
pub fn weighted_loss<L: Learner>(state: &L, buffer: &TrainingBuffer<L::Payload>) -> Result<f64> {
    let mut total = 0.0;
    for s in buffer {
        if s.weight != 0.0 {
            total += s.weight * state.loss(&s.payload)?;
        }
    }
    Ok(total)
}

/// Joint objective of one stage: weighted losses, parameter regularizer and
/// the self-paced regularizer of `kind` at pace `lambda`.
pub fn objective<L: Learner>(
    state: &L,
    buffer: &TrainingBuffer<L::Payload>,
    lambda: f64,
    xi: f64,
    kind: RegularizerKind,
) -> Result<f64> {
    let pace = regularizer_value(&buffer.weights(), &buffer.rhos(), &buffer.confidences(), lambda, xi, kind)?;
    Ok(weighted_loss(state, buffer)? + state.alpha() * state.regularization() + pace)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::config("alpha", format!("must satisfy alpha >= 0, got {alpha}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Ridge regression

/// Feature vector with a scalar target.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeSample {
    pub x: Vec<f64>,
    pub y: f64,
}

/// Linear model `g(x) = w . x` with `R(w) = |w|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeLearner {
    weights: Vec<f64>,
    alpha: f64,
}

impl RidgeLearner {
    pub fn new(dim: usize, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(RidgeLearner { weights: vec![0.0; dim], alpha })
    }

    pub fn with_weights(weights: Vec<f64>, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("theta"));
        }
        Ok(RidgeLearner { weights, alpha })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len().to_string(),
                got: x.len().to_string(),
            });
        }
        Ok(())
    }

    /// Analytic gradient of the weighted objective with respect to `w`.
    pub fn objective_gradient(&self, buffer: &TrainingBuffer<RidgeSample>) -> Result<Vec<f64>> {
        let mut grad: Vec<f64> = self.weights.iter().map(|w| 2.0 * self.alpha * w).collect();
        for s in buffer {
            self.check_dim(&s.payload.x)?;
            let residual = self.respond(&s.payload.x)? - s.payload.y;
            for (g, xi) in grad.iter_mut().zip(&s.payload.x) {
                *g += 2.0 * s.weight * residual * xi;
            }
        }
        Ok(grad)
    }
}

impl Learner for RidgeLearner {
    type Payload = RidgeSample;
    type Input = [f64];
    type Output = f64;

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn loss(&self, payload: &RidgeSample) -> Result<f64> {
        let residual = self.respond(&payload.x)? - payload.y;
        Ok(residual * residual)
    }

    fn regularization(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    fn refit(&self, buffer: &TrainingBuffer<RidgeSample>) -> Result<Self> {
        let d = self.dim();
        let mut gram = DMatrix::<f64>::identity(d, d) * self.alpha;
        let mut rhs = DVector::<f64>::zeros(d);
        let mut any = false;
        for s in buffer.iter().filter(|s| s.weight > 0.0) {
            self.check_dim(&s.payload.x)?;
            any = true;
            let x = DVector::from_column_slice(&s.payload.x);
            gram += s.weight * &x * x.transpose();
            rhs += s.weight * s.payload.y * &x;
        }
        if !any {
            return Err(Error::AllWeightsZero);
        }
        let lu = gram.lu();
        let pivots = lu.u().diagonal();
        let largest = pivots.iter().fold(0.0_f64, |m, p| m.max(p.abs()));
        if largest == 0.0 || pivots.iter().any(|p| p.abs() <= largest * 1e-12) {
            return Err(Error::SingularSystem);
        }
        let solution = lu.solve(&rhs).ok_or(Error::SingularSystem)?;
        RidgeLearner::with_weights(solution.iter().copied().collect(), self.alpha)
    }

    fn respond(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.weights.iter().zip(x).map(|(w, x)| w * x).sum())
    }
}

// ---------------------------------------------------------------------------
// Correlation filter

/// Forward/inverse 2D DFT on square `size`x`size` grids.
pub struct Fft2d {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fft2d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2d").field("size", &self.size).finish()
    }
}

impl Fft2d {
    pub fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2d { size, forward: planner.plan_fft_forward(size), inverse: planner.plan_fft_inverse(size) }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn transpose(&self, data: &mut [Complex64]) {
        let n = self.size;
        for y in 0..n {
            for x in (y + 1)..n {
                data.swap(y * n + x, x * n + y);
            }
        }
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
        plan.process(data);
        self.transpose(data);
        plan.process(data);
        self.transpose(data);
    }

    pub fn forward(&self, grid: &Grid) -> Vec<Complex64> {
        debug_assert_eq!((grid.width(), grid.height()), (self.size, self.size));
        let mut data: Vec<Complex64> = grid.as_slice().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.run(&self.forward, &mut data);
        data
    }

    /// Real part of the normalised inverse transform.
    pub fn inverse_real(&self, spectrum: &[Complex64]) -> Grid {
        let mut data = spectrum.to_vec();
        self.run(&self.inverse, &mut data);
        let scale = 1.0 / (self.size * self.size) as f64;
        let values = data.iter().map(|c| c.re * scale).collect();
        Grid::new(self.size, self.size, values).expect("square spectrum")
    }
}

/// Square patch with its desired response and their cached spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSample {
    patch: Grid,
    label: Grid,
    patch_hat: Vec<Complex64>,
    label_hat: Vec<Complex64>,
}

impl FilterSample {
    pub fn patch(&self) -> &Grid {
        &self.patch
    }

    pub fn label(&self) -> &Grid {
        &self.label
    }

    pub fn patch_spectrum(&self) -> &[Complex64] {
        &self.patch_hat
    }

    pub fn label_spectrum(&self) -> &[Complex64] {
        &self.label_hat
    }
}

/// Gaussian with unit peak at `(cx, cy)`, distances measured on the torus.
pub fn gaussian_response(size: usize, sigma: f64, cx: usize, cy: usize) -> Grid {
    let wrapped = |a: usize, b: usize| {
        let d = a.abs_diff(b);
        d.min(size - d) as f64
    };
    Grid::from_fn(size, size, |x, y| {
        let (dx, dy) = (wrapped(x, cx), wrapped(y, cy));
        (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
    })
}

/// Hann window over a square grid.
pub fn hann_window(size: usize) -> Grid {
    let w = |i: usize| {
        if size <= 1 {
            1.0
        } else {
            0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / size as f64).cos()
        }
    };
    Grid::from_fn(size, size, |x, y| w(x) * w(y))
}

/// Zero-mean, unit-norm patch multiplied by a Hann window.
pub fn preprocess(patch: &Grid, window: &Grid) -> Grid {
    let n = patch.len() as f64;
    let mean = patch.as_slice().iter().sum::<f64>() / n;
    let centred = patch.map(|v| v - mean);
    let norm = centred.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
    let scaled = if norm > 0.0 { centred.map(|v| v / norm) } else { centred };
    let data = scaled.as_slice().iter().zip(window.as_slice()).map(|(a, b)| a * b).collect();
    Grid::new(patch.width(), patch.height(), data).expect("window matches patch")
}

/// Single-channel correlation filter over `size`x`size` patches.
///
/// The filter is stored in the Fourier domain. Its response to a patch is
/// the inverse transform of `conj(H) * X`, the loss is the mean squared
/// difference to the desired response and `R(H)` is the mean squared
/// spatial filter coefficient, `sum |H|^2 / size^4`.
#[derive(Debug, Clone)]
pub struct CorrelationFilterLearner {
    alpha: f64,
    filter: Vec<Complex64>,
    fft: Arc<Fft2d>,
}

impl PartialEq for CorrelationFilterLearner {
    fn eq(&self, other: &Self) -> bool {
        self.alpha == other.alpha && self.filter == other.filter
    }
}

impl CorrelationFilterLearner {
    /// Zero filter.
    pub fn new(size: usize, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if size == 0 {
            return Err(Error::config("patch_size", "must be positive"));
        }
        Ok(CorrelationFilterLearner {
            alpha,
            filter: vec![Complex64::new(0.0, 0.0); size * size],
            fft: Arc::new(Fft2d::new(size)),
        })
    }

    pub fn size(&self) -> usize {
        self.fft.size()
    }

    pub fn filter(&self) -> &[Complex64] {
        &self.filter
    }

    pub fn fft(&self) -> &Fft2d {
        &self.fft
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        let n = self.size();
        if grid.width() != n || grid.height() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n}x{n}"),
                got: format!("{}x{}", grid.width(), grid.height()),
            });
        }
        Ok(())
    }

    /// Pairs a (preprocessed) patch with its desired response.
    pub fn sample(&self, patch: Grid, label: Grid) -> Result<FilterSample> {
        self.check_grid(&patch)?;
        self.check_grid(&label)?;
        let patch_hat = self.fft.forward(&patch);
        let label_hat = self.fft.forward(&label);
        Ok(FilterSample { patch, label, patch_hat, label_hat })
    }

    fn response_spectrum(&self, patch_hat: &[Complex64]) -> Vec<Complex64> {
        self.filter.iter().zip(patch_hat).map(|(h, x)| h.conj() * x).collect()
    }

    /// Response to a sample whose spectrum is already cached.
    pub fn respond_sample(&self, sample: &FilterSample) -> Result<ResponseMap> {
        ResponseMap::new(self.fft.inverse_real(&self.response_spectrum(&sample.patch_hat)))
    }

    /// Largest relative residual of the per-frequency normal equation
    /// `(sum v |X|^2 + alpha) H = sum v conj(Y) X` over the buffer weights.
    pub fn normal_equation_residual(&self, buffer: &TrainingBuffer<FilterSample>) -> f64 {
        let (num, den) = self.accumulate(buffer);
        self.filter
            .iter()
            .zip(num.iter().zip(&den))
            .map(|(h, (b, a))| {
                let lhs = h * a;
                let scale = lhs.norm().max(b.norm());
                if scale == 0.0 {
                    0.0
                } else {
                    (lhs - b).norm() / scale
                }
            })
            .fold(0.0, f64::max)
    }

    fn accumulate(&self, buffer: &TrainingBuffer<FilterSample>) -> (Vec<Complex64>, Vec<f64>) {
        let n = self.filter.len();
        let mut num = vec![Complex64::new(0.0, 0.0); n];
        let mut den = vec![self.alpha; n];
        for s in buffer.iter().filter(|s| s.weight > 0.0) {
            let v = s.weight;
            for i in 0..n {
                let x = s.payload.patch_hat[i];
                num[i] += v * (s.payload.label_hat[i].conj() * x);
                den[i] += v * x.norm_sqr();
            }
        }
        (num, den)
    }
}

impl Learner for CorrelationFilterLearner {
    type Payload = FilterSample;
    type Input = Grid;
    type Output = ResponseMap;

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn loss(&self, payload: &FilterSample) -> Result<f64> {
        if payload.patch_hat.len() != self.filter.len() {
            return Err(Error::DimensionMismatch {
                expected: self.filter.len().to_string(),
                got: payload.patch_hat.len().to_string(),
            });
        }
        let response = self.fft.inverse_real(&self.response_spectrum(&payload.patch_hat));
        let sse: f64 = response
            .as_slice()
            .iter()
            .zip(payload.label.as_slice())
            .map(|(g, y)| (g - y) * (g - y))
            .sum();
        Ok(sse / response.len() as f64)
    }

    fn regularization(&self) -> f64 {
        let cells = self.filter.len() as f64;
        self.filter.iter().map(|h| h.norm_sqr()).sum::<f64>() / (cells * cells)
    }

    fn refit(&self, buffer: &TrainingBuffer<FilterSample>) -> Result<Self> {
        if !buffer.iter().any(|s| s.weight > 0.0) {
            return Err(Error::AllWeightsZero);
        }
        if let Some(s) = buffer.iter().find(|s| s.payload.patch_hat.len() != self.filter.len()) {
            return Err(Error::DimensionMismatch {
                expected: self.filter.len().to_string(),
                got: s.payload.patch_hat.len().to_string(),
            });
        }
        let (num, den) = self.accumulate(buffer);
        if den.iter().any(|&d| d == 0.0) {
            return Err(Error::SingularSystem);
        }
        let filter = num.iter().zip(&den).map(|(b, a)| b / a).collect();
        Ok(CorrelationFilterLearner { alpha: self.alpha, filter, fft: Arc::clone(&self.fft) })
    }

    fn respond(&self, patch: &Grid) -> Result<ResponseMap> {
        self.check_grid(patch)?;
        let patch_hat = self.fft.forward(patch);
        ResponseMap::new(self.fft.inverse_real(&self.response_spectrum(&patch_hat)))
    }
}
