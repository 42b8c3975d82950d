//! Numerical self-checks: closed-form weights against the reference
//! minimiser, stationarity of interior weights, the ridge gradient against
//! central differences and the filter's per-frequency normal equations.

use pacetrack::learner::{gaussian_response, objective, CorrelationFilterLearner, RidgeLearner, RidgeSample};
use pacetrack::pacing::{oracle_minimize_weights, solve_weights};
use pacetrack::{Grid, Learner, RegularizerKind, Sample, TrainingBuffer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Worst deviation seen by one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub cases: usize,
    pub max: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max < self.tolerance
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:<4} {:<40} cases {:>5}  max {:.3e}  tol {:.0e}",
            if self.passed() { "ok" } else { "FAIL" },
            self.name,
            self.cases,
            self.max,
            self.tolerance
        )
    }
}

struct Instance {
    losses: Vec<f64>,
    rhos: Vec<f64>,
    cs: Vec<f64>,
    lambda: f64,
    xi: f64,
}

fn instance(rng: &mut ChaCha8Rng, kind: RegularizerKind) -> Instance {
    let t = rng.random_range(1..=20);
    let losses = (0..t).map(|_| rng.random_range(0.0..3.0)).collect();
    let mut rhos: Vec<f64> = (0..t).map(|_| rng.random_range(0.05..=1.0)).collect();
    let mut cs: Vec<f64> = (0..t).map(|_| rng.random_range(0.0..=1.0)).collect();
    let lambda = rng.random_range(0.05..3.0);
    let mut xi = rng.random_range(0.0..1.5);
    if kind != RegularizerKind::DetectionGuided {
        cs.iter_mut().for_each(|c| *c = 0.0);
        xi = 0.0;
    }
    if kind == RegularizerKind::Plain {
        rhos.iter_mut().for_each(|r| *r = 1.0);
    }
    Instance { losses, rhos, cs, lambda, xi }
}

fn oracle_check(rng: &mut ChaCha8Rng, kind: RegularizerKind, cases: usize) -> pacetrack::Result<Check> {
    let mut max: f64 = 0.0;
    for _ in 0..cases {
        let i = instance(rng, kind);
        let closed = solve_weights(&i.losses, &i.rhos, &i.cs, i.lambda, i.xi, kind)?;
        let reference = oracle_minimize_weights(&i.losses, &i.rhos, &i.cs, i.lambda, i.xi)?;
        max = closed.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(max, f64::max);
    }
    Ok(Check { name: format!("closed form vs oracle ({kind})"), cases, max, tolerance: 1e-6 })
}

fn stationarity_check(rng: &mut ChaCha8Rng, cases: usize) -> pacetrack::Result<Check> {
    let kind = RegularizerKind::DetectionGuided;
    let mut max: f64 = 0.0;
    for _ in 0..cases {
        let i = instance(rng, kind);
        let w = solve_weights(&i.losses, &i.rhos, &i.cs, i.lambda, i.xi, kind)?;
        for k in 0..w.len() {
            if w[k] > 0.0 {
                let residual = i.losses[k] + i.lambda * w[k] / i.rhos[k] - i.lambda + i.xi * i.cs[k];
                max = max.max(residual.abs());
            }
        }
    }
    Ok(Check { name: "interior stationarity residual".into(), cases, max, tolerance: 1e-10 })
}

fn ridge_check(rng: &mut ChaCha8Rng, cases: usize) -> pacetrack::Result<Check> {
    let mut max: f64 = 0.0;
    for _ in 0..cases {
        let dim = rng.random_range(1..8);
        let n = rng.random_range(1..20);
        let mut buffer = TrainingBuffer::new(n, 0.05)?;
        for id in 1..=n as u64 {
            let x = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y = rng.random_range(-3.0..3.0);
            buffer.push(Sample::new(id, RidgeSample { x, y }).with_weight(rng.random_range(0.0..=1.0)))?;
        }
        buffer.update_priors();
        let alpha = rng.random_range(0.0..2.0);
        let w: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = |w: &[f64]| -> pacetrack::Result<f64> {
            objective(&RidgeLearner::with_weights(w.to_vec(), alpha)?, &buffer, 1.0, 0.0, RegularizerKind::Plain)
        };
        let analytic = RidgeLearner::with_weights(w.clone(), alpha)?.objective_gradient(&buffer)?;
        let h = 1e-5;
        for j in 0..dim {
            let (mut up, mut down) = (w.clone(), w.clone());
            up[j] += h;
            down[j] -= h;
            let numeric = (f(&up)? - f(&down)?) / (2.0 * h);
            max = max.max((analytic[j] - numeric).abs() / numeric.abs().max(analytic[j].abs()).max(1e-8));
        }
    }
    Ok(Check { name: "ridge gradient vs central differences".into(), cases, max, tolerance: 1e-5 })
}

fn filter_check(rng: &mut ChaCha8Rng, cases: usize) -> pacetrack::Result<Check> {
    let mut max: f64 = 0.0;
    for _ in 0..cases {
        let n = 16;
        let learner = CorrelationFilterLearner::new(n, rng.random_range(1e-3..1.0))?;
        let count = rng.random_range(1..8);
        let mut buffer = TrainingBuffer::new(count, 0.1)?;
        for id in 1..=count as u64 {
            let patch = Grid::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let label = gaussian_response(n, 1.0, rng.random_range(0..n), rng.random_range(0..n));
            buffer.push(Sample::new(id, learner.sample(patch, label)?).with_weight(rng.random_range(0.0..=1.0)))?;
        }
        max = max.max(learner.refit(&buffer)?.normal_equation_residual(&buffer));
    }
    Ok(Check { name: "filter normal-equation residual".into(), cases, max, tolerance: 1e-10 })
}

/// Runs every check with `instances` cases per regularizer kind.
pub fn run_checks(seed: u64, instances: usize) -> pacetrack::Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for kind in RegularizerKind::ALL {
        checks.push(oracle_check(&mut rng, kind, instances)?);
    }
    checks.push(stationarity_check(&mut rng, 100)?);
    checks.push(ridge_check(&mut rng, 50)?);
    checks.push(filter_check(&mut rng, 20)?);
    Ok(checks)
}
