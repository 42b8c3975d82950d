//! Declarative synthetic sequences with labelled corruption events.
//!
//! A scenario renders a textured target over a fixed low-contrast
//! background, moves it along a motion model and applies per-frame
//! corruption events. Everything is a pure function of the spec and its
//! seed. Ground truth, including which frames are corrupted, is returned
//! separately from the frames.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetShape {
    /// Square of random texture.
    Textured,
    /// Isotropic Gaussian blob.
    Blob,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetSpec {
    pub shape: TargetShape,
    /// Side of the target square, in pixels.
    pub size: usize,
    /// Appearance drift, radians of texture rotation per frame.
    pub drift: f64,
    /// Initial centre; `None` starts at the frame centre.
    pub start: Option<(f64, f64)>,
}

impl Default for TargetSpec {
    fn default() -> Self {
        TargetSpec { shape: TargetShape::Textured, size: 24, drift: 0.004, start: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Motion {
    Static,
    /// Constant velocity in pixels per frame.
    Linear { velocity: (f64, f64) },
    /// `start + amplitude * sin(2 pi (t - 1) / period)` per axis.
    Sinusoidal { amplitude: (f64, f64), period: f64 },
}

impl Default for Motion {
    fn default() -> Self {
        Motion::Static
    }
}

/// Corruption applied to a frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Corruption {
    /// The top `coverage` fraction of target rows is hidden, leaving the
    /// background visible.
    Occlusion { coverage: f64 },
    /// Box blur of the given radius over the target.
    Blur { radius: usize },
    /// The target is drawn `offset` pixels away from its true position.
    LabelDrift { offset: (i64, i64) },
}

/// A corruption applied to `length` consecutive frames starting at
/// `start`, optionally repeating every `every` frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub start: usize,
    #[serde(default = "one")]
    pub length: usize,
    #[serde(default)]
    pub every: Option<usize>,
    #[serde(flatten)]
    pub corruption: Corruption,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    /// Standard deviation of per-pixel Gaussian noise.
    pub noise: f64,
    /// Amplitude of the static background texture.
    pub background_contrast: f64,
    pub target: TargetSpec,
    pub motion: Motion,
    pub events: Vec<EventSpec>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            frames: 200,
            width: 128,
            height: 128,
            seed: 1,
            noise: 0.02,
            background_contrast: 0.0,
            target: TargetSpec::default(),
            motion: Motion::Static,
            events: Vec::new(),
        }
    }
}

impl ScenarioSpec {
    /// The default evaluation scenario: 200 frames of slow sinusoidal
    /// motion with every fifth frame fully occluded (20% corrupted).
    pub fn default_suite(seed: u64) -> Self {
        ScenarioSpec {
            seed,
            motion: Motion::Sinusoidal { amplitude: (12.0, 8.0), period: 120.0 },
            events: vec![EventSpec {
                start: 5,
                length: 1,
                every: Some(5),
                corruption: Corruption::Occlusion { coverage: 1.0 },
            }],
            ..ScenarioSpec::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = toml::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.frames == 0 {
            return bad("frames must be positive".into());
        }
        let size = self.target.size;
        if size < 4 || size + 4 > self.width || size + 4 > self.height {
            return bad(format!("target size {size} does not fit a {}x{} frame", self.width, self.height));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return bad(format!("noise must be non-negative, got {}", self.noise));
        }
        if !(self.background_contrast.is_finite() && self.background_contrast >= 0.0) {
            return bad("background_contrast must be non-negative".into());
        }
        if !self.target.drift.is_finite() {
            return bad("target.drift must be finite".into());
        }
        if let Motion::Sinusoidal { period, .. } = self.motion {
            if !(period.is_finite() && period > 0.0) {
                return bad("motion.period must be positive".into());
            }
        }
        for (i, e) in self.events.iter().enumerate() {
            if e.start < 2 || e.start > self.frames {
                return bad(format!("event {i}: start {} must lie in 2..={}", e.start, self.frames));
            }
            if e.length == 0 {
                return bad(format!("event {i}: length must be positive"));
            }
            if let Some(every) = e.every {
                if every < e.length {
                    return bad(format!("event {i}: every must be at least length"));
                }
            }
            match e.corruption {
                Corruption::Occlusion { coverage } if !(0.0..=1.0).contains(&coverage) => {
                    return bad(format!("event {i}: coverage {coverage} outside [0, 1]"));
                }
                Corruption::Blur { radius: 0 } => return bad(format!("event {i}: blur radius must be positive")),
                _ => {}
            }
        }
        Ok(())
    }
}

/// Per-frame ground truth, withheld from the tracker.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Target centre per frame, frame 1 first.
    pub positions: Vec<(usize, usize)>,
    pub corrupted: Vec<bool>,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn corrupted_fraction(&self) -> f64 {
        self.corrupted.iter().filter(|&&c| c).count() as f64 / self.corrupted.len() as f64
    }
}

/// Renderable scenario with its static textures and event table resolved.
#[derive(Debug, Clone)]
pub struct Scenario {
    spec: ScenarioSpec,
    background: Grid,
    texture_a: Grid,
    texture_b: Grid,
    events: Vec<Option<Corruption>>,
    truth: GroundTruth,
}

fn frame_rng(seed: u64, frame: usize, salt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((frame as u64) << 8) | salt);
    rng
}

fn smooth_texture(width: usize, height: usize, cell: usize, rng: &mut ChaCha8Rng) -> Grid {
    let cw = width / cell + 2;
    let ch = height / cell + 2;
    let knots: Vec<f64> = (0..cw * ch).map(|_| rng.random_range(-1.0..1.0)).collect();
    Grid::from_fn(width, height, |x, y| {
        let fx = x as f64 / cell as f64;
        let fy = y as f64 / cell as f64;
        let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
        let (tx, ty) = (fx - ix as f64, fy - iy as f64);
        let k = |i: usize, j: usize| knots[j * cw + i];
        let top = k(ix, iy) * (1.0 - tx) + k(ix + 1, iy) * tx;
        let bottom = k(ix, iy + 1) * (1.0 - tx) + k(ix + 1, iy + 1) * tx;
        top * (1.0 - ty) + bottom * ty
    })
}

impl Scenario {
    pub fn new(spec: ScenarioSpec) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let background = smooth_texture(spec.width, spec.height, 8, &mut rng);
        let size = spec.target.size;
        let mut texture = || Grid::from_fn(size, size, |_, _| rng.random_range(-1.0..1.0));
        let texture_a = texture();
        let texture_b = texture();

        let mut events = vec![None; spec.frames + 1];
        for e in &spec.events {
            let mut start = e.start;
            while start <= spec.frames {
                for t in start..(start + e.length).min(spec.frames + 1) {
                    events[t] = Some(e.corruption);
                }
                match e.every {
                    Some(every) => start += every,
                    None => break,
                }
            }
        }

        let positions = (1..=spec.frames).map(|t| Self::centre(&spec, t)).collect();
        let corrupted = (1..=spec.frames).map(|t| events[t].is_some()).collect();
        Ok(Scenario { spec, background, texture_a, texture_b, events, truth: GroundTruth { positions, corrupted } })
    }

    fn centre(spec: &ScenarioSpec, t: usize) -> (usize, usize) {
        let (sx, sy) = spec.target.start.unwrap_or((spec.width as f64 / 2.0, spec.height as f64 / 2.0));
        let k = (t - 1) as f64;
        let (x, y) = match spec.motion {
            Motion::Static => (sx, sy),
            Motion::Linear { velocity } => (sx + velocity.0 * k, sy + velocity.1 * k),
            Motion::Sinusoidal { amplitude, period } => {
                let s = (2.0 * std::f64::consts::PI * k / period).sin();
                (sx + amplitude.0 * s, sy + amplitude.1 * s)
            }
        };
        let half = (spec.target.size / 2) as f64;
        let clamp = |v: f64, extent: usize| v.round().clamp(half, extent as f64 - half - 1.0) as usize;
        (clamp(x, spec.width), clamp(y, spec.height))
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn truth(&self) -> &GroundTruth {
        &self.truth
    }

    pub fn len(&self) -> usize {
        self.spec.frames
    }

    pub fn is_empty(&self) -> bool {
        self.spec.frames == 0
    }

    /// Corruption applied to frame `t` (1-based), if any.
    pub fn event(&self, t: usize) -> Option<Corruption> {
        self.events.get(t).copied().flatten()
    }

    fn target_value(&self, x: usize, y: usize, t: usize) -> f64 {
        let size = self.spec.target.size;
        match self.spec.target.shape {
            TargetShape::Textured => {
                let phase = self.spec.target.drift * (t - 1) as f64;
                let v = self.texture_a.get(x, y) * phase.cos() + self.texture_b.get(x, y) * phase.sin();
                0.5 + 0.5 * v
            }
            TargetShape::Blob => {
                let c = (size as f64 - 1.0) / 2.0;
                let s = size as f64 / 4.0;
                let (dx, dy) = (x as f64 - c, y as f64 - c);
                0.5 + 0.5 * (-(dx * dx + dy * dy) / (2.0 * s * s)).exp()
            }
        }
    }

    /// Renders frame `t`, counting from 1.
    pub fn frame(&self, t: usize) -> Result<Grid> {
        if t == 0 || t > self.spec.frames {
            return Err(Error::InvalidSpec(format!("frame {t} outside 1..={}", self.spec.frames)));
        }
        let spec = &self.spec;
        let size = spec.target.size;
        let half = size / 2;
        let contrast = spec.background_contrast;
        let mut frame = self.background.map(|v| 0.5 + 0.5 * contrast * v);

        let (cx, cy) = self.truth.positions[t - 1];
        let (mut ox, mut oy) = (cx as i64 - half as i64, cy as i64 - half as i64);
        let event = self.event(t);
        if let Some(Corruption::LabelDrift { offset }) = event {
            ox += offset.0;
            oy += offset.1;
        }
        let (w, h) = (spec.width as i64, spec.height as i64);
        let occluded_rows = match event {
            Some(Corruption::Occlusion { coverage }) => (coverage * size as f64).ceil() as usize,
            _ => 0,
        };
        for y in occluded_rows.min(size)..size {
            for x in 0..size {
                let (fx, fy) = (ox + x as i64, oy + y as i64);
                if (0..w).contains(&fx) && (0..h).contains(&fy) {
                    frame.set(fx as usize, fy as usize, self.target_value(x, y, t));
                }
            }
        }

        if let Some(Corruption::Blur { radius }) = event {
            let r = radius as i64;
            let source = frame.clone();
            for y in (oy - r).max(0)..(oy + size as i64 + r).min(h) {
                for x in (ox - r).max(0)..(ox + size as i64 + r).min(w) {
                    let mut total = 0.0;
                    let mut count = 0.0;
                    for yy in (y - r).max(0)..=(y + r).min(h - 1) {
                        for xx in (x - r).max(0)..=(x + r).min(w - 1) {
                            total += source.get(xx as usize, yy as usize);
                            count += 1.0;
                        }
                    }
                    frame.set(x as usize, y as usize, total / count);
                }
            }
        }

        if spec.noise > 0.0 {
            let normal = Normal::new(0.0, spec.noise).map_err(|e| Error::InvalidSpec(e.to_string()))?;
            let mut rng = frame_rng(spec.seed, t, 2);
            for v in frame.as_mut_slice() {
                *v += normal.sample(&mut rng);
            }
        }
        Ok(frame)
    }

    /// Renders every frame.
    pub fn frames(&self) -> Result<Vec<Grid>> {
        (1..=self.spec.frames).map(|t| self.frame(t)).collect()
    }
}

/// Generates the whole stream and its ground truth.
pub fn generate(spec: &ScenarioSpec) -> Result<(Vec<Grid>, GroundTruth)> {
    let scenario = Scenario::new(spec.clone())?;
    Ok((scenario.frames()?, scenario.truth().clone()))
}

/// Binary PGM (P5) encoding of a grid, values clamped to [0, 1].
pub fn to_pgm(grid: &Grid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", grid.width(), grid.height()).into_bytes();
    out.extend(grid.as_slice().iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet(frames: usize) -> ScenarioSpec {
        ScenarioSpec { frames, noise: 0.0, width: 64, height: 64, ..ScenarioSpec::default() }
    }

    #[test]
    fn static_positions_are_constant() {
        let (_, truth) = generate(&quiet(10)).unwrap();
        assert_eq!(truth.len(), 10);
        assert!(truth.positions.iter().all(|&p| p == truth.positions[0]));
        assert!(truth.corrupted.iter().all(|&c| !c));
    }

    #[test]
    fn full_occlusion_replaces_every_target_pixel() {
        let clean = Scenario::new(ScenarioSpec { target: TargetSpec { drift: 0.0, ..TargetSpec::default() }, ..quiet(6) }).unwrap();
        let mut spec = clean.spec().clone();
        spec.events = vec![EventSpec { start: 5, length: 1, every: None, corruption: Corruption::Occlusion { coverage: 1.0 } }];
        let occluded = Scenario::new(spec).unwrap();
        let (a, b) = (clean.frame(5).unwrap(), occluded.frame(5).unwrap());
        let (cx, cy) = clean.truth().positions[4];
        for y in cy - 12..cy + 12 {
            for x in cx - 12..cx + 12 {
                assert_ne!(a.get(x, y), b.get(x, y), "({x}, {y})");
            }
        }
        assert_eq!(a.get(0, 0), b.get(0, 0));
        assert!(occluded.truth().corrupted[4]);
        assert_eq!(clean.frame(4).unwrap(), occluded.frame(4).unwrap());
    }

    #[test]
    fn same_seed_same_stream() {
        let spec = ScenarioSpec::default_suite(11);
        let a = generate(&ScenarioSpec { frames: 40, ..spec.clone() }).unwrap();
        let b = generate(&ScenarioSpec { frames: 40, ..spec }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn default_suite_corrupts_twenty_percent() {
        let s = Scenario::new(ScenarioSpec::default_suite(3)).unwrap();
        assert_eq!(s.truth().corrupted.iter().filter(|&&c| c).count(), 40);
        assert!(!s.truth().corrupted[0]);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = quiet(10);
        spec.events = vec![EventSpec { start: 1, length: 1, every: None, corruption: Corruption::Blur { radius: 2 } }];
        assert!(matches!(Scenario::new(spec), Err(Error::InvalidSpec(_))));
        let mut spec = quiet(10);
        spec.events = vec![EventSpec { start: 3, length: 1, every: None, corruption: Corruption::Occlusion { coverage: 1.5 } }];
        assert!(Scenario::new(spec).is_err());
        assert!(Scenario::new(ScenarioSpec { width: 20, ..quiet(3) }).is_err());
    }

    #[test]
    fn toml_round_trip_of_events() {
        let text = r#"
            frames = 30
            seed = 9
            [motion]
            kind = "linear"
            velocity = [0.5, -0.25]
            [[events]]
            kind = "occlusion"
            coverage = 0.5
            start = 10
            length = 2
            every = 10
            [[events]]
            kind = "label-drift"
            offset = [3, -2]
            start = 7
        "#;
        let spec = ScenarioSpec::from_toml(text).unwrap();
        assert_eq!(spec.motion, Motion::Linear { velocity: (0.5, -0.25) });
        let s = Scenario::new(spec).unwrap();
        assert_eq!(s.event(11), Some(Corruption::Occlusion { coverage: 0.5 }));
        assert_eq!(s.event(21), Some(Corruption::Occlusion { coverage: 0.5 }));
        assert_eq!(s.event(7), Some(Corruption::LabelDrift { offset: (3, -2) }));
        assert_eq!(s.event(12), None);
        assert!(ScenarioSpec::from_toml("frames = 10\nbogus = 1").is_err());
    }

    #[test]
    fn pgm_header_and_payload() {
        let g = Grid::new(2, 1, vec![0.0, 1.0]).unwrap();
        assert_eq!(to_pgm(&g), b"P5\n2 1\n255\n\x00\xff".to_vec());
    }
}
