//! Progressive multi-stage self-paced sample selection for online
//! discriminative learning.
//!
//! The crate is organised bottom-up:
//!
//! * [`buffer`], [`grid`], [`schedule`]: samples, the bounded training
//!   buffer with temporal priors, response grids and pacing schedules.
//! * [`pacing`]: the plain, time-weighted and detection-guided
//!   regularizers with their closed-form weights and a derivative-free
//!   reference minimiser.
//! * [`confidence`]: peak-ratio detection confidence of a response map.
//! * [`learner`]: the learner contract, weighted ridge regression and a
//!   Fourier-domain correlation filter.
//! * [`tracker`]: the multi-stage alternating update and the online loop.
//! * [`sim`]: seeded synthetic sequences with corruption events and the
//!   evaluation metrics.
//!
//! ```
//! use pacetrack::pacing::{solve_weight_guided, solve_weight_plain};
//!
//! assert_eq!(solve_weight_plain(0.5, 1.0).unwrap(), 0.5);
//! // loss 0.3 plus confidence penalty 0.2 leaves half the weight
//! assert_eq!(solve_weight_guided(0.3, 0.2, 1.0, 1.0, 1.0).unwrap(), 0.5);
//! ```

pub mod buffer;
pub mod confidence;
pub mod error;
pub mod grid;
pub mod learner;
pub mod pacing;
pub mod schedule;
pub mod sim;
pub mod tracker;

pub use buffer::{validate_sample, Sample, TrainingBuffer};
pub use confidence::{detection_confidence, find_two_peaks, peak_ratio, ConfidenceConfig};
pub use error::{Error, Result};
pub use grid::{Grid, ResponseMap};
pub use learner::{CorrelationFilterLearner, Learner, RidgeLearner, RidgeSample};
pub use pacing::RegularizerKind;
pub use schedule::{PacingSchedule, StageTrace};
pub use tracker::{FrameResult, Selection, Tracker, TrackerConfig};

// The guide's snippets run as doc-tests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/weights.md")]
    mod weights {}
    #[doc = include_str!("../../../book/src/temporal-prior.md")]
    mod temporal_prior {}
    #[doc = include_str!("../../../book/src/confidence.md")]
    mod confidence {}
    #[doc = include_str!("../../../book/src/stages.md")]
    mod stages {}
    #[doc = include_str!("../../../book/src/simulator.md")]
    mod simulator {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
