//! Tracks the default suite with every selection mode and prints the
//! precision and the weights given to corrupted and clean frames.
//!
//! cargo run --release -p pacetrack --example compare -- [seed]

use pacetrack::sim::{simulate, Scenario, ScenarioSpec};
use pacetrack::{RegularizerKind, Selection, TrackerConfig};

fn main() -> Result<(), pacetrack::Error> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let scenario = Scenario::new(ScenarioSpec::default_suite(seed))?;
    let modes = std::iter::once(Selection::Baseline).chain(RegularizerKind::ALL.map(Selection::SelfPaced));

    println!("{:<18} {:>8} {:>10} {:>10} {:>10}", "selection", "prec@20", "w corrupt", "w clean", "rejected");
    for selection in modes {
        let run = simulate(&scenario, &TrackerConfig { selection, ..TrackerConfig::default() })?;
        let r = &run.report.rejection;
        println!(
            "{:<18} {:>8.3} {:>10.3} {:>10.3} {:>10.3}",
            selection.name(),
            run.report.precision_at_20,
            r.mean_weight_corrupted.unwrap_or(f64::NAN),
            r.mean_weight_clean.unwrap_or(f64::NAN),
            r.corrupted_rejected_fraction.unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
