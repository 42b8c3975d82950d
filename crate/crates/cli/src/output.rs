//! Per-frame CSV and JSON summaries.
//!
//! `frames.csv` columns, one row per frame:
//!
//! | column | meaning |
//! |---|---|
//! | `frame` | frame id, from 1 |
//! | `pred_x`, `pred_y` | predicted centre |
//! | `true_x`, `true_y` | ground-truth centre |
//! | `center_error` | Euclidean distance between the two |
//! | `confidence` | detection confidence of the frame |
//! | `final_weight` | weight of the frame's sample at eviction or at the end |
//! | `corrupted` | 1 if the simulator corrupted the frame |
//! | `stage_1` .. `stage_N` | samples selected after each stage; empty unless the model was updated |
//!
//! Reals are written with 12 significant digits.

use std::io::{Read, Write};

use pacetrack::sim::{center_error, EvalReport, Run, ScenarioSpec};
use pacetrack::TrackerConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRow {
    pub frame: u64,
    pub predicted: (usize, usize),
    pub truth: (usize, usize),
    pub center_error: f64,
    pub confidence: f64,
    pub final_weight: f64,
    pub corrupted: bool,
    pub selected: Vec<Option<usize>>,
}

/// Rounds to 12 significant digits and prints the shortest decimal that
/// parses back to the rounded value.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("float formatting round-trips");
    format!("{rounded}")
}

pub fn round_real(x: f64) -> f64 {
    format_real(x).parse().expect("formatted reals parse")
}

/// Table rows for a run, with `stages` stage columns.
pub fn rows(run: &Run, stages: usize) -> Vec<FrameRow> {
    run.results
        .iter()
        .zip(run.truth.positions.iter().zip(&run.truth.corrupted))
        .map(|(r, (&truth, &corrupted))| {
            let mut selected = vec![None; stages];
            for t in &r.stages {
                if let Some(slot) = selected.get_mut(t.stage - 1) {
                    *slot = Some(t.selected());
                }
            }
            FrameRow {
                frame: r.frame,
                predicted: r.position,
                truth,
                center_error: center_error(r.position, truth),
                confidence: r.confidence,
                final_weight: run.final_weights.get(&r.frame).copied().unwrap_or(0.0),
                corrupted,
                selected,
            }
        })
        .collect()
}

fn header(stages: usize) -> Vec<String> {
    let mut h: Vec<String> = [
        "frame",
        "pred_x",
        "pred_y",
        "true_x",
        "true_y",
        "center_error",
        "confidence",
        "final_weight",
        "corrupted",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend((1..=stages).map(|n| format!("stage_{n}")));
    h
}

pub fn write_csv<W: Write>(out: W, rows: &[FrameRow], stages: usize) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| CliError::Config(format!("writing csv: {e}"));
    w.write_record(header(stages)).map_err(fail)?;
    for r in rows {
        let mut rec = vec![
            r.frame.to_string(),
            r.predicted.0.to_string(),
            r.predicted.1.to_string(),
            r.truth.0.to_string(),
            r.truth.1.to_string(),
            format_real(r.center_error),
            format_real(r.confidence),
            format_real(r.final_weight),
            u8::from(r.corrupted).to_string(),
        ];
        rec.extend(r.selected.iter().map(|s| s.map(|n| n.to_string()).unwrap_or_default()));
        w.write_record(&rec).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::Config(format!("writing csv: {e}")))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<FrameRow>, CliError> {
    let bad = |m: String| CliError::Config(format!("reading csv: {m}"));
    let mut reader = csv::Reader::from_reader(input);
    let stages = reader.headers().map_err(|e| bad(e.to_string()))?.len().saturating_sub(9);
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let int = |i: usize| rec[i].parse::<usize>().map_err(|e| bad(format!("column {i}: {e}")));
        let real = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(format!("column {i}: {e}")));
        let selected = (0..stages)
            .map(|n| match &rec[9 + n] {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|e| bad(format!("stage_{}: {e}", n + 1))),
            })
            .collect::<Result<_, _>>()?;
        out.push(FrameRow {
            frame: int(0)? as u64,
            predicted: (int(1)?, int(2)?),
            truth: (int(3)?, int(4)?),
            center_error: real(5)?,
            confidence: real(6)?,
            final_weight: real(7)?,
            corrupted: int(8)? == 1,
            selected,
        });
    }
    Ok(out)
}

/// Contents of `summary.json`: the evaluation plus the exact inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    #[serde(flatten)]
    pub report: EvalReport,
    pub config: TrackerConfig,
    pub scenario: ScenarioSpec,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_keep_twelve_digits() {
        assert_eq!(format_real(0.1234567890123456), "0.123456789012");
        assert_eq!(format_real(2.0), "2");
        assert_eq!(format_real(0.0), "0");
        assert_eq!(format_real(-0.0), "0");
        assert_eq!(format_real(1.0 / 3.0e-7), "3333333.33333");
        assert_eq!(round_real(round_real(0.7071067811865476)), round_real(0.7071067811865476));
    }

    #[test]
    fn csv_round_trips() {
        let rows = vec![
            FrameRow {
                frame: 1,
                predicted: (3, 4),
                truth: (3, 5),
                center_error: 1.0,
                confidence: 0.0,
                final_weight: 1.0,
                corrupted: false,
                selected: vec![None, None],
            },
            FrameRow {
                frame: 2,
                predicted: (9, 4),
                truth: (3, 5),
                center_error: 6.0827625303,
                confidence: 0.41,
                final_weight: 0.0,
                corrupted: true,
                selected: vec![Some(1), Some(2)],
            },
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows, 2).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("frame,pred_x,pred_y,true_x,true_y,center_error,"));
        assert_eq!(read_csv(buf.as_slice()).unwrap(), rows);
    }
}
