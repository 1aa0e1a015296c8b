use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::build::measure_file;
use super::record::{read_dataset, CotRecord};
use super::{anchored_path, FUTURE_STEPS};
use crate::arousal::{label_value, EmotionLabel};
use crate::error::Result;
use crate::trajectory::distance_to_polyline;

/// Recomputed arousal must match the stored value this closely.
pub const AROUSAL_TOLERANCE: f64 = 1e-6;
/// Answer waypoints must lie on the source path this closely, metres.
pub const PATH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    DuplicateId,
    LabelMismatch,
    ArousalRange,
    ArousalMismatch,
    MissingAudio,
    Shape,
    OffPath,
    Endpoint,
    NormalModified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub record_id: String,
    pub kind: FindingKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub records_checked: usize,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

fn check_record(record: &CotRecord, root: &Path, out: &mut Vec<Finding>) {
    let mut push = |kind, message: String| {
        out.push(Finding {
            record_id: record.record_id.clone(),
            kind,
            message,
        })
    };

    if !(0.0..=1.0).contains(&record.arousal) {
        push(
            FindingKind::ArousalRange,
            format!("arousal {} outside [0, 1]", record.arousal),
        );
    }
    let expected = label_value(record.arousal);
    if record.emotion != expected {
        push(
            FindingKind::LabelMismatch,
            format!(
                "label {} but arousal {} implies {expected}",
                record.emotion, record.arousal
            ),
        );
    }

    let audio = root.join(&record.audio_path);
    if !audio.is_file() {
        push(
            FindingKind::MissingAudio,
            format!("{} not found", audio.display()),
        );
    } else {
        match measure_file(&audio) {
            Ok(score) if (score.value - record.arousal).abs() <= AROUSAL_TOLERANCE => {}
            Ok(score) => push(
                FindingKind::ArousalMismatch,
                format!(
                    "stored arousal {} but audio gives {}",
                    record.arousal, score.value
                ),
            ),
            Err(e) => push(
                FindingKind::ArousalMismatch,
                format!("audio unreadable: {e}"),
            ),
        }
    }

    let n = record.answer_trajectory.len();
    if n != FUTURE_STEPS
        || record.ground_truth.len() != FUTURE_STEPS
        || record.agents.len() != FUTURE_STEPS
    {
        push(
            FindingKind::Shape,
            format!(
                "expected {FUTURE_STEPS} answer/ground-truth/agent steps, got {}/{}/{}",
                n,
                record.ground_truth.len(),
                record.agents.len()
            ),
        );
        return;
    }

    let path = anchored_path(&record.ground_truth);
    for (i, w) in record.answer_trajectory.iter().enumerate() {
        let d = distance_to_polyline(&path, w.point());
        if !(d <= PATH_TOLERANCE) {
            push(
                FindingKind::OffPath,
                format!("waypoint {i} is {d} m off the source path"),
            );
        }
    }
    let last = record.answer_trajectory[n - 1].point();
    let gt_last = record.ground_truth[FUTURE_STEPS - 1];
    let end_gap = (last[0] - gt_last[0]).hypot(last[1] - gt_last[1]);
    if !(end_gap <= PATH_TOLERANCE) {
        push(
            FindingKind::Endpoint,
            format!("final waypoint is {end_gap} m from the path end"),
        );
    }
    if record.emotion == EmotionLabel::Normal {
        let unchanged = record
            .answer_trajectory
            .iter()
            .zip(&record.ground_truth)
            .all(|(a, g)| a.point() == *g);
        if !unchanged {
            push(
                FindingKind::NormalModified,
                "normal record departs from the ground truth".into(),
            );
        }
    }
}

/// Checks the invariants of a built dataset. `path` is the `dataset.jsonl`
/// file; audio paths resolve against its directory.
pub fn validate_dataset(path: impl AsRef<Path>) -> Result<ValidationReport> {
    let path = path.as_ref();
    let records = read_dataset(path)?;
    let root = path.parent().unwrap_or_else(|| Path::new("."));
    let mut findings = Vec::new();
    let mut ids = HashSet::new();
    for record in &records {
        if !ids.insert(record.record_id.as_str()) {
            findings.push(Finding {
                record_id: record.record_id.clone(),
                kind: FindingKind::DuplicateId,
                message: "record_id appears more than once".into(),
            });
        }
        check_record(record, root, &mut findings);
    }
    Ok(ValidationReport {
        records_checked: records.len(),
        findings,
    })
}
