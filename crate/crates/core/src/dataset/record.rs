use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SchemaHeader;
use crate::arousal::EmotionLabel;
use crate::error::{Error, Result};
use crate::eval::ObbBox;
use crate::features::{FeatureSummary, NormalizedFeatures};
use crate::intent::CommandText;
use crate::trajectory::Waypoint;

pub const DATASET_SCHEMA: &str = "echo-cot";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnswerWaypoint {
    pub x: f64,
    pub y: f64,
    /// m/s.
    pub speed: f64,
}

impl AnswerWaypoint {
    pub fn point(&self) -> Waypoint {
        [self.x, self.y]
    }
}

/// Reasoning stages in the order a model is trained to produce them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reasoning {
    pub audio_analysis: String,
    pub emotion_detection: String,
    pub trajectory_decision: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CotRecord {
    pub record_id: String,
    pub scene_id: String,
    pub frame_id: String,
    pub image_path: String,
    /// Relative to the dataset directory.
    pub audio_path: String,
    pub intention: String,
    pub command_text: CommandText,
    pub features: FeatureSummary,
    pub normalized_features: NormalizedFeatures,
    pub arousal: f64,
    pub emotion: EmotionLabel,
    pub requested_emotion: EmotionLabel,
    pub reasoning: Reasoning,
    pub answer_trajectory: Vec<AnswerWaypoint>,
    /// Unmodified future of the source scene.
    pub ground_truth: Vec<Waypoint>,
    pub agents: Vec<Vec<ObbBox>>,
}

pub fn write_dataset(path: impl AsRef<Path>, records: &[CotRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = |line: String| writeln!(w, "{line}").map_err(|e| Error::io(path, e));
    emit(serde_json::to_string(&SchemaHeader::new(DATASET_SCHEMA))?)?;
    for r in records {
        emit(serde_json::to_string(r)?)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a built dataset; any malformed line is an error.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<CotRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines.next().transpose().map_err(|e| Error::io(path, e))?;
    SchemaHeader::check(header.as_deref(), DATASET_SCHEMA)?;
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::Schema(format!("{}:{}: {e}", path.display(), i + 2)))?,
        );
    }
    Ok(out)
}
