use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SchemaHeader, FUTURE_STEPS};
use crate::error::{Error, Result};
use crate::eval::ObbBox;
use crate::trajectory::Waypoint;

pub const SCENE_SCHEMA: &str = "echo-scenes";

/// One keyframe: ego motion and surrounding agents in the ego frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub scene_id: String,
    pub frame_id: String,
    pub timestamp: f64,
    pub image_path: String,
    /// Past waypoints at 2 Hz, oldest first.
    pub ego_history: Vec<Waypoint>,
    /// Future waypoints at 0.5 s, 1.0 s, ..., 3.0 s.
    pub ego_future: Vec<Waypoint>,
    pub ego_speed: f64,
    pub ego_accel: f64,
    /// Agent boxes per future step.
    pub agents: Vec<Vec<ObbBox>>,
}

impl SceneRecord {
    /// Checks invariants; on failure returns the offending field and a message.
    pub fn validate(&self) -> std::result::Result<(), (String, String)> {
        let fail = |field: &str, msg: String| Err((field.to_string(), msg));
        if self.frame_id.is_empty() {
            return fail("frame_id", "must be nonempty".into());
        }
        if self.ego_future.len() != FUTURE_STEPS {
            return fail(
                "ego_future",
                format!(
                    "expected {FUTURE_STEPS} points, found {}",
                    self.ego_future.len()
                ),
            );
        }
        if self.agents.len() != FUTURE_STEPS {
            return fail(
                "agents",
                format!("expected {FUTURE_STEPS} steps, found {}", self.agents.len()),
            );
        }
        let finite = |pts: &[Waypoint]| pts.iter().flatten().all(|c| c.is_finite());
        if !finite(&self.ego_future) {
            return fail("ego_future", "coordinates must be finite".into());
        }
        if !finite(&self.ego_history) {
            return fail("ego_history", "coordinates must be finite".into());
        }
        for (name, v) in [
            ("timestamp", self.timestamp),
            ("ego_speed", self.ego_speed),
            ("ego_accel", self.ego_accel),
        ] {
            if !v.is_finite() {
                return fail(name, "must be finite".into());
            }
        }
        if let Some((step, _)) = self
            .agents
            .iter()
            .enumerate()
            .find(|(_, boxes)| boxes.iter().any(|b| !b.is_valid()))
        {
            return fail(
                "agents",
                format!("step {step} has a box with non-finite geometry or nonpositive size"),
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineError {
    /// 1-based line number in the input file.
    pub line: usize,
    pub field: String,
    pub message: String,
}

/// Streams validated scene records. The header is checked on construction;
/// afterwards each item is a record or a per-line error.
pub struct SceneReader<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> SceneReader<R> {
    pub fn new(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()
            .map_err(|e| Error::Schema(format!("unreadable header: {e}")))?;
        SchemaHeader::check(header.as_deref(), SCENE_SCHEMA)?;
        Ok(Self { lines, line_no: 1 })
    }
}

impl<R: BufRead> Iterator for SceneReader<R> {
    type Item = std::result::Result<SceneRecord, LineError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.line_no += 1;
            let line_err = |field: &str, message: String| LineError {
                line: self.line_no,
                field: field.to_string(),
                message,
            };
            let line = match line {
                Ok(l) => l,
                Err(e) => return Some(Err(line_err("line", e.to_string()))),
            };
            if line.trim().is_empty() {
                continue;
            }
            let record: SceneRecord = match serde_json::from_str(&line) {
                Ok(r) => r,
                Err(e) => return Some(Err(line_err("json", e.to_string()))),
            };
            return Some(match record.validate() {
                Ok(()) => Ok(record),
                Err((field, message)) => Err(line_err(&field, message)),
            });
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ingested {
    pub records: Vec<SceneRecord>,
    pub errors: Vec<LineError>,
}

/// Reads a scenes file, collecting valid records and per-line failures.
pub fn ingest(path: impl AsRef<Path>) -> Result<Ingested> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Ingested::default();
    for item in SceneReader::new(BufReader::new(file))? {
        match item {
            Ok(r) => out.records.push(r),
            Err(e) => out.errors.push(e),
        }
    }
    Ok(out)
}

pub fn write_scenes(path: impl AsRef<Path>, records: &[SceneRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = |line: String| writeln!(w, "{line}").map_err(|e| Error::io(path, e));
    emit(serde_json::to_string(&SchemaHeader::new(SCENE_SCHEMA))?)?;
    for r in records {
        emit(serde_json::to_string(r)?)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
