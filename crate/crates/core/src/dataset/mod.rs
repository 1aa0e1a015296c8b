//! Scene ingest, CoT dataset assembly and dataset self-validation.
//!
//! Interchange files are JSON Lines whose first line is a schema header.
//! Scenes: `{"schema":"echo-scenes","version":1}`; built datasets:
//! `{"schema":"echo-cot","version":1}`.

mod build;
mod record;
mod scene;
mod validate;

pub use build::{
    build, derive_seed, AudioSource, BuildConfig, BuildReport, FlaggedRecord, SkippedRecord,
};
pub use record::{
    read_dataset, write_dataset, AnswerWaypoint, CotRecord, Reasoning, DATASET_SCHEMA,
};
pub use scene::{
    ingest, write_scenes, Ingested, LineError, SceneReader, SceneRecord, SCENE_SCHEMA,
};
pub use validate::{validate_dataset, Finding, FindingKind, ValidationReport};

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;
/// Future horizon of a scene, seconds.
pub const FUTURE_DURATION_S: f64 = 3.0;
pub const FUTURE_STEPS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaHeader {
    pub schema: String,
    pub version: u32,
}

impl SchemaHeader {
    pub fn new(schema: &str) -> Self {
        Self {
            schema: schema.to_string(),
            version: SCHEMA_VERSION,
        }
    }

    pub(crate) fn check(line: Option<&str>, schema: &str) -> crate::Result<()> {
        let line =
            line.ok_or_else(|| crate::Error::Schema(format!("missing {schema} header line")))?;
        let header: SchemaHeader = serde_json::from_str(line)
            .map_err(|e| crate::Error::Schema(format!("bad header line: {e}")))?;
        if header.schema != schema || header.version != SCHEMA_VERSION {
            return Err(crate::Error::Schema(format!(
                "expected {schema} v{SCHEMA_VERSION}, found {} v{}",
                header.schema, header.version
            )));
        }
        Ok(())
    }
}

/// Origin-anchored path through the future waypoints: the ego vehicle sits at
/// the ego-frame origin at t = 0 and the futures follow every 0.5 s.
pub fn anchored_path(future: &[crate::Waypoint]) -> Vec<crate::Waypoint> {
    std::iter::once([0.0, 0.0])
        .chain(future.iter().copied())
        .collect()
}
