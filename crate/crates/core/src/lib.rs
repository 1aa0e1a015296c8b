//! Emotion-aware speech features, prosody variants, trajectory re-timing,
//! CoT dataset assembly and open-loop planning metrics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arousal;
pub mod audio;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod intent;
pub mod prosody;
pub mod synth;
pub mod trajectory;

pub use arousal::{
    arousal, label_by_ratio, label_emotion, sigmoid, ArousalScore, ArousalWeights, EmotionLabel,
    LabelThresholds, SigmoidParams,
};
pub use audio::{decode_wav, encode_wav, read_wav, write_wav, AudioBuffer, CANONICAL_RATE};
pub use dataset::{
    build, ingest, read_dataset, validate_dataset, BuildConfig, BuildReport, CotRecord,
    SceneRecord, ValidationReport,
};
pub use error::{Error, Result};
pub use eval::{
    collision_flags, evaluate, l2_error, obb_overlap, EvalOptions, EvalReport, HorizonMode, ObbBox,
};
pub use features::{
    extract_features, normalize_features, FeatureSummary, NormalizationRanges, NormalizedFeatures,
};
pub use intent::{
    classify, fit_intents, parse_command, render_command, ActionBand, CommandText, IntentFeature,
    IntentModel, Intention,
};
pub use prosody::{emotionalize, pitch_shift, time_stretch, EmotionPreset, ProsodyParams};
pub use synth::{synth_speech, SynthSpec};
pub use trajectory::{
    arc_length, base_speed, distance_to_polyline, interpolate, modulate, modulate_default,
    reparameterize, speed_profile, ArcLengthTable, EmotionProfileParams, ModulatedTrajectory,
    ReparamSchedule, SpeedProfile, Trajectory, Waypoint,
};
