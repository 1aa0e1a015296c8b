use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::record::{write_dataset, AnswerWaypoint, CotRecord, Reasoning};
use super::scene::{ingest, LineError, SceneRecord};
use super::{anchored_path, FUTURE_DURATION_S};
use crate::arousal::{
    arousal, label_emotion, ArousalScore, ArousalWeights, EmotionLabel, HESITANT_THRESHOLD,
    URGENT_THRESHOLD,
};
use crate::audio::{decode_wav, encode_wav, read_wav, AudioBuffer, CANONICAL_RATE};
use crate::error::{Error, Result};
use crate::features::{extract_features, normalize_features, FeatureSummary};
use crate::intent::{
    classify, fit_intents, render_command, CommandText, IntentFeature, DEFAULT_K, DEFAULT_STEP_S,
};
use crate::prosody::emotionalize;
use crate::synth::{synth_speech, SynthSpec};
use crate::trajectory::{modulate, EmotionProfileParams, Trajectory, Waypoint};

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AudioSource {
    /// Speech-like signals generated from each frame's command.
    #[default]
    Synthetic,
    /// Directory holding `{frame_id}.wav` base recordings.
    WavDir(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    pub emotions: Vec<EmotionLabel>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub audio_source: AudioSource,
}

fn default_k() -> usize {
    DEFAULT_K
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        if self.emotions.is_empty() {
            return Err(Error::Parameter(
                "at least one emotion must be requested".into(),
            ));
        }
        let unique: BTreeSet<_> = self.emotions.iter().collect();
        if unique.len() != self.emotions.len() {
            return Err(Error::Parameter("emotions must not repeat".into()));
        }
        if self.k < 2 {
            return Err(Error::Parameter(format!(
                "k must be at least 2, got {}",
                self.k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedRecord {
    pub frame_id: String,
    pub emotion: EmotionLabel,
    pub reason: String,
}

/// A record whose measured emotion differs from the one requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedRecord {
    pub record_id: String,
    pub requested: EmotionLabel,
    pub measured: EmotionLabel,
    pub arousal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildReport {
    pub scenes_ingested: usize,
    pub ingest_errors: Vec<LineError>,
    pub records_written: usize,
    /// Emitted records per requested emotion.
    pub requested_counts: BTreeMap<EmotionLabel, usize>,
    /// Emitted records per stored (measured) emotion.
    pub emotion_counts: BTreeMap<EmotionLabel, usize>,
    pub skipped: Vec<SkippedRecord>,
    pub flagged: Vec<FlaggedRecord>,
    /// Intention clusters were fitted (otherwise named per scene).
    pub intent_model_fitted: bool,
}

/// Stable 64-bit seed for `(seed, parts...)`.
pub fn derive_seed(seed: u64, parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Base voice for a frame: mid-range pitch, rate and loudness so that the
/// unmodified clip scores as normal arousal.
fn base_voice_spec(seed: u64, frame_id: &str, command: &CommandText) -> SynthSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[frame_id, "voice"]));
    let words = command.utterance().split_whitespace().count();
    SynthSpec {
        f0: rng.random_range(225.0..240.0),
        f0_slope: rng.random_range(-5.0..5.0),
        amplitude: rng.random_range(0.62..0.68),
        syllable_rate: rng.random_range(2.0..2.3),
        duration: (0.3 * words as f64).clamp(2.0, 4.0),
        noise_floor: 0.002,
        seed: rng.random(),
    }
}

struct SceneOutcome {
    records: Vec<CotRecord>,
    skipped: Vec<SkippedRecord>,
    flagged: Vec<FlaggedRecord>,
}

struct Measured {
    features: FeatureSummary,
    score: ArousalScore,
}

fn measure(bytes: &[u8]) -> Result<Measured> {
    let stored = decode_wav(bytes)?;
    let features = extract_features(&stored)?;
    let score = arousal(&normalize_features(&features), &ArousalWeights::default());
    Ok(Measured { features, score })
}

/// Arousal of a stored clip, exactly as the builder computes it.
pub(crate) fn measure_file(path: &Path) -> Result<ArousalScore> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(measure(&bytes)?.score)
}

fn ground_truth_speeds(future: &[Waypoint]) -> Vec<f64> {
    anchored_path(future)
        .windows(2)
        .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]) / DEFAULT_STEP_S)
        .collect()
}

fn answer_for(
    scene: &SceneRecord,
    emotion: EmotionLabel,
    seed: u64,
) -> Result<Vec<AnswerWaypoint>> {
    let (points, speeds) = match EmotionProfileParams::for_emotion(emotion, seed) {
        None => (
            scene.ego_future.clone(),
            ground_truth_speeds(&scene.ego_future),
        ),
        Some(params) => {
            let traj = Trajectory::new(anchored_path(&scene.ego_future), FUTURE_DURATION_S)?;
            let m = modulate(&traj, emotion, &params)?;
            (m.points[1..].to_vec(), m.speeds[1..].to_vec())
        }
    };
    Ok(points
        .iter()
        .zip(speeds)
        .map(|(p, speed)| AnswerWaypoint {
            x: p[0],
            y: p[1],
            speed,
        })
        .collect())
}

fn reasoning(
    features: &FeatureSummary,
    score: &ArousalScore,
    emotion: EmotionLabel,
    intention: &str,
    command: &CommandText,
) -> Reasoning {
    let audio_analysis = format!(
        "Mean RMS energy {:.4}, F0 {:.1} Hz, tempo {:.1} BPM, spectral centroid {:.0} Hz; arousal {:.3}.",
        features.rms_mean, features.f0_mean, features.tempo_bpm, features.centroid_mean, score.value
    );
    let emotion_detection = match emotion {
        EmotionLabel::Urgent => format!(
            "Arousal {:.3} is at or above {URGENT_THRESHOLD}: the user sounds urgent.",
            score.value
        ),
        EmotionLabel::Hesitant => format!(
            "Arousal {:.3} is at or below {HESITANT_THRESHOLD}: the user sounds hesitant.",
            score.value
        ),
        EmotionLabel::Normal => format!(
            "Arousal {:.3} lies between {HESITANT_THRESHOLD} and {URGENT_THRESHOLD}: the user sounds calm.",
            score.value
        ),
    };
    let pace = match emotion {
        EmotionLabel::Urgent => "with a faster speed profile",
        EmotionLabel::Hesitant => "with a slower, hesitating speed profile",
        EmotionLabel::Normal => "at the usual speed",
    };
    let trajectory_decision = format!(
        "Intention '{intention}': {} {pace}, keeping the planned path.",
        command.goal
    );
    Reasoning {
        audio_analysis,
        emotion_detection,
        trajectory_decision,
    }
}

fn base_audio(
    config: &BuildConfig,
    scene: &SceneRecord,
    command: &CommandText,
) -> Result<AudioBuffer> {
    match &config.audio_source {
        AudioSource::Synthetic => {
            synth_speech(&base_voice_spec(config.seed, &scene.frame_id, command))
        }
        AudioSource::WavDir(dir) => read_wav(dir.join(format!("{}.wav", scene.frame_id))),
    }
}

fn process_scene(
    config: &BuildConfig,
    scene: &SceneRecord,
    intention: &str,
    audio_dir: &Path,
) -> Result<SceneOutcome> {
    let mut outcome = SceneOutcome {
        records: Vec::new(),
        skipped: Vec::new(),
        flagged: Vec::new(),
    };
    let command = render_command(intention, scene.ego_speed, scene.ego_accel)?;
    let base = match base_audio(config, scene, &command) {
        Ok(b) => b,
        Err(e) => {
            for &emotion in &config.emotions {
                outcome.skipped.push(SkippedRecord {
                    frame_id: scene.frame_id.clone(),
                    emotion,
                    reason: format!("base audio unavailable: {e}"),
                });
            }
            return Ok(outcome);
        }
    };

    for &requested in &config.emotions {
        let record_id = format!("{}_{}", scene.frame_id, requested);
        let attempt = || -> Result<(CotRecord, Option<FlaggedRecord>)> {
            let audio = emotionalize(&base, requested)?;
            let bytes = encode_wav(&audio.resampled(CANONICAL_RATE))?;
            let audio_name = format!("{record_id}.wav");
            let audio_path = audio_dir.join(&audio_name);
            std::fs::write(&audio_path, &bytes).map_err(|e| Error::io(&audio_path, e))?;

            let Measured { features, score } = measure(&bytes)?;
            let emotion = label_emotion(&score);
            let traj_seed = derive_seed(config.seed, &[&record_id, "trajectory"]);
            let answer_trajectory = answer_for(scene, emotion, traj_seed)?;
            let flagged = (emotion != requested).then(|| FlaggedRecord {
                record_id: record_id.clone(),
                requested,
                measured: emotion,
                arousal: score.value,
            });
            let record = CotRecord {
                record_id: record_id.clone(),
                scene_id: scene.scene_id.clone(),
                frame_id: scene.frame_id.clone(),
                image_path: scene.image_path.clone(),
                audio_path: format!("audio/{audio_name}"),
                intention: intention.to_string(),
                reasoning: reasoning(&features, &score, emotion, intention, &command),
                command_text: command.clone(),
                normalized_features: normalize_features(&features),
                features,
                arousal: score.value,
                emotion,
                requested_emotion: requested,
                answer_trajectory,
                ground_truth: scene.ego_future.clone(),
                agents: scene.agents.clone(),
            };
            Ok((record, flagged))
        };
        match attempt() {
            Ok((record, flagged)) => {
                outcome.records.push(record);
                outcome.flagged.extend(flagged);
            }
            Err(e) => outcome.skipped.push(SkippedRecord {
                frame_id: scene.frame_id.clone(),
                emotion: requested,
                reason: e.to_string(),
            }),
        }
    }
    Ok(outcome)
}

/// Runs the augmentation pipeline and writes `dataset.jsonl`, `audio/*.wav`
/// and `build_report.json` (plus `intent_model.json` when clusters were fitted)
/// under `config.output`. Output depends only on the config contents.
pub fn build(config: &BuildConfig) -> Result<BuildReport> {
    config.validate()?;
    let ingested = ingest(&config.input)?;
    let mut ingest_errors = ingested.errors;
    let mut seen = BTreeSet::new();
    let mut scenes = Vec::new();
    for scene in ingested.records {
        if seen.insert(scene.frame_id.clone()) {
            scenes.push(scene);
        } else {
            ingest_errors.push(LineError {
                line: 0,
                field: "frame_id".into(),
                message: format!("duplicate frame_id {}", scene.frame_id),
            });
        }
    }
    log::info!(
        "ingested {} scenes ({} rejected) from {}",
        scenes.len(),
        ingest_errors.len(),
        config.input.display()
    );

    let audio_dir = config.output.join("audio");
    std::fs::create_dir_all(&audio_dir).map_err(|e| Error::io(&audio_dir, e))?;

    let features: Vec<IntentFeature> = scenes
        .iter()
        .map(|s| IntentFeature::from_future(&s.ego_future, s.ego_speed, DEFAULT_STEP_S))
        .collect();
    let intent_model_fitted = features.len() >= config.k;
    let intentions: Vec<String> = if intent_model_fitted {
        let model = fit_intents(&features, config.k, config.seed)?;
        let path = config.output.join("intent_model.json");
        std::fs::write(&path, model.to_json()?).map_err(|e| Error::io(&path, e))?;
        features
            .iter()
            .map(|f| classify(&model, f).to_string())
            .collect()
    } else {
        features
            .iter()
            .map(|f| f.intention(DEFAULT_STEP_S).name().to_string())
            .collect()
    };

    let outcomes: Vec<SceneOutcome> = scenes
        .par_iter()
        .zip(intentions.par_iter())
        .map(|(scene, intention)| process_scene(config, scene, intention, &audio_dir))
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut flagged = Vec::new();
    for o in outcomes {
        records.extend(o.records);
        skipped.extend(o.skipped);
        flagged.extend(o.flagged);
    }
    write_dataset(config.output.join("dataset.jsonl"), &records)?;

    let mut requested_counts = BTreeMap::new();
    let mut emotion_counts = BTreeMap::new();
    for r in &records {
        *requested_counts.entry(r.requested_emotion).or_insert(0) += 1;
        *emotion_counts.entry(r.emotion).or_insert(0) += 1;
    }
    let report = BuildReport {
        scenes_ingested: scenes.len(),
        ingest_errors,
        records_written: records.len(),
        requested_counts,
        emotion_counts,
        skipped,
        flagged,
        intent_model_fitted,
    };
    let report_path = config.output.join("build_report.json");
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)
        .map_err(|e| Error::io(&report_path, e))?;
    log::info!(
        "wrote {} records ({} skipped, {} flagged) to {}",
        report.records_written,
        report.skipped.len(),
        report.flagged.len(),
        config.output.display()
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        let a = derive_seed(0, &["f0_urgent", "trajectory"]);
        assert_eq!(a, derive_seed(0, &["f0_urgent", "trajectory"]));
        assert_ne!(a, derive_seed(1, &["f0_urgent", "trajectory"]));
        assert_ne!(derive_seed(0, &["ab", "c"]), derive_seed(0, &["a", "bc"]));
    }

    #[test]
    fn config_validation() {
        let mut c = BuildConfig {
            input: "in".into(),
            output: "out".into(),
            emotions: vec![],
            seed: 0,
            k: 6,
            audio_source: AudioSource::Synthetic,
        };
        assert!(c.validate().is_err());
        c.emotions = vec![EmotionLabel::Urgent, EmotionLabel::Urgent];
        assert!(c.validate().is_err());
        c.emotions = vec![EmotionLabel::Urgent];
        c.validate().unwrap();
    }

    #[test]
    fn config_json_shape() {
        let c: BuildConfig = serde_json::from_str(
            r#"{"input":"s.jsonl","output":"out","emotions":["normal","urgent"],"audio_source":{"wav_dir":"wavs"}}"#,
        )
        .unwrap();
        assert_eq!(c.seed, 0);
        assert_eq!(c.k, DEFAULT_K);
        assert_eq!(c.audio_source, AudioSource::WavDir("wavs".into()));
    }

    #[test]
    fn ground_truth_speeds_start_from_origin() {
        let speeds = ground_truth_speeds(&[[1.0, 0.0], [2.0, 0.0], [2.0, 0.0]]);
        assert_eq!(speeds, vec![2.0, 2.0, 0.0]);
    }
}
