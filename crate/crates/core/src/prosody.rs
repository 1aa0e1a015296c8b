//! Tempo and pitch modification for emotional variants of a clip.
//!
//! Time stretching is waveform-similarity overlap-add (WSOLA): Hann frames of
//! 30 ms are laid down every 15 ms of output, each taken from near its nominal
//! input position at the offset (within +-10 ms) that best continues the
//! previously copied frame. Pitch shifting resamples and then stretches back
//! to the original duration.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::arousal::EmotionLabel;
use crate::audio::{read_linear, AudioBuffer, CANONICAL_RATE};
use crate::error::{Error, Result};

pub const WINDOW_S: f64 = 0.030;
pub const SEARCH_RADIUS_S: f64 = 0.010;
pub const MIN_FACTOR: f64 = 0.5;
pub const MAX_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProsodyParams {
    /// Output duration is input duration divided by this.
    pub tempo_factor: f64,
    /// Output F0 is input F0 multiplied by this.
    pub pitch_factor: f64,
}

impl ProsodyParams {
    pub fn validate(&self) -> Result<()> {
        check_factor(self.tempo_factor)?;
        check_factor(self.pitch_factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionPreset {
    pub emotion: EmotionLabel,
    pub params: ProsodyParams,
}

impl EmotionPreset {
    pub const URGENT: EmotionPreset = EmotionPreset {
        emotion: EmotionLabel::Urgent,
        params: ProsodyParams {
            tempo_factor: 1.3,
            pitch_factor: 1.25,
        },
    };
    pub const HESITANT: EmotionPreset = EmotionPreset {
        emotion: EmotionLabel::Hesitant,
        params: ProsodyParams {
            tempo_factor: 0.75,
            pitch_factor: 0.85,
        },
    };

    pub fn for_emotion(emotion: EmotionLabel) -> Option<EmotionPreset> {
        match emotion {
            EmotionLabel::Normal => None,
            EmotionLabel::Urgent => Some(Self::URGENT),
            EmotionLabel::Hesitant => Some(Self::HESITANT),
        }
    }
}

fn check_factor(factor: f64) -> Result<()> {
    if !(MIN_FACTOR..=MAX_FACTOR).contains(&factor) {
        return Err(Error::Parameter(format!(
            "prosody factor {factor} outside [{MIN_FACTOR}, {MAX_FACTOR}]"
        )));
    }
    Ok(())
}

/// Changes duration by `1 / factor` while keeping pitch.
pub fn time_stretch(audio: &AudioBuffer, factor: f64) -> Result<AudioBuffer> {
    check_factor(factor)?;
    let audio = audio.resampled(CANONICAL_RATE);
    let rate = audio.sample_rate as f64;
    let window = (WINDOW_S * rate).round() as usize;
    let radius = (SEARCH_RADIUS_S * rate).round() as usize;
    let samples = wsola(&audio.samples, factor, window, radius);
    AudioBuffer::new(samples, audio.sample_rate)
}

fn wsola(input: &[f32], factor: f64, window: usize, radius: usize) -> Vec<f32> {
    let out_len = (input.len() as f64 / factor).round() as usize;
    if out_len == 0 {
        return Vec::new();
    }
    let half = window / 2;
    let synthesis_hop = half;
    let analysis_hop = synthesis_hop as f64 * factor;

    // Half a window of leading silence lets the first frame's centre land on
    // input sample 0; trailing silence covers the last frames and the search.
    let mut padded = vec![0.0f32; half];
    padded.extend_from_slice(input);
    padded.resize(padded.len() + window + 2 * radius + synthesis_hop, 0.0);
    let last_start = padded.len() - window;

    let hann: Vec<f32> = (0..window)
        .map(|i| (0.5 - 0.5 * (2.0 * PI * i as f64 / window as f64).cos()) as f32)
        .collect();
    let frame_count = (out_len + half).div_ceil(synthesis_hop) + 1;
    let mut out = vec![0.0f32; frame_count * synthesis_hop + window];

    let mut prev: Option<usize> = None;
    for k in 0..frame_count {
        let nominal = ((k as f64 * analysis_hop).round() as usize).min(last_start);
        let start = match prev {
            None => nominal,
            Some(p) => {
                let natural = (p + synthesis_hop).min(last_start);
                best_offset(&padded, natural, nominal, radius, window, last_start)
            }
        };
        let dst = &mut out[k * synthesis_hop..k * synthesis_hop + window];
        for ((o, &s), &w) in dst
            .iter_mut()
            .zip(&padded[start..start + window])
            .zip(&hann)
        {
            *o += s * w;
        }
        prev = Some(start);
    }
    out.drain(..half);
    out.truncate(out_len);
    out
}

/// Start position within `nominal +- radius` whose frame correlates best with
/// the frame starting at `natural`.
fn best_offset(
    signal: &[f32],
    natural: usize,
    nominal: usize,
    radius: usize,
    window: usize,
    last_start: usize,
) -> usize {
    let target = &signal[natural..natural + window];
    let lo = nominal.saturating_sub(radius);
    let hi = (nominal + radius).min(last_start);
    let mut best = nominal.min(hi);
    let mut best_score = f64::NEG_INFINITY;
    for start in lo..=hi {
        let score: f64 = signal[start..start + window]
            .iter()
            .zip(target)
            .map(|(&a, &b)| a as f64 * b as f64)
            .sum();
        if score > best_score {
            best_score = score;
            best = start;
        }
    }
    best
}

/// Scales pitch by `factor` while keeping duration.
pub fn pitch_shift(audio: &AudioBuffer, factor: f64) -> Result<AudioBuffer> {
    check_factor(factor)?;
    let audio = audio.resampled(CANONICAL_RATE);
    let shifted_len = (audio.len() as f64 / factor).round() as usize;
    let resampled = AudioBuffer::new(
        read_linear(&audio.samples, factor, shifted_len),
        audio.sample_rate,
    )?;
    let mut out = time_stretch(&resampled, 1.0 / factor)?;
    out.samples.resize(audio.len(), 0.0);
    Ok(out)
}

pub fn apply_prosody(audio: &AudioBuffer, params: &ProsodyParams) -> Result<AudioBuffer> {
    params.validate()?;
    let stretched = time_stretch(audio, params.tempo_factor)?;
    pitch_shift(&stretched, params.pitch_factor)
}

/// Applies the urgent or hesitant preset. `Normal` returns the input unchanged.
pub fn emotionalize(audio: &AudioBuffer, emotion: EmotionLabel) -> Result<AudioBuffer> {
    match EmotionPreset::for_emotion(emotion) {
        None => Ok(audio.clone()),
        Some(preset) => apply_prosody(audio, &preset.params),
    }
}
