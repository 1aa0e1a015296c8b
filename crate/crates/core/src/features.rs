//! Frame-level speech descriptors: RMS energy, autocorrelation pitch,
//! onset-autocorrelation tempo and spectral centroid.
//!
//! All analysis runs at [`CANONICAL_RATE`] on 25 ms frames with a 10 ms hop.
//! Spectral quantities use a Hann window zero-padded to [`FFT_LEN`].

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::audio::{AudioBuffer, CANONICAL_RATE};
use crate::error::{Error, Result};

pub const FRAME_LEN: usize = 400;
pub const HOP_LEN: usize = 160;
pub const FFT_LEN: usize = 512;
pub const MIN_DURATION_S: f64 = 0.5;

pub const PITCH_MIN_HZ: f64 = 75.0;
pub const PITCH_MAX_HZ: f64 = 400.0;
pub const VOICING_THRESHOLD: f64 = 0.3;
pub const TEMPO_MIN_BPM: f64 = 60.0;
pub const TEMPO_MAX_BPM: f64 = 200.0;

/// Frames quieter than this fraction of the loudest frame are never voiced.
const VOICING_ENERGY_FLOOR: f64 = 0.05;
/// Among candidate lags, the shortest one within this fraction of the best wins.
const OCTAVE_PREFERENCE: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub rms_mean: f64,
    pub f0_mean: f64,
    pub tempo_bpm: f64,
    pub centroid_mean: f64,
}

impl FeatureSummary {
    pub const SILENT: FeatureSummary = FeatureSummary {
        rms_mean: 0.0,
        f0_mean: 0.0,
        tempo_bpm: 0.0,
        centroid_mean: 0.0,
    };
}

/// Features mapped into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedFeatures {
    pub r_n: f64,
    pub f_n: f64,
    pub t_n: f64,
    pub c_n: f64,
}

impl NormalizedFeatures {
    pub fn new(r_n: f64, f_n: f64, t_n: f64, c_n: f64) -> Self {
        Self { r_n, f_n, t_n, c_n }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.r_n, self.f_n, self.t_n, self.c_n]
    }
}

/// Reference ranges for the min-max normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRanges {
    pub rms: (f64, f64),
    pub f0: (f64, f64),
    pub tempo: (f64, f64),
    pub centroid: (f64, f64),
}

impl Default for NormalizationRanges {
    fn default() -> Self {
        Self {
            rms: (0.0, 0.35),
            f0: (PITCH_MIN_HZ, PITCH_MAX_HZ),
            tempo: (TEMPO_MIN_BPM, TEMPO_MAX_BPM),
            centroid: (500.0, 4000.0),
        }
    }
}

pub fn normalize_features(raw: &FeatureSummary) -> NormalizedFeatures {
    normalize_with(raw, &NormalizationRanges::default())
}

pub fn normalize_with(raw: &FeatureSummary, ranges: &NormalizationRanges) -> NormalizedFeatures {
    let map = |x: f64, (lo, hi): (f64, f64)| ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
    NormalizedFeatures {
        r_n: map(raw.rms_mean, ranges.rms),
        f_n: map(raw.f0_mean, ranges.f0),
        t_n: map(raw.tempo_bpm, ranges.tempo),
        c_n: map(raw.centroid_mean, ranges.centroid),
    }
}

pub fn extract_features(audio: &AudioBuffer) -> Result<FeatureSummary> {
    if audio.duration() < MIN_DURATION_S {
        return Err(Error::TooShort {
            actual_s: audio.duration(),
            required_s: MIN_DURATION_S,
        });
    }
    let audio = audio.resampled(CANONICAL_RATE);
    if audio.samples.iter().all(|&s| s == 0.0) {
        return Ok(FeatureSummary::SILENT);
    }
    let rate = audio.sample_rate as f64;
    let frames: Vec<&[f32]> = frames(&audio.samples).collect();

    let rms: Vec<f64> = frames.iter().map(|f| frame_rms(f)).collect();
    let rms_mean = mean(&rms);

    let loudest = rms.iter().copied().fold(0.0, f64::max);
    let pitches: Vec<f64> = frames
        .iter()
        .zip(&rms)
        .filter(|(_, &r)| r > 0.0 && r >= VOICING_ENERGY_FLOOR * loudest)
        .filter_map(|(f, _)| frame_pitch(f, rate))
        .collect();
    let f0_mean = if pitches.is_empty() {
        0.0
    } else {
        mean(&pitches)
    };

    let spectra = magnitude_spectra(&frames);
    let centroids: Vec<f64> = spectra
        .iter()
        .filter_map(|mag| spectral_centroid(mag, rate))
        .collect();
    let centroid_mean = if centroids.is_empty() {
        0.0
    } else {
        mean(&centroids)
    };

    let envelope = flux_envelope(&spectra);
    let tempo_bpm = tempo_from_envelope(&envelope, rate / HOP_LEN as f64).unwrap_or(0.0);

    Ok(FeatureSummary {
        rms_mean,
        f0_mean,
        tempo_bpm,
        centroid_mean,
    })
}

fn frames(samples: &[f32]) -> impl Iterator<Item = &[f32]> {
    let count = if samples.len() < FRAME_LEN {
        0
    } else {
        1 + (samples.len() - FRAME_LEN) / HOP_LEN
    };
    (0..count).map(move |i| &samples[i * HOP_LEN..i * HOP_LEN + FRAME_LEN])
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn frame_rms(frame: &[f32]) -> f64 {
    if frame.is_empty() {
        return 0.0;
    }
    let sum_sq: f64 = frame.iter().map(|&s| (s as f64) * (s as f64)).sum();
    (sum_sq / frame.len() as f64).sqrt()
}

fn lag_product(frame: &[f32], lag: usize) -> f64 {
    frame
        .iter()
        .zip(&frame[lag..])
        .map(|(&a, &b)| a as f64 * b as f64)
        .sum()
}

/// Autocorrelation pitch estimate for a single frame, or `None` when unvoiced.
///
/// Candidate lags come from the energy-normalized (biased) autocorrelation over
/// the 75-400 Hz band; the frame is voiced when the best candidate reaches
/// [`VOICING_THRESHOLD`]. The chosen lag is refined with a parabola through the
/// per-lag normalized cross-correlation.
pub fn frame_pitch(frame: &[f32], sample_rate: f64) -> Option<f64> {
    let n = frame.len();
    let energy = lag_product(frame, 0);
    if energy <= 0.0 {
        return None;
    }
    let lag_min = ((sample_rate / PITCH_MAX_HZ).floor() as usize).max(2);
    let lag_max = ((sample_rate / PITCH_MIN_HZ).ceil() as usize).min(n.saturating_sub(2));
    if lag_min >= lag_max {
        return None;
    }
    let acf: Vec<f64> = (lag_min - 1..=lag_max + 1)
        .map(|lag| lag_product(frame, lag) / energy)
        .collect();
    let at = |lag: usize| acf[lag + 1 - lag_min];

    let peaks: Vec<usize> = (lag_min..=lag_max)
        .filter(|&lag| at(lag) > at(lag - 1) && at(lag) >= at(lag + 1))
        .collect();
    let best = peaks
        .iter()
        .map(|&lag| at(lag))
        .fold(f64::NEG_INFINITY, f64::max);
    if !(best >= VOICING_THRESHOLD) {
        return None;
    }
    let lag = *peaks
        .iter()
        .find(|&&lag| at(lag) >= OCTAVE_PREFERENCE * best)?;

    let c_prev = nccf(frame, lag - 1);
    let c_mid = nccf(frame, lag);
    let c_next = nccf(frame, lag + 1);
    let denom = c_prev - 2.0 * c_mid + c_next;
    let shift = if denom < 0.0 {
        (0.5 * (c_prev - c_next) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    Some(sample_rate / (lag as f64 + shift))
}

/// Cross-correlation of the frame with itself shifted by `lag`, normalized by
/// the energy of both overlapping parts.
fn nccf(frame: &[f32], lag: usize) -> f64 {
    let head = &frame[..frame.len() - lag];
    let tail = &frame[lag..];
    let e1: f64 = head.iter().map(|&s| (s as f64).powi(2)).sum();
    let e2: f64 = tail.iter().map(|&s| (s as f64).powi(2)).sum();
    if e1 <= 0.0 || e2 <= 0.0 {
        return 0.0;
    }
    lag_product(frame, lag) / (e1 * e2).sqrt()
}

fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / len as f64).cos())
        .collect()
}

/// Hann-windowed magnitude spectra (bins `0..=FFT_LEN/2`) for each frame.
fn magnitude_spectra(frames: &[&[f32]]) -> Vec<Vec<f64>> {
    let fft = FftPlanner::<f64>::new().plan_fft_forward(FFT_LEN);
    let window = hann(FRAME_LEN);
    let mut buf = vec![Complex::new(0.0, 0.0); FFT_LEN];
    frames
        .iter()
        .map(|frame| {
            buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
            for ((slot, &s), w) in buf.iter_mut().zip(frame.iter()).zip(&window) {
                slot.re = s as f64 * w;
            }
            fft.process(&mut buf);
            buf[..=FFT_LEN / 2].iter().map(|c| c.norm()).collect()
        })
        .collect()
}

fn spectral_centroid(magnitudes: &[f64], sample_rate: f64) -> Option<f64> {
    let total: f64 = magnitudes.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let bin_hz = sample_rate / FFT_LEN as f64;
    let weighted: f64 = magnitudes
        .iter()
        .enumerate()
        .map(|(k, m)| k as f64 * bin_hz * m)
        .sum();
    Some(weighted / total)
}

/// Half-wave-rectified spectral flux between consecutive frames.
fn flux_envelope(spectra: &[Vec<f64>]) -> Vec<f64> {
    spectra
        .windows(2)
        .map(|pair| {
            pair[1]
                .iter()
                .zip(&pair[0])
                .map(|(cur, prev)| (cur - prev).max(0.0))
                .sum()
        })
        .collect()
}

/// Onset-strength envelope of `audio` (one value per hop after the first frame),
/// sampled at `sample_rate / HOP_LEN` after resampling to the canonical rate.
pub fn onset_envelope(audio: &AudioBuffer) -> Vec<f64> {
    let audio = audio.resampled(CANONICAL_RATE);
    let frames: Vec<&[f32]> = frames(&audio.samples).collect();
    flux_envelope(&magnitude_spectra(&frames))
}

/// Frame rate of [`onset_envelope`] in Hz.
pub fn onset_frame_rate() -> f64 {
    CANONICAL_RATE as f64 / HOP_LEN as f64
}

/// Onset smoothing width, seconds.
pub const ONSET_SMOOTHING_S: f64 = 0.02;

/// Mean-removed envelope convolved with a unit-sum Gaussian of
/// [`ONSET_SMOOTHING_S`] standard deviation, truncated at 3 sigma.
pub fn smooth_envelope(envelope: &[f64], frame_rate: f64) -> Vec<f64> {
    let m = mean(envelope);
    let sigma = ONSET_SMOOTHING_S * frame_rate;
    let radius = (3.0 * sigma).ceil() as isize;
    let kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-0.5 * (k as f64 / sigma).powi(2)).exp())
        .collect();
    let norm: f64 = kernel.iter().sum();
    let n = envelope.len() as isize;
    (0..n)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .filter_map(|(j, w)| {
                    let t = i + j as isize - radius;
                    (0..n).contains(&t).then(|| w * (envelope[t as usize] - m))
                })
                .sum::<f64>()
                / norm
        })
        .collect()
}

/// Picks the strongest autocorrelation lag of the smoothed envelope in the
/// 60-200 BPM band. `None` when the envelope carries no positive correlation.
pub fn tempo_from_envelope(envelope: &[f64], frame_rate: f64) -> Option<f64> {
    let lag_min = (frame_rate * 60.0 / TEMPO_MAX_BPM).ceil() as usize;
    let lag_max = (frame_rate * 60.0 / TEMPO_MIN_BPM).floor() as usize;
    if envelope.len() <= lag_max + 1 || lag_min < 2 {
        return None;
    }
    let centered = smooth_envelope(envelope, frame_rate);
    let acf = |lag: usize| -> f64 {
        centered
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum()
    };
    let scores: Vec<f64> = (lag_min - 1..=lag_max + 1).map(acf).collect();
    let at = |lag: usize| scores[lag + 1 - lag_min];
    let (best_lag, best) =
        (lag_min..=lag_max)
            .map(|lag| (lag, at(lag)))
            .fold((0, f64::NEG_INFINITY), |acc, cur| {
                if cur.1 > acc.1 {
                    cur
                } else {
                    acc
                }
            });
    if !(best > 0.0) {
        return None;
    }
    let mut lag = best_lag as f64;
    if best_lag > lag_min && best_lag < lag_max {
        let (a, b, c) = (at(best_lag - 1), best, at(best_lag + 1));
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            lag += (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
        }
    }
    Some(60.0 * frame_rate / lag)
}
