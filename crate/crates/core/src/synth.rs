//! Deterministic speech-like test signals: a harmonic source with linear F0
//! drift under a raised-cosine syllable envelope, plus uniform noise.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audio::{AudioBuffer, CANONICAL_RATE};
use crate::error::{Error, Result};

const HARMONIC_GAINS: [f64; 4] = [1.0, 0.5, 0.25, 0.125];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Starting fundamental, Hz.
    pub f0: f64,
    /// F0 drift, Hz/s.
    pub f0_slope: f64,
    pub amplitude: f64,
    /// Syllable (amplitude pulse) rate, Hz.
    pub syllable_rate: f64,
    /// Seconds.
    pub duration: f64,
    pub noise_floor: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Parameter(msg.to_string()))
            }
        };
        check(self.duration >= 0.5, "duration must be at least 0.5 s")?;
        check(
            (50.0..=500.0).contains(&self.f0),
            "f0 must lie in [50, 500] Hz",
        )?;
        check(
            (0.5..=8.0).contains(&self.syllable_rate),
            "syllable rate must lie in [0.5, 8] Hz",
        )?;
        check(
            (0.0..=1.0).contains(&self.amplitude),
            "amplitude must lie in [0, 1]",
        )?;
        check(
            (0.0..=1.0).contains(&self.noise_floor),
            "noise floor must lie in [0, 1]",
        )?;
        check(self.f0_slope.is_finite(), "f0 slope must be finite")
    }
}

/// Renders `spec` at 16 kHz. The harmonic sum is scaled so its peak equals
/// `amplitude`; output is clamped to `[-1, 1]`.
pub fn synth_speech(spec: &SynthSpec) -> Result<AudioBuffer> {
    spec.validate()?;
    let rate = CANONICAL_RATE as f64;
    let nyquist = rate / 2.0;
    let n = (spec.duration * rate).round() as usize;
    let norm: f64 = HARMONIC_GAINS.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            let inst_f0 = spec.f0 + spec.f0_slope * t;
            let cycles = spec.f0 * t + 0.5 * spec.f0_slope * t * t;
            let voiced: f64 = HARMONIC_GAINS
                .iter()
                .enumerate()
                .map(|(h, gain)| {
                    let order = (h + 1) as f64;
                    if (order * inst_f0).abs() >= nyquist {
                        0.0
                    } else {
                        gain * (2.0 * PI * order * cycles).sin()
                    }
                })
                .sum();
            let envelope = 0.5 - 0.5 * (2.0 * PI * spec.syllable_rate * t).cos();
            let noise = spec.noise_floor * rng.random_range(-1.0..=1.0);
            let s = spec.amplitude * envelope * voiced / norm + noise;
            s.clamp(-1.0, 1.0) as f32
        })
        .collect();
    AudioBuffer::new(samples, CANONICAL_RATE)
}
