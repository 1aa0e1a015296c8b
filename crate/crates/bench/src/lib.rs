//! Shared inputs for the criterion benches.

use echo_core::{synth_speech, AudioBuffer, SynthSpec, Waypoint};

/// Three seconds of speech-like audio at 16 kHz.
pub fn speech_clip() -> AudioBuffer {
    synth_speech(&SynthSpec {
        f0: 220.0,
        f0_slope: 0.0,
        amplitude: 0.6,
        syllable_rate: 2.0,
        duration: 3.0,
        noise_floor: 0.002,
        seed: 1,
    })
    .expect("valid synth spec")
}

/// Gently curving 7-point path over 24 m.
pub fn curved_path() -> Vec<Waypoint> {
    (0..7)
        .map(|i| [4.0 * i as f64, 0.2 * (i * i) as f64])
        .collect()
}
