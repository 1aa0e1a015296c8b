//! PCM buffers and RIFF/WAVE I/O.

use std::io::Cursor;
use std::path::Path;

use crate::error::{Error, Result};

/// Rate every analysis and synthesis routine works at.
pub const CANONICAL_RATE: u32 = 16_000;

/// Mono PCM samples in `[-1, 1]` at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Parameter("sample rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::Parameter("samples must be finite".into()));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Multiplies every sample by `gain`.
    pub fn scaled(&self, gain: f32) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }

    /// Linear-interpolation resampling to `rate`. Returns a clone when the rate already matches.
    pub fn resampled(&self, rate: u32) -> Self {
        if rate == self.sample_rate {
            return self.clone();
        }
        let ratio = self.sample_rate as f64 / rate as f64;
        let out_len = (self.samples.len() as f64 / ratio).round() as usize;
        Self {
            samples: read_linear(&self.samples, ratio, out_len),
            sample_rate: rate,
        }
    }
}

/// Reads `out_len` samples from `input` at positions `i * step`, linearly interpolated.
/// Positions past the end read as zero.
pub(crate) fn read_linear(input: &[f32], step: f64, out_len: usize) -> Vec<f32> {
    (0..out_len)
        .map(|i| {
            let pos = i as f64 * step;
            let j = pos.floor() as usize;
            let frac = (pos - j as f64) as f32;
            let a = input.get(j).copied().unwrap_or(0.0);
            let b = input.get(j + 1).copied().unwrap_or(0.0);
            a + (b - a) * frac
        })
        .collect()
}

/// Decodes a RIFF/WAVE container holding PCM16 or float32 audio, mono or stereo.
/// Stereo is downmixed by averaging the channels.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioBuffer> {
    let reader = hound::WavReader::new(Cursor::new(bytes)).map_err(map_hound)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 || channels > 2 {
        return Err(Error::UnsupportedFormat(format!(
            "{} channels (expected 1 or 2)",
            spec.channels
        )));
    }
    let interleaved: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f32 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(map_hound)?,
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .collect::<std::result::Result<_, _>>()
            .map_err(map_hound)?,
        (format, bits) => {
            return Err(Error::UnsupportedFormat(format!(
                "{bits}-bit {format:?} samples (expected 16-bit PCM or 32-bit float)"
            )))
        }
    };
    let samples = if channels == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(2)
            .map(|frame| 0.5 * (frame[0] + frame[1]))
            .collect()
    };
    AudioBuffer::new(samples, spec.sample_rate)
}

fn map_hound(err: hound::Error) -> Error {
    match err {
        hound::Error::Unsupported => Error::UnsupportedFormat("codec not supported".into()),
        other => Error::Decode(other.to_string()),
    }
}

/// Encodes PCM16 mono at the buffer's sample rate. Samples are clamped to `[-1, 1]`.
pub fn encode_wav(audio: &AudioBuffer) -> Result<Vec<u8>> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: audio.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut cursor = Cursor::new(Vec::with_capacity(44 + audio.len() * 2));
    {
        let mut writer =
            hound::WavWriter::new(&mut cursor, spec).map_err(|e| Error::Decode(e.to_string()))?;
        for &s in &audio.samples {
            writer
                .write_sample(quantize(s))
                .map_err(|e| Error::Decode(e.to_string()))?;
        }
        writer
            .finalize()
            .map_err(|e| Error::Decode(e.to_string()))?;
    }
    Ok(cursor.into_inner())
}

fn quantize(s: f32) -> i16 {
    (s as f64 * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_wav(&bytes)
}

/// Writes PCM16 mono at 16 kHz, resampling first if needed.
pub fn write_wav(path: impl AsRef<Path>, audio: &AudioBuffer) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_wav(&audio.resampled(CANONICAL_RATE))?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
