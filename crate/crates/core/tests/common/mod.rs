//! Fixtures and brute-force reference implementations shared by the
//! integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;
use std::path::Path;

use echo_core::dataset::{write_scenes, SceneRecord};
use echo_core::{AudioBuffer, EmotionLabel, ObbBox, SynthSpec, Waypoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

// ---------------------------------------------------------------- trajectories

/// Straight-line reference result of the full modulation pipeline.
pub struct OracleResult {
    pub points: Vec<Waypoint>,
    pub speeds: Vec<f64>,
    pub progress: Vec<f64>,
}

/// Direct scalar evaluation of the speed curves, integration, normalization
/// and interpolation, written without any of the library's helpers.
pub fn oracle_modulate(
    points: &[Waypoint],
    duration: f64,
    emotion: EmotionLabel,
    seed: u64,
    noise: bool,
) -> OracleResult {
    let n = points.len();
    let mut total = 0.0;
    let mut cum = vec![0.0; n];
    for i in 1..n {
        let dx = points[i][0] - points[i - 1][0];
        let dy = points[i][1] - points[i - 1][1];
        total += (dx * dx + dy * dy).sqrt();
        cum[i] = total;
    }
    if total == 0.0 {
        return OracleResult {
            points: points.to_vec(),
            speeds: vec![0.0; n],
            progress: vec![0.0; n],
        };
    }
    let v_avg = total / duration;
    let dt = duration / (n as f64 - 1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut speeds = vec![0.0; n];
    for i in 0..n {
        let t = i as f64 * dt;
        let z: f64 = StandardNormal.sample(&mut rng);
        speeds[i] = match emotion {
            EmotionLabel::Normal => v_avg,
            EmotionLabel::Urgent => {
                let mut v = 1.6 * v_avg * (1.0 - (-2.0 * t).exp());
                if noise {
                    v += 0.03 * v_avg * z;
                }
                v.max(0.8 * v_avg).min(1.5 * v_avg)
            }
            EmotionLabel::Hesitant => {
                let mut v = 1.2 * v_avg * (1.0 - (-t).exp());
                if noise {
                    v += 0.05 * v_avg * z;
                }
                let mid = (n / 2) as i64;
                if (i as i64 - mid).abs() <= 1 {
                    v *= 0.6;
                }
                v.max(0.1 * v_avg).min(1.5 * v_avg)
            }
        };
    }

    let mut s = vec![0.0; n];
    for i in 1..n {
        s[i] = s[i - 1] + (speeds[i - 1] + speeds[i]) / 2.0 * dt;
    }
    let s_max = s.iter().cloned().fold(0.0, f64::max);
    let progress: Vec<f64> = s
        .iter()
        .map(|&x| (total * x / s_max).clamp(0.0, total))
        .collect();

    let out = progress
        .iter()
        .map(|&p| {
            if p >= total {
                return points[n - 1];
            }
            for j in 0..n - 1 {
                if cum[j] <= p && p < cum[j + 1] {
                    let f = (p - cum[j]) / (cum[j + 1] - cum[j]);
                    return [
                        points[j][0] + f * (points[j + 1][0] - points[j][0]),
                        points[j][1] + f * (points[j + 1][1] - points[j][1]),
                    ];
                }
            }
            points[0]
        })
        .collect();
    OracleResult {
        points: out,
        speeds,
        progress,
    }
}

/// Geometry families exercised by the trajectory tests.
pub fn random_path(rng: &mut ChaCha8Rng, n: usize) -> Vec<Waypoint> {
    let kind = rng.random_range(0..6);
    let mut pts: Vec<Waypoint> = match kind {
        0 => {
            let (ux, uy) = unit(rng.random_range(-PI..PI));
            let step = rng.random_range(0.1..8.0);
            (0..n)
                .map(|i| [ux * step * i as f64, uy * step * i as f64])
                .collect()
        }
        1 => {
            let r = rng.random_range(2.0..40.0);
            let sweep = rng.random_range(-PI..PI);
            (0..n)
                .map(|i| {
                    let a = sweep * i as f64 / (n - 1) as f64;
                    [r * a.sin(), r * (1.0 - a.cos())]
                })
                .collect()
        }
        2 => {
            let mut p = [0.0, 0.0];
            (0..n)
                .map(|_| {
                    let here = p;
                    p[0] += rng.random_range(-5.0..5.0);
                    p[1] += rng.random_range(-5.0..5.0);
                    here
                })
                .collect()
        }
        3 => (0..n)
            .map(|i| [2.0 * i as f64, if i % 2 == 0 { 0.0 } else { 1.5 }])
            .collect(),
        4 => {
            // stop-and-go: runs of repeated points
            let mut p = [0.0, 0.0];
            (0..n)
                .map(|_| {
                    if rng.random_bool(0.5) {
                        p[0] += rng.random_range(0.5..4.0);
                        p[1] += rng.random_range(-1.0..1.0);
                    }
                    p
                })
                .collect()
        }
        _ => {
            // ego at rest for a while, then moving
            let start = rng.random_range(1..n - 1);
            (0..n)
                .map(|i| {
                    [
                        if i < start {
                            0.0
                        } else {
                            3.0 * (i - start + 1) as f64
                        },
                        0.0,
                    ]
                })
                .collect()
        }
    };
    if rng.random_bool(0.2) {
        // duplicate a point in place
        let i = rng.random_range(1..n);
        pts[i] = pts[i - 1];
    }
    pts
}

fn unit(a: f64) -> (f64, f64) {
    (a.cos(), a.sin())
}

pub fn straight_path(n: usize, length: f64) -> Vec<Waypoint> {
    (0..n)
        .map(|i| [length * i as f64 / (n - 1) as f64, 0.0])
        .collect()
}

// ---------------------------------------------------------------------- boxes

/// Closed point-in-box test in the box's own frame.
pub fn box_contains(b: &ObbBox, p: Waypoint) -> bool {
    let (c, s) = (b.yaw.cos(), b.yaw.sin());
    let (dx, dy) = (p[0] - b.cx, p[1] - b.cy);
    let u = dx * c + dy * s;
    let v = -dx * s + dy * c;
    const EPS: f64 = 1e-9;
    u.abs() <= b.length / 2.0 + EPS && v.abs() <= b.width / 2.0 + EPS
}

/// Points every `spacing` metres along the outline of `b`, plus its corners
/// and centre.
pub fn outline_samples(b: &ObbBox, spacing: f64) -> Vec<Waypoint> {
    let (c, s) = (b.yaw.cos(), b.yaw.sin());
    let to_world = |u: f64, v: f64| [b.cx + u * c - v * s, b.cy + u * s + v * c];
    let (hl, hw) = (b.length / 2.0, b.width / 2.0);
    let mut out = vec![[b.cx, b.cy]];
    let corners = [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)];
    for k in 0..4 {
        let (u0, v0) = corners[k];
        let (u1, v1) = corners[(k + 1) % 4];
        let len = ((u1 - u0).powi(2) + (v1 - v0).powi(2)).sqrt();
        let steps = (len / spacing).ceil() as usize;
        for j in 0..steps {
            let f = j as f64 / steps as f64;
            out.push(to_world(u0 + f * (u1 - u0), v0 + f * (v1 - v0)));
        }
    }
    out
}

/// Sampling decision: do any outline samples of either box fall in the other?
pub fn sampled_overlap(a: &ObbBox, b: &ObbBox, spacing: f64) -> bool {
    outline_samples(a, spacing)
        .iter()
        .any(|&p| box_contains(b, p))
        || outline_samples(b, spacing)
            .iter()
            .any(|&p| box_contains(a, p))
}

pub fn random_box(rng: &mut ChaCha8Rng) -> ObbBox {
    ObbBox {
        cx: rng.random_range(-5.0..5.0),
        cy: rng.random_range(-5.0..5.0),
        yaw: rng.random_range(-PI..PI),
        length: rng.random_range(0.3..6.0),
        width: rng.random_range(0.3..3.0),
    }
}

// ---------------------------------------------------------------------- audio

pub fn tone(freq: f64, amplitude: f64, seconds: f64) -> AudioBuffer {
    let n = (seconds * 16000.0) as usize;
    let samples = (0..n)
        .map(|i| (amplitude * (2.0 * PI * freq * i as f64 / 16000.0).sin()) as f32)
        .collect();
    AudioBuffer::new(samples, 16000).unwrap()
}

/// Tone gated on for the first 40% of every period at `rate_hz`.
pub fn pulsed_tone(freq: f64, rate_hz: f64, seconds: f64) -> AudioBuffer {
    let n = (seconds * 16000.0) as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / 16000.0;
            let on = (t * rate_hz).fract() < 0.4;
            if on {
                (0.5 * (2.0 * PI * freq * t).sin()) as f32
            } else {
                0.0
            }
        })
        .collect();
    AudioBuffer::new(samples, 16000).unwrap()
}

/// Short decaying noise bursts at `rate_hz`.
pub fn pulse_train(rate_hz: f64, seconds: f64, seed: u64) -> AudioBuffer {
    let n = (seconds * 16000.0) as usize;
    let period = 16000.0 / rate_hz;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|i| {
            let phase = (i as f64 % period) / 16000.0;
            let env = if phase < 0.03 {
                (-phase / 0.008).exp()
            } else {
                0.0
            };
            (0.8 * env * rng.random_range(-1.0..1.0)) as f32
        })
        .collect();
    AudioBuffer::new(samples, 16000).unwrap()
}

/// A mid-range synthetic voice drawn from `rng`. Syllable rates keep both
/// emotion presets inside the 60-200 BPM tempo band.
pub fn random_voice(rng: &mut ChaCha8Rng) -> SynthSpec {
    SynthSpec {
        f0: rng.random_range(110.0..260.0),
        f0_slope: rng.random_range(-10.0..10.0),
        amplitude: rng.random_range(0.3..0.8),
        syllable_rate: rng.random_range(1.6..2.4),
        duration: rng.random_range(2.0..3.5),
        noise_floor: rng.random_range(0.0..0.005),
        seed: rng.random(),
    }
}

// --------------------------------------------------------------------- scenes

fn agent(cx: f64, cy: f64, yaw: f64) -> ObbBox {
    ObbBox {
        cx,
        cy,
        yaw,
        length: 4.5,
        width: 1.9,
    }
}

/// Deterministic, varied scenes: cruising, turning, braking, stopped.
pub fn synthetic_scenes(count: usize, seed: u64) -> Vec<SceneRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let v0: f64 = if i % 7 == 6 {
                0.0
            } else {
                rng.random_range(0.0..14.0)
            };
            let kind = i % 4;
            let (accel, turn) = match kind {
                0 => (0.0, 0.0),
                1 => (rng.random_range(0.5..2.0), 0.0),
                2 => (-v0.min(4.0) / 3.0, 0.0),
                _ => (0.0, rng.random_range(0.15..0.35)),
            };
            let mut pos = [0.0, 0.0];
            let mut heading = 0.0f64;
            let mut v = v0;
            let future: Vec<Waypoint> = (0..6)
                .map(|_| {
                    v = (v + accel * 0.5).max(0.0);
                    heading += turn * 0.5;
                    pos[0] += v * 0.5 * heading.cos();
                    pos[1] += v * 0.5 * heading.sin();
                    pos
                })
                .collect();
            let history: Vec<Waypoint> =
                (1..=4).rev().map(|k| [-v0 * 0.5 * k as f64, 0.0]).collect();
            let agents = (0..6)
                .map(|k| {
                    vec![
                        agent(20.0 + 2.0 * k as f64, 3.5, 0.0),
                        agent(-8.0, -3.5 + 0.5 * k as f64, 0.1),
                    ]
                })
                .collect();
            SceneRecord {
                scene_id: format!("scene-{:04}", i / 2),
                frame_id: format!("frame{i:04}"),
                timestamp: 1.5e9 + i as f64 * 0.5,
                image_path: format!("samples/CAM_FRONT/frame{i:04}.jpg"),
                ego_history: history,
                ego_future: future,
                ego_speed: v0,
                ego_accel: accel,
                agents,
            }
        })
        .collect()
}

pub fn write_fixture_scenes(path: &Path, count: usize, seed: u64) -> Vec<SceneRecord> {
    let scenes = synthetic_scenes(count, seed);
    write_scenes(path, &scenes).unwrap();
    scenes
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn max_point_gap(a: &[Waypoint], b: &[Waypoint]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(p, q)| (p[0] - q[0]).hypot(p[1] - q[1]))
        .fold(0.0, f64::max)
}
