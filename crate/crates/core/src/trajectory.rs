//! Emotion-conditioned time reparameterization of a waypoint path.
//!
//! The path shape never changes. The cumulative arc length of the input is
//! tabulated, an emotion-specific speed profile is integrated with the
//! trapezoid rule, the resulting progress is rescaled to the path length, and
//! new waypoints are read off the polyline by piecewise-linear interpolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::arousal::EmotionLabel;
use crate::error::{Error, Result};

/// `[x, y]` in meters.
pub type Waypoint = [f64; 2];

/// Waypoints sampled uniformly in time over `[0, duration]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub points: Vec<Waypoint>,
    /// Seconds.
    pub duration: f64,
}

impl Trajectory {
    pub fn new(points: Vec<Waypoint>, duration: f64) -> Result<Self> {
        let traj = Self { points, duration };
        traj.validate()?;
        Ok(traj)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::Size(format!(
                "trajectory needs at least 2 points, got {}",
                self.points.len()
            )));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Error::Parameter(format!(
                "trajectory duration must be positive, got {}",
                self.duration
            )));
        }
        if self.points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Parameter(
                "trajectory coordinates must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.duration / (self.points.len() - 1) as f64
    }

    pub fn timestamps(&self) -> Vec<f64> {
        let dt = self.step();
        (0..self.points.len()).map(|i| i as f64 * dt).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcLengthTable {
    pub deltas: Vec<Waypoint>,
    pub lengths: Vec<f64>,
    /// `L_0 = 0`, `L_i = sum of the first i segment lengths`.
    pub cumulative: Vec<f64>,
    pub total: f64,
}

pub fn arc_length(traj: &Trajectory) -> Result<ArcLengthTable> {
    if traj.points.len() < 2 {
        return Err(Error::Size(format!(
            "arc length needs at least 2 points, got {}",
            traj.points.len()
        )));
    }
    let deltas: Vec<Waypoint> = traj
        .points
        .windows(2)
        .map(|w| [w[1][0] - w[0][0], w[1][1] - w[0][1]])
        .collect();
    let lengths: Vec<f64> = deltas.iter().map(|d| d[0].hypot(d[1])).collect();
    let mut cumulative = Vec::with_capacity(traj.points.len());
    cumulative.push(0.0);
    let mut acc = 0.0;
    for d in &lengths {
        acc += d;
        cumulative.push(acc);
    }
    Ok(ArcLengthTable {
        deltas,
        lengths,
        cumulative,
        total: acc,
    })
}

/// Average speed over the whole path, m/s.
pub fn base_speed(table: &ArcLengthTable, duration: f64) -> Result<f64> {
    if !(duration > 0.0) {
        return Err(Error::Parameter(format!(
            "duration must be positive, got {duration}"
        )));
    }
    Ok(table.total / duration)
}

/// Shape of an emotion's speed curve `gain * v_avg * (1 - exp(-rate t)) + noise`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionProfileParams {
    pub gain: f64,
    /// 1/s.
    pub rate: f64,
    /// Noise standard deviation as a fraction of `v_avg`. Zero disables noise.
    pub noise_sigma_ratio: f64,
    /// Lower clip bound as a multiple of `v_avg`.
    pub clip_lo: f64,
    /// Upper clip bound as a multiple of `v_avg`.
    pub clip_hi: f64,
    /// Multiplier applied to the three samples around the midpoint.
    pub midpoint_dip: Option<f64>,
    pub rng_seed: u64,
}

impl EmotionProfileParams {
    pub fn urgent(rng_seed: u64) -> Self {
        Self {
            gain: 1.6,
            rate: 2.0,
            noise_sigma_ratio: 0.03,
            clip_lo: 0.8,
            clip_hi: 1.5,
            midpoint_dip: None,
            rng_seed,
        }
    }

    pub fn hesitant(rng_seed: u64) -> Self {
        Self {
            gain: 1.2,
            rate: 1.0,
            noise_sigma_ratio: 0.05,
            clip_lo: 0.1,
            clip_hi: 1.5,
            midpoint_dip: Some(0.6),
            rng_seed,
        }
    }

    /// Default parameters for `emotion`; `None` for normal.
    pub fn for_emotion(emotion: EmotionLabel, rng_seed: u64) -> Option<Self> {
        match emotion {
            EmotionLabel::Normal => None,
            EmotionLabel::Urgent => Some(Self::urgent(rng_seed)),
            EmotionLabel::Hesitant => Some(Self::hesitant(rng_seed)),
        }
    }

    pub fn without_noise(self) -> Self {
        Self {
            noise_sigma_ratio: 0.0,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.gain > 0.0
            && self.rate > 0.0
            && self.noise_sigma_ratio >= 0.0
            && self.clip_lo > 0.0
            && self.clip_lo < self.clip_hi
            && self.midpoint_dip.is_none_or(|d| d > 0.0);
        if !ok {
            return Err(Error::Parameter(format!(
                "invalid speed profile parameters {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedProfile {
    /// m/s at each timestamp.
    pub speeds: Vec<f64>,
    pub v_avg: f64,
    pub emotion: EmotionLabel,
}

/// Evaluates the emotion's speed curve at every timestamp.
///
/// Noise is drawn i.i.d. per sample from a ChaCha8 stream seeded with
/// `params.rng_seed` (one standard normal per timestamp, in order). The
/// midpoint dip is applied to the noisy value, then the result is clipped.
/// `Normal` yields the constant profile `v_avg`.
pub fn speed_profile(
    traj: &Trajectory,
    emotion: EmotionLabel,
    params: &EmotionProfileParams,
) -> Result<SpeedProfile> {
    traj.validate()?;
    let table = arc_length(traj)?;
    let v_avg = base_speed(&table, traj.duration)?;
    let n = traj.len();
    if emotion == EmotionLabel::Normal {
        return Ok(SpeedProfile {
            speeds: vec![v_avg; n],
            v_avg,
            emotion,
        });
    }
    params.validate()?;
    if v_avg == 0.0 {
        return Err(Error::Degenerate(
            "stationary trajectory has no base speed to modulate".into(),
        ));
    }
    let sigma = params.noise_sigma_ratio * v_avg;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let (lo, hi) = (params.clip_lo * v_avg, params.clip_hi * v_avg);
    let mid = n / 2;
    let speeds = traj
        .timestamps()
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let z: f64 = StandardNormal.sample(&mut rng);
            let mut v = v_avg * params.gain * (1.0 - (-params.rate * t).exp()) + sigma * z;
            if let Some(dip) = params.midpoint_dip {
                if i.abs_diff(mid) <= 1 {
                    v *= dip;
                }
            }
            v.clamp(lo, hi)
        })
        .collect();
    Ok(SpeedProfile {
        speeds,
        v_avg,
        emotion,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReparamSchedule {
    pub intervals: Vec<f64>,
    pub interval_speeds: Vec<f64>,
    pub segment_distances: Vec<f64>,
    /// Integrated distance `S`.
    pub cumulative: Vec<f64>,
    /// `S` rescaled so its maximum equals the path length.
    pub normalized: Vec<f64>,
    /// Normalized progress clamped to `[0, L_total]`.
    pub clamped: Vec<f64>,
    pub path_length: f64,
    pub speeds: Vec<f64>,
    pub emotion: EmotionLabel,
}

pub fn reparameterize(traj: &Trajectory, profile: &SpeedProfile) -> Result<ReparamSchedule> {
    traj.validate()?;
    if profile.speeds.len() != traj.len() {
        return Err(Error::Size(format!(
            "speed profile has {} samples for {} waypoints",
            profile.speeds.len(),
            traj.len()
        )));
    }
    let path_length = arc_length(traj)?.total;
    let dt = traj.step();
    let intervals = vec![dt; traj.len() - 1];
    let interval_speeds: Vec<f64> = profile
        .speeds
        .windows(2)
        .map(|w| 0.5 * (w[0] + w[1]))
        .collect();
    let segment_distances: Vec<f64> = interval_speeds
        .iter()
        .zip(&intervals)
        .map(|(v, dt)| v * dt)
        .collect();
    let mut cumulative = Vec::with_capacity(traj.len());
    cumulative.push(0.0);
    let mut acc = 0.0;
    for ds in &segment_distances {
        acc += ds;
        cumulative.push(acc);
    }
    let peak = cumulative.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(Error::Degenerate(
            "speed profile integrates to zero distance".into(),
        ));
    }
    let normalized: Vec<f64> = cumulative.iter().map(|s| path_length * s / peak).collect();
    let clamped = normalized
        .iter()
        .map(|s| s.max(0.0).min(path_length))
        .collect();
    Ok(ReparamSchedule {
        intervals,
        interval_speeds,
        segment_distances,
        cumulative,
        normalized,
        clamped,
        path_length,
        speeds: profile.speeds.clone(),
        emotion: profile.emotion,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulatedTrajectory {
    pub points: Vec<Waypoint>,
    /// m/s at each waypoint.
    pub speeds: Vec<f64>,
    pub emotion: EmotionLabel,
    pub duration: f64,
}

/// Position at arc length `s` along the polyline. Zero-length segments are
/// never selected; `s >= L_total` maps to the last point.
pub fn point_at_arc_length(points: &[Waypoint], cumulative: &[f64], s: f64) -> Waypoint {
    let next = cumulative.partition_point(|&l| l <= s);
    if next == 0 {
        return points[0];
    }
    if next >= points.len() {
        return points[points.len() - 1];
    }
    let i = next - 1;
    let (a, b) = (points[i], points[next]);
    let frac = (s - cumulative[i]) / (cumulative[next] - cumulative[i]);
    [a[0] + frac * (b[0] - a[0]), a[1] + frac * (b[1] - a[1])]
}

/// Euclidean distance from `p` to the nearest point of the polyline.
pub fn distance_to_polyline(points: &[Waypoint], p: Waypoint) -> f64 {
    match points {
        [] => f64::INFINITY,
        [only] => (p[0] - only[0]).hypot(p[1] - only[1]),
        _ => points
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
                let len2 = dx * dx + dy * dy;
                let t = if len2 == 0.0 {
                    0.0
                } else {
                    (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
                };
                (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
            })
            .fold(f64::INFINITY, f64::min),
    }
}

pub fn interpolate(traj: &Trajectory, schedule: &ReparamSchedule) -> Result<ModulatedTrajectory> {
    let table = arc_length(traj)?;
    if schedule.clamped.len() != traj.len() {
        return Err(Error::Size(format!(
            "schedule has {} entries for {} waypoints",
            schedule.clamped.len(),
            traj.len()
        )));
    }
    let points = if table.total == 0.0 {
        traj.points.clone()
    } else {
        schedule
            .clamped
            .iter()
            .map(|&s| point_at_arc_length(&traj.points, &table.cumulative, s))
            .collect()
    };
    Ok(ModulatedTrajectory {
        points,
        speeds: schedule.speeds.clone(),
        emotion: schedule.emotion,
        duration: traj.duration,
    })
}

/// Full pipeline: arc length, base speed, speed profile, reparameterization,
/// interpolation. A stationary input is returned unchanged with zero speeds.
pub fn modulate(
    traj: &Trajectory,
    emotion: EmotionLabel,
    params: &EmotionProfileParams,
) -> Result<ModulatedTrajectory> {
    traj.validate()?;
    if arc_length(traj)?.total == 0.0 {
        return Ok(ModulatedTrajectory {
            points: traj.points.clone(),
            speeds: vec![0.0; traj.len()],
            emotion,
            duration: traj.duration,
        });
    }
    let profile = speed_profile(traj, emotion, params)?;
    let schedule = reparameterize(traj, &profile)?;
    interpolate(traj, &schedule)
}

/// [`modulate`] with the default parameters for `emotion`.
pub fn modulate_default(
    traj: &Trajectory,
    emotion: EmotionLabel,
    seed: u64,
) -> Result<ModulatedTrajectory> {
    let params = EmotionProfileParams::for_emotion(emotion, seed)
        .unwrap_or_else(|| EmotionProfileParams::urgent(seed));
    modulate(traj, emotion, &params)
}
