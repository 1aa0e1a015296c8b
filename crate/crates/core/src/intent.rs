//! Driving-intention clustering over future ego motion, and the fixed
//! English templates that turn an intention plus ego state into a command.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::Waypoint;

pub const DEFAULT_K: usize = 6;
pub const DEFAULT_HORIZON: usize = 6;
/// Spacing of future waypoints (2 Hz).
pub const DEFAULT_STEP_S: f64 = 0.5;
pub const HEADING_WEIGHT: f64 = 5.0;
pub const SPEED_WEIGHT: f64 = 1.0;
pub const MAX_ITERATIONS: usize = 100;
pub const CONVERGENCE_SHIFT: f64 = 1e-6;

const TURN_THRESHOLD_DEG: f64 = 15.0;
const SPEED_DELTA_THRESHOLD: f64 = 1.0;
const STOP_SPEED: f64 = 0.3;
const ACCEL_BAND: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Intention {
    TurnLeft,
    TurnRight,
    Accelerate,
    Decelerate,
    Stop,
    KeepStraight,
}

impl Intention {
    pub const ALL: [Intention; 6] = [
        Self::TurnLeft,
        Self::TurnRight,
        Self::Accelerate,
        Self::Decelerate,
        Self::Stop,
        Self::KeepStraight,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::TurnLeft => "turn left",
            Self::TurnRight => "turn right",
            Self::Accelerate => "accelerate",
            Self::Decelerate => "decelerate",
            Self::Stop => "stop",
            Self::KeepStraight => "keep straight",
        }
    }

    /// Heuristic intention for a motion summary. Positive heading is to the left.
    pub fn from_motion(heading_change: f64, speed_delta: f64, terminal_speed: f64) -> Self {
        if heading_change.abs() > TURN_THRESHOLD_DEG.to_radians() {
            if heading_change > 0.0 {
                Self::TurnLeft
            } else {
                Self::TurnRight
            }
        } else if speed_delta > SPEED_DELTA_THRESHOLD {
            Self::Accelerate
        } else if speed_delta < -SPEED_DELTA_THRESHOLD {
            Self::Decelerate
        } else if terminal_speed < STOP_SPEED {
            Self::Stop
        } else {
            Self::KeepStraight
        }
    }
}

impl fmt::Display for Intention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Intention {
    type Err = Error;

    /// Accepts a plain name or a disambiguated model name such as `"stop #2"`.
    fn from_str(s: &str) -> Result<Self> {
        let base = s.split(" #").next().unwrap_or(s);
        Self::ALL
            .into_iter()
            .find(|i| i.name() == base)
            .ok_or_else(|| Error::Template(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionBand {
    Stopped,
    Cruising,
    Accelerating,
    Braking,
}

impl ActionBand {
    pub const ALL: [ActionBand; 4] = [
        Self::Stopped,
        Self::Cruising,
        Self::Accelerating,
        Self::Braking,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            Self::Stopped => "stopped",
            Self::Cruising => "cruising",
            Self::Accelerating => "accelerating",
            Self::Braking => "braking",
        }
    }

    pub fn from_state(speed: f64, accel: f64) -> Self {
        if speed < STOP_SPEED {
            Self::Stopped
        } else if accel > ACCEL_BAND {
            Self::Accelerating
        } else if accel < -ACCEL_BAND {
            Self::Braking
        } else {
            Self::Cruising
        }
    }
}

#[derive(Debug, Deserialize)]
struct TemplateTable {
    goals: BTreeMap<String, String>,
    actions: BTreeMap<String, String>,
}

fn templates() -> &'static TemplateTable {
    static TABLE: OnceLock<TemplateTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let table: TemplateTable = serde_json::from_str(include_str!("../data/templates.json"))
            .expect("bundled template table is valid JSON");
        for i in Intention::ALL {
            assert!(table.goals.contains_key(i.name()), "missing goal for {i}");
        }
        for b in ActionBand::ALL {
            assert!(
                table.actions.contains_key(b.key()),
                "missing action for {b:?}"
            );
        }
        table
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandText {
    pub goal: String,
    pub current_action: String,
}

impl CommandText {
    /// Single utterance form, as handed to speech synthesis.
    pub fn utterance(&self) -> String {
        format!(
            "Goal: {}. Current action: {}.",
            self.goal, self.current_action
        )
    }
}

pub fn render_command(intention: &str, ego_speed: f64, ego_accel: f64) -> Result<CommandText> {
    let intention: Intention = intention.parse()?;
    let table = templates();
    let band = ActionBand::from_state(ego_speed, ego_accel);
    Ok(CommandText {
        goal: table.goals[intention.name()].clone(),
        current_action: table.actions[band.key()].clone(),
    })
}

/// Inverse of [`render_command`] on template output.
pub fn parse_command(command: &CommandText) -> Option<(Intention, ActionBand)> {
    let table = templates();
    let intention = Intention::ALL
        .into_iter()
        .find(|i| table.goals[i.name()] == command.goal)?;
    let band = ActionBand::ALL
        .into_iter()
        .find(|b| table.actions[b.key()] == command.current_action)?;
    Some((intention, band))
}

/// Future ego motion summarized for clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentFeature {
    /// Future waypoints in the ego frame (x forward, y left).
    pub future: Vec<Waypoint>,
    /// Final heading relative to the current heading, radians, left positive.
    pub heading_change: f64,
    /// Terminal speed minus current speed, m/s.
    pub speed_delta: f64,
}

impl IntentFeature {
    /// Derives heading change and speed delta from ego-frame future waypoints
    /// spaced `step_s` apart, given the current speed.
    pub fn from_future(future: &[Waypoint], ego_speed: f64, step_s: f64) -> Self {
        let heading_change = future
            .windows(2)
            .rev()
            .map(|w| [w[1][0] - w[0][0], w[1][1] - w[0][1]])
            .find(|d| d[0] != 0.0 || d[1] != 0.0)
            .map(|d| d[1].atan2(d[0]))
            .unwrap_or(0.0);
        let speed_delta = terminal_speed(future, step_s) - ego_speed;
        Self {
            future: future.to_vec(),
            heading_change,
            speed_delta,
        }
    }

    pub fn vector(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.future.iter().flatten().copied().collect();
        v.push(HEADING_WEIGHT * self.heading_change);
        v.push(SPEED_WEIGHT * self.speed_delta);
        v
    }

    /// Heuristic intention of this single feature.
    pub fn intention(&self, step_s: f64) -> Intention {
        Intention::from_motion(
            self.heading_change,
            self.speed_delta,
            terminal_speed(&self.future, step_s),
        )
    }
}

fn terminal_speed(future: &[Waypoint], step_s: f64) -> f64 {
    match future {
        [.., a, b] => (b[0] - a[0]).hypot(b[1] - a[1]) / step_s,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentModel {
    pub k: usize,
    pub seed: u64,
    pub iterations: usize,
    pub step_s: f64,
    pub centroids: Vec<Vec<f64>>,
    pub names: Vec<String>,
    /// Inertia measured at each assignment step.
    pub inertia_history: Vec<f64>,
}

impl IntentModel {
    pub fn inertia(&self) -> f64 {
        self.inertia_history.last().copied().unwrap_or(0.0)
    }

    pub fn nearest(&self, vector: &[f64]) -> usize {
        nearest(&self.centroids, vector).0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index and squared distance of the closest centroid; ties go to the lowest index.
fn nearest(centroids: &[Vec<f64>], v: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = squared_distance(c, v);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn kmeans_plus_plus(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut chosen = vec![rng.random_range(0..data.len())];
    let mut d2: Vec<f64> = data
        .iter()
        .map(|v| squared_distance(v, &data[chosen[0]]))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `target` just past the final sum.
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            (0..data.len()).find(|i| !chosen.contains(i)).unwrap()
        };
        chosen.push(pick);
        for (d, v) in d2.iter_mut().zip(data) {
            *d = d.min(squared_distance(v, &data[pick]));
        }
    }
    chosen.into_iter().map(|i| data[i].clone()).collect()
}

/// Seeded k-means++ followed by Lloyd iterations. Each centroid is named by
/// the motion heuristic; repeated names get a ` #n` suffix.
pub fn fit_intents(features: &[IntentFeature], k: usize, seed: u64) -> Result<IntentModel> {
    fit_intents_with_step(features, k, seed, DEFAULT_STEP_S)
}

pub fn fit_intents_with_step(
    features: &[IntentFeature],
    k: usize,
    seed: u64,
    step_s: f64,
) -> Result<IntentModel> {
    if k < 2 {
        return Err(Error::Parameter(format!("k must be at least 2, got {k}")));
    }
    if features.len() < k {
        return Err(Error::Size(format!(
            "{} samples cannot form {k} clusters",
            features.len()
        )));
    }
    let data: Vec<Vec<f64>> = features.iter().map(IntentFeature::vector).collect();
    let dim = data[0].len();
    if data.iter().any(|v| v.len() != dim) {
        return Err(Error::Size("intent features differ in horizon".into()));
    }
    if data.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Parameter("intent features must be finite".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_plus_plus(&data, k, &mut rng);
    let mut inertia_history = Vec::new();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        let mut inertia = 0.0;
        for v in &data {
            let (c, d) = nearest(&centroids, v);
            inertia += d;
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(v) {
                *s += x;
            }
        }
        inertia_history.push(inertia);
        let mut shift: f64 = 0.0;
        for ((centroid, sum), &count) in centroids.iter_mut().zip(&sums).zip(&counts) {
            if count == 0 {
                continue;
            }
            let updated: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
            shift = shift.max(squared_distance(centroid, &updated).sqrt());
            *centroid = updated;
        }
        if shift < CONVERGENCE_SHIFT {
            break;
        }
    }
    inertia_history.push(data.iter().map(|v| nearest(&centroids, v).1).sum());

    let names = name_centroids(&centroids, step_s);
    Ok(IntentModel {
        k,
        seed,
        iterations,
        step_s,
        centroids,
        names,
        inertia_history,
    })
}

fn name_centroids(centroids: &[Vec<f64>], step_s: f64) -> Vec<String> {
    let mut seen: BTreeMap<Intention, usize> = BTreeMap::new();
    centroids
        .iter()
        .map(|c| {
            let n = c.len();
            let heading = c[n - 2] / HEADING_WEIGHT;
            let speed_delta = c[n - 1] / SPEED_WEIGHT;
            let future: Vec<Waypoint> = c[..n - 2].chunks_exact(2).map(|p| [p[0], p[1]]).collect();
            let intention =
                Intention::from_motion(heading, speed_delta, terminal_speed(&future, step_s));
            let count = seen.entry(intention).or_insert(0);
            *count += 1;
            if *count == 1 {
                intention.name().to_string()
            } else {
                format!("{} #{}", intention.name(), count)
            }
        })
        .collect()
}

/// Name of the nearest centroid; ties go to the lowest centroid index.
pub fn classify<'m>(model: &'m IntentModel, feature: &IntentFeature) -> &'m str {
    &model.names[model.nearest(&feature.vector())]
}
