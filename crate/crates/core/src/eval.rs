//! Open-loop planning metrics: L2 displacement at 1/2/3 s horizons and
//! collision rate from oriented-box overlap with other agents.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::read_dataset;
use crate::error::{Error, Result};
use crate::trajectory::Waypoint;

/// Waypoints per planned trajectory (3 s at 2 Hz).
pub const PLAN_STEPS: usize = 6;
/// Waypoint index closing the 1 s, 2 s and 3 s horizons.
pub const HORIZON_INDICES: [usize; 3] = [1, 3, 5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObbBox {
    pub cx: f64,
    pub cy: f64,
    pub yaw: f64,
    pub length: f64,
    pub width: f64,
}

impl ObbBox {
    pub fn is_valid(&self) -> bool {
        self.length > 0.0
            && self.width > 0.0
            && [self.cx, self.cy, self.yaw, self.length, self.width]
                .iter()
                .all(|v| v.is_finite())
    }

    /// Unit vectors along the length and width directions.
    pub fn axes(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.yaw.sin_cos();
        [[c, s], [-s, c]]
    }

    pub fn corners(&self) -> [[f64; 2]; 4] {
        let [u, v] = self.axes();
        let (hl, hw) = (0.5 * self.length, 0.5 * self.width);
        [(1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0)].map(|(a, b)| {
            [
                self.cx + a * hl * u[0] + b * hw * v[0],
                self.cy + a * hl * u[1] + b * hw * v[1],
            ]
        })
    }

    fn project(&self, axis: [f64; 2]) -> (f64, f64) {
        self.corners()
            .iter()
            .map(|p| p[0] * axis[0] + p[1] * axis[1])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            })
    }
}

/// Separating-axis test over the two edge normals of each rectangle.
/// Touching boxes overlap.
pub fn obb_overlap(a: &ObbBox, b: &ObbBox) -> bool {
    a.axes().into_iter().chain(b.axes()).all(|axis| {
        let (a_lo, a_hi) = a.project(axis);
        let (b_lo, b_hi) = b.project(axis);
        a_hi >= b_lo && b_hi >= a_lo
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoDims {
    pub length: f64,
    pub width: f64,
}

impl Default for EgoDims {
    fn default() -> Self {
        Self {
            length: 4.08,
            width: 1.73,
        }
    }
}

/// How a horizon's L2 value is formed from per-waypoint distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HorizonMode {
    /// Mean of all distances up to and including the horizon waypoint.
    #[default]
    CumulativeMean,
    /// Distance at the horizon waypoint only.
    SinglePoint,
}

fn check_plan(name: &str, traj: &[Waypoint]) -> Result<()> {
    if traj.len() != PLAN_STEPS {
        return Err(Error::Size(format!(
            "{name} trajectory has {} waypoints, expected {PLAN_STEPS}",
            traj.len()
        )));
    }
    Ok(())
}

/// L2 error at the 1 s, 2 s and 3 s horizons, meters.
pub fn l2_error(planned: &[Waypoint], truth: &[Waypoint], mode: HorizonMode) -> Result<[f64; 3]> {
    check_plan("planned", planned)?;
    check_plan("ground-truth", truth)?;
    let dist: Vec<f64> = planned
        .iter()
        .zip(truth)
        .map(|(p, t)| (p[0] - t[0]).hypot(p[1] - t[1]))
        .collect();
    Ok(HORIZON_INDICES.map(|h| match mode {
        HorizonMode::CumulativeMean => dist[..=h].iter().sum::<f64>() / (h + 1) as f64,
        HorizonMode::SinglePoint => dist[h],
    }))
}

/// Heading at each waypoint from the direction to the next one. The last
/// waypoint repeats the previous heading; stationary steps inherit the
/// previous heading (or the first available one at the start).
pub fn waypoint_headings(traj: &[Waypoint]) -> Vec<f64> {
    let n = traj.len();
    let raw: Vec<Option<f64>> = (0..n)
        .map(|i| {
            let j = if i + 1 < n { i + 1 } else { return None };
            let (dx, dy) = (traj[j][0] - traj[i][0], traj[j][1] - traj[i][1]);
            (dx != 0.0 || dy != 0.0).then(|| dy.atan2(dx))
        })
        .collect();
    let first = raw.iter().flatten().next().copied().unwrap_or(0.0);
    let mut last = first;
    raw.into_iter()
        .map(|h| {
            if let Some(h) = h {
                last = h;
            }
            last
        })
        .collect()
}

/// Per-horizon collision flags for one planned trajectory. `agents[i]` holds
/// the other agents' boxes at planned step `i`.
pub fn collision_flags(
    planned: &[Waypoint],
    agents: &[Vec<ObbBox>],
    ego: EgoDims,
) -> Result<[bool; 3]> {
    check_plan("planned", planned)?;
    if agents.len() != planned.len() {
        return Err(Error::Size(format!(
            "agents cover {} steps, planned trajectory has {}",
            agents.len(),
            planned.len()
        )));
    }
    let headings = waypoint_headings(planned);
    let hits: Vec<bool> = planned
        .iter()
        .zip(&headings)
        .zip(agents)
        .map(|((p, &yaw), boxes)| {
            let ego_box = ObbBox {
                cx: p[0],
                cy: p[1],
                yaw,
                length: ego.length,
                width: ego.width,
            };
            boxes.iter().any(|b| obb_overlap(&ego_box, b))
        })
        .collect();
    Ok(HORIZON_INDICES.map(|h| hits[..=h].iter().any(|&x| x)))
}

/// Collision rate in percent for a single sample (0 or 100 per horizon).
pub fn collision_rate(
    planned: &[Waypoint],
    agents: &[Vec<ObbBox>],
    ego: EgoDims,
) -> Result<[f64; 3]> {
    Ok(collision_flags(planned, agents, ego)?.map(|hit| if hit { 100.0 } else { 0.0 }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HorizonValues {
    #[serde(rename = "1s")]
    pub s1: f64,
    #[serde(rename = "2s")]
    pub s2: f64,
    #[serde(rename = "3s")]
    pub s3: f64,
    pub avg: f64,
}

impl HorizonValues {
    pub fn from_horizons(v: [f64; 3]) -> Self {
        Self {
            s1: v[0],
            s2: v[1],
            s3: v[2],
            avg: (v[0] + v[1] + v[2]) / 3.0,
        }
    }

    pub fn horizons(&self) -> [f64; 3] {
        [self.s1, self.s2, self.s3]
    }
}

/// Figures from the original audio-instructed planner, carried for context.
/// They need the trained model and are not reproduced here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedReference {
    pub note: String,
    pub l2_m: HorizonValues,
    pub collision_rate_pct: HorizonValues,
}

impl Default for PublishedReference {
    fn default() -> Self {
        Self {
            note: "published vision+audio planner on nuScenes; reference only, not reproduced"
                .into(),
            l2_m: HorizonValues {
                s1: 0.46,
                s2: 0.52,
                s3: 0.74,
                avg: 0.58,
            },
            collision_rate_pct: HorizonValues {
                s1: 0.00,
                s2: 0.12,
                s3: 0.22,
                avg: 0.11,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub l2_m: HorizonValues,
    pub collision_rate_pct: HorizonValues,
    pub sample_count: usize,
    pub horizon_mode: HorizonMode,
    pub ego_dims: EgoDims,
    /// Prediction ids with no dataset record.
    pub unmatched_predictions: Vec<String>,
    /// Dataset records with no prediction.
    pub missing_predictions: Vec<String>,
    pub reference: PublishedReference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMetrics {
    pub record_id: String,
    pub l2_1s: f64,
    pub l2_2s: f64,
    pub l2_3s: f64,
    pub collision_1s: bool,
    pub collision_2s: bool,
    pub collision_3s: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub record_id: String,
    pub trajectory: Vec<Waypoint>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EvalOptions {
    pub mode: HorizonMode,
    pub ego: EgoDims,
}

/// Reads `{"record_id": .., "trajectory": [[x, y]; 6]}` lines. Blank lines are ignored.
pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let pred: Prediction = serde_json::from_str(&line).map_err(|e| {
            Error::Schema(format!("{}:{}: bad prediction: {e}", path.display(), i + 1))
        })?;
        out.push(pred);
    }
    Ok(out)
}

/// Scores predictions against the answer trajectories and agent boxes stored
/// in a built dataset. Unknown or missing ids are listed and excluded.
pub fn evaluate(
    dataset: impl AsRef<Path>,
    predictions: impl AsRef<Path>,
    options: &EvalOptions,
) -> Result<(EvalReport, Vec<RecordMetrics>)> {
    let records = read_dataset(dataset)?;
    let predictions = read_predictions(predictions)?;
    let by_id: BTreeMap<&str, _> = records.iter().map(|r| (r.record_id.as_str(), r)).collect();

    let mut unmatched = Vec::new();
    let mut seen = BTreeSet::new();
    let mut rows = Vec::new();
    let mut l2_sum = [0.0; 3];
    let mut hits = [0usize; 3];
    for pred in &predictions {
        let Some(record) = by_id.get(pred.record_id.as_str()) else {
            unmatched.push(pred.record_id.clone());
            continue;
        };
        if !seen.insert(pred.record_id.as_str()) {
            return Err(Error::Schema(format!(
                "duplicate prediction for {}",
                pred.record_id
            )));
        }
        let truth: Vec<Waypoint> = record.answer_trajectory.iter().map(|w| w.point()).collect();
        let l2 = l2_error(&pred.trajectory, &truth, options.mode)?;
        let flags = collision_flags(&pred.trajectory, &record.agents, options.ego)?;
        for h in 0..3 {
            l2_sum[h] += l2[h];
            hits[h] += flags[h] as usize;
        }
        rows.push(RecordMetrics {
            record_id: pred.record_id.clone(),
            l2_1s: l2[0],
            l2_2s: l2[1],
            l2_3s: l2[2],
            collision_1s: flags[0],
            collision_2s: flags[1],
            collision_3s: flags[2],
        });
    }
    let missing = records
        .iter()
        .filter(|r| !seen.contains(r.record_id.as_str()))
        .map(|r| r.record_id.clone())
        .collect();

    let n = rows.len();
    let mean = |sum: f64| if n == 0 { 0.0 } else { sum / n as f64 };
    let report = EvalReport {
        l2_m: HorizonValues::from_horizons(l2_sum.map(mean)),
        collision_rate_pct: HorizonValues::from_horizons(hits.map(|c| 100.0 * mean(c as f64))),
        sample_count: n,
        horizon_mode: options.mode,
        ego_dims: options.ego,
        unmatched_predictions: unmatched,
        missing_predictions: missing,
        reference: PublishedReference::default(),
    };
    Ok((report, rows))
}

pub fn write_per_record_csv(path: impl AsRef<Path>, rows: &[RecordMetrics]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
