//! Arousal as a clipped weighted sum of logistic-transformed features, and the
//! mapping from arousal to emotion labels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::NormalizedFeatures;

pub const URGENT_THRESHOLD: f64 = 0.6;
pub const HESITANT_THRESHOLD: f64 = 0.4;
pub const URGENT_RATIO: f64 = 1.15;
pub const HESITANT_RATIO: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidParams {
    /// Steepness.
    pub k: f64,
    /// Midpoint.
    pub x0: f64,
}

impl SigmoidParams {
    pub const fn new(k: f64, x0: f64) -> Self {
        Self { k, x0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0) || !(0.0..=1.0).contains(&self.x0) {
            return Err(Error::Parameter(format!(
                "sigmoid needs k > 0 and x0 in [0, 1], got k={} x0={}",
                self.k, self.x0
            )));
        }
        Ok(())
    }
}

/// `1 / (1 + exp(-k (x - x0)))`.
pub fn sigmoid(x: f64, params: SigmoidParams) -> f64 {
    1.0 / (1.0 + (-params.k * (x - params.x0)).exp())
}

/// Per-feature weights and logistic parameters, in (RMS, F0, tempo, centroid) order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArousalWeights {
    pub w_r: f64,
    pub w_f: f64,
    pub w_t: f64,
    pub w_c: f64,
    pub params_r: SigmoidParams,
    pub params_f: SigmoidParams,
    pub params_t: SigmoidParams,
    pub params_c: SigmoidParams,
}

impl Default for ArousalWeights {
    fn default() -> Self {
        Self {
            w_r: 0.4,
            w_f: 0.4,
            w_t: 0.15,
            w_c: 0.05,
            params_r: SigmoidParams::new(8.0, 0.4),
            params_f: SigmoidParams::new(10.0, 0.5),
            params_t: SigmoidParams::new(7.0, 0.5),
            params_c: SigmoidParams::new(6.0, 0.4),
        }
    }
}

impl ArousalWeights {
    pub fn weights(&self) -> [f64; 4] {
        [self.w_r, self.w_f, self.w_t, self.w_c]
    }

    pub fn params(&self) -> [SigmoidParams; 4] {
        [self.params_r, self.params_f, self.params_t, self.params_c]
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.weights();
        if w.iter().any(|&x| !(x >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!(
                "arousal weights must be nonnegative and sum to 1, got {w:?}"
            )));
        }
        self.params().iter().try_for_each(SigmoidParams::validate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArousalScore {
    pub value: f64,
    /// Weighted sigmoid terms in (RMS, F0, tempo, centroid) order.
    pub contributions: [f64; 4],
}

impl ArousalScore {
    /// Sum of contributions before clipping.
    pub fn raw(&self) -> f64 {
        self.contributions.iter().sum()
    }
}

pub fn arousal(features: &NormalizedFeatures, weights: &ArousalWeights) -> ArousalScore {
    let x = features.as_array();
    let w = weights.weights();
    let p = weights.params();
    let contributions = std::array::from_fn(|i| w[i] * sigmoid(x[i], p[i]));
    let raw: f64 = contributions.iter().sum();
    ArousalScore {
        value: raw.clamp(0.0, 1.0),
        contributions,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmotionLabel {
    Normal,
    Urgent,
    Hesitant,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; 3] = [Self::Normal, Self::Urgent, Self::Hesitant];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Normal => "normal",
            Self::Urgent => "urgent",
            Self::Hesitant => "hesitant",
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmotionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Self::Normal),
            "urgent" => Ok(Self::Urgent),
            "hesitant" => Ok(Self::Hesitant),
            other => Err(Error::Parameter(format!(
                "unknown emotion {other:?} (expected normal, urgent or hesitant)"
            ))),
        }
    }
}

pub fn label_emotion(score: &ArousalScore) -> EmotionLabel {
    label_value(score.value)
}

pub(crate) fn label_value(value: f64) -> EmotionLabel {
    LabelThresholds::default().label(value)
}

/// Absolute arousal cut-offs for [`EmotionLabel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelThresholds {
    /// `A >= urgent` is urgent.
    pub urgent: f64,
    /// `A <= hesitant` is hesitant.
    pub hesitant: f64,
}

impl Default for LabelThresholds {
    fn default() -> Self {
        Self {
            urgent: URGENT_THRESHOLD,
            hesitant: HESITANT_THRESHOLD,
        }
    }
}

impl LabelThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.hesitant && self.hesitant < self.urgent && self.urgent <= 1.0) {
            return Err(Error::Parameter(format!(
                "thresholds need 0 <= hesitant < urgent <= 1, got {} and {}",
                self.hesitant, self.urgent
            )));
        }
        Ok(())
    }

    pub fn label(&self, value: f64) -> EmotionLabel {
        if value >= self.urgent {
            EmotionLabel::Urgent
        } else if value <= self.hesitant {
            EmotionLabel::Hesitant
        } else {
            EmotionLabel::Normal
        }
    }
}

/// Labels a synthesized variant by its arousal relative to the original clip.
pub fn label_by_ratio(synthetic: &ArousalScore, original: &ArousalScore) -> Result<EmotionLabel> {
    if original.value == 0.0 {
        return Err(Error::UndefinedRatio);
    }
    let ratio = synthetic.value / original.value;
    Ok(if ratio >= URGENT_RATIO {
        EmotionLabel::Urgent
    } else if ratio <= HESITANT_RATIO {
        EmotionLabel::Hesitant
    } else {
        EmotionLabel::Normal
    })
}
