//! Hypothesis banks and their evaluation.
//!
//! Each opponent gets its own stream of natural-language hypotheses. A
//! hypothesis earns intrinsic reward `+c` when its prediction matches the
//! observed behavior and `-c` otherwise, and its value follows the
//! Rescorla-Wagner rule `V <- V + alpha * (r - V)`. A hypothesis whose value
//! reaches `v_thr` is validated and drives planning until it stops predicting
//! well.

use crate::error::{HmError, Result};
use crate::game::PlayerId;
use crate::substrate::{Inventory, ResourceKind};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TomParams {
    pub alpha: f64,
    pub c: f64,
    pub v_thr: f64,
    pub k: usize,
}

impl Default for TomParams {
    fn default() -> Self {
        Self { alpha: 0.3, c: 1.0, v_thr: 0.7, k: 5 }
    }
}

impl TomParams {
    /// Settings for counterfactual strategy evaluation.
    pub fn counterfactual() -> Self {
        Self { alpha: 0.3, c: 3.0, v_thr: 3.0, k: 5 }
    }
}

/// How the agent's theory-of-mind module is wired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TomMode {
    /// One reasoner call per pipeline step.
    #[default]
    Modular,
    /// A single merged call per trigger.
    Vanilla,
    /// Hypotheses are own strategies scored by realized and counterfactual
    /// reward.
    Counterfactual,
    /// No theory of mind: the agent plans from its history alone.
    Disabled,
}

impl std::str::FromStr for TomMode {
    type Err = HmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "modular" | "mmp" => Ok(TomMode::Modular),
            "vanilla" | "vmp" => Ok(TomMode::Vanilla),
            "counterfactual" | "hehr" => Ok(TomMode::Counterfactual),
            "disabled" | "off" => Ok(TomMode::Disabled),
            other => Err(HmError::Config(format!("unknown tom mode {other:?}"))),
        }
    }
}

/// One step of the delta rule.
pub fn rescorla_wagner(value: f64, reward: f64, alpha: f64) -> f64 {
    value + alpha * (reward - value)
}

/// The observed quantity a hypothesis predicts: the dominant kind of the
/// opponent's inventory, or a cooking behavior label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorFeature {
    Resource(ResourceKind),
    Label(String),
}

impl std::fmt::Display for BehaviorFeature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BehaviorFeature::Resource(k) => f.write_str(k.strategy()),
            BehaviorFeature::Label(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionLog {
    pub round: usize,
    pub predicted: BehaviorFeature,
    pub actual: Option<BehaviorFeature>,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub id: usize,
    pub text: String,
    pub value: f64,
    /// Interaction round at which the hypothesis was generated.
    pub created_at: usize,
    /// Prediction awaiting the next observation.
    pub pending: Option<BehaviorFeature>,
    pub log: Vec<PredictionLog>,
    /// Inventory the hypothesis recommends, for strategy hypotheses.
    pub target: Option<Inventory>,
}

impl Hypothesis {
    pub fn is_validated(&self, params: &TomParams) -> bool {
        self.value >= params.v_thr
    }
}

/// Ordering used everywhere: higher value first, newer first on ties.
fn rank(a: &Hypothesis, b: &Hypothesis) -> std::cmp::Ordering {
    b.value.total_cmp(&a.value).then(b.id.cmp(&a.id))
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HypothesisBank {
    pub params: TomParams,
    pub streams: BTreeMap<PlayerId, Vec<Hypothesis>>,
    next_id: usize,
}

impl HypothesisBank {
    pub fn new(params: TomParams) -> Self {
        Self { params, streams: BTreeMap::new(), next_id: 0 }
    }

    pub fn hypotheses(&self, opponent: PlayerId) -> &[Hypothesis] {
        self.streams.get(&opponent).map_or(&[], Vec::as_slice)
    }

    fn find_mut(&mut self, opponent: PlayerId, id: usize) -> Option<&mut Hypothesis> {
        self.streams.get_mut(&opponent)?.iter_mut().find(|h| h.id == id)
    }

    pub fn get(&self, opponent: PlayerId, id: usize) -> Option<&Hypothesis> {
        self.hypotheses(opponent).iter().find(|h| h.id == id)
    }

    /// Adds a hypothesis at value 0 and returns its id. A text already in the
    /// stream is not duplicated; its id is returned and it becomes the
    /// newest.
    pub fn add(&mut self, opponent: PlayerId, text: &str, round: usize) -> usize {
        let id = self.next_id;
        self.next_id += 1;
        let stream = self.streams.entry(opponent).or_default();
        if let Some(h) = stream.iter_mut().find(|h| h.text == text) {
            h.id = id;
            return id;
        }
        stream.push(Hypothesis {
            id,
            text: text.to_string(),
            value: 0.0,
            created_at: round,
            pending: None,
            log: Vec::new(),
            target: None,
        });
        id
    }

    pub fn set_target(&mut self, opponent: PlayerId, id: usize, target: Inventory) {
        if let Some(h) = self.find_mut(opponent, id) {
            h.target = Some(target);
        }
    }

    /// Highest-valued hypothesis at or above the threshold.
    pub fn validated(&self, opponent: PlayerId) -> Option<&Hypothesis> {
        self.hypotheses(opponent).iter().filter(|h| h.is_validated(&self.params)).min_by(|a, b| rank(a, b))
    }

    pub fn any_validated(&self) -> bool {
        self.streams.keys().any(|o| self.validated(*o).is_some())
    }

    /// The validated hypothesis if there is one, else the newest.
    pub fn select_active(&self, opponent: PlayerId) -> Result<&Hypothesis> {
        if let Some(h) = self.validated(opponent) {
            return Ok(h);
        }
        self.hypotheses(opponent)
            .iter()
            .max_by_key(|h| h.id)
            .ok_or_else(|| HmError::Contract(format!("no hypotheses for {opponent} yet")))
    }

    /// Up to `k` hypotheses by value, newer first on ties.
    pub fn top_k(&self, opponent: PlayerId) -> Vec<&Hypothesis> {
        let mut all: Vec<&Hypothesis> = self.hypotheses(opponent).iter().collect();
        all.sort_by(|a, b| rank(a, b));
        all.truncate(self.params.k);
        all
    }

    /// The top-k hypotheses with a positive value, shown when refining.
    pub fn refinement_context(&self, opponent: PlayerId) -> Vec<&Hypothesis> {
        self.top_k(opponent).into_iter().filter(|h| h.value > 0.0).collect()
    }

    /// Ids of the hypotheses that should predict the next round: only the
    /// validated one once validation happened, otherwise the top-k plus the
    /// active hypothesis.
    pub fn predictors(&self, opponent: PlayerId) -> Vec<usize> {
        if let Some(h) = self.validated(opponent) {
            return vec![h.id];
        }
        let mut ids: Vec<usize> = self.top_k(opponent).iter().map(|h| h.id).collect();
        if let Ok(active) = self.select_active(opponent) {
            if !ids.contains(&active.id) {
                ids.push(active.id);
            }
        }
        ids
    }

    pub fn set_prediction(&mut self, opponent: PlayerId, id: usize, predicted: BehaviorFeature) {
        if let Some(h) = self.find_mut(opponent, id) {
            h.pending = Some(predicted);
        }
    }

    pub fn has_pending(&self, opponent: PlayerId) -> bool {
        self.hypotheses(opponent).iter().any(|h| h.pending.is_some())
    }

    /// Scores every pending prediction against the observed feature.
    pub fn evaluate(&mut self, opponent: PlayerId, actual: &BehaviorFeature, round: usize) {
        self.evaluate_with(opponent, round, Some(actual), |predicted| Some(predicted == actual));
    }

    /// Scores pending predictions with an external judge; `None` from the
    /// judge leaves that prediction unscored and discards it.
    pub fn evaluate_with(
        &mut self,
        opponent: PlayerId,
        round: usize,
        actual: Option<&BehaviorFeature>,
        mut judge: impl FnMut(&BehaviorFeature) -> Option<bool>,
    ) {
        let TomParams { alpha, c, .. } = self.params;
        let Some(stream) = self.streams.get_mut(&opponent) else {
            return;
        };
        for h in stream.iter_mut() {
            let Some(predicted) = h.pending.take() else {
                continue;
            };
            let Some(correct) = judge(&predicted) else {
                continue;
            };
            let r = if correct { c } else { -c };
            h.value = rescorla_wagner(h.value, r, alpha);
            h.log.push(PredictionLog { round, predicted, actual: actual.cloned(), correct });
        }
    }

    /// Applies an externally computed intrinsic reward to one hypothesis.
    pub fn reward(&mut self, opponent: PlayerId, id: usize, r: f64) {
        let alpha = self.params.alpha;
        if let Some(h) = self.find_mut(opponent, id) {
            h.value = rescorla_wagner(h.value, r, alpha);
        }
    }

    /// Serializable view of the bank for episode logs.
    pub fn snapshot(&self) -> serde_json::Value {
        let streams: serde_json::Map<String, serde_json::Value> = self
            .streams
            .iter()
            .map(|(p, hs)| {
                let list = hs
                    .iter()
                    .map(|h| {
                        serde_json::json!({
                            "id": h.id,
                            "text": h.text,
                            "value": h.value,
                            "validated": h.is_validated(&self.params),
                            "pending": h.pending.as_ref().map(ToString::to_string),
                            "predictions": h.log.len(),
                        })
                    })
                    .collect();
                (p.label(), serde_json::Value::Array(list))
            })
            .collect();
        serde_json::json!({ "validated": self.any_validated(), "streams": streams })
    }
}

/// Intrinsic reward for a realized or counterfactual outcome.
pub fn outcome_reward(verdict: &str, c: f64) -> Option<f64> {
    match verdict.trim().to_ascii_lowercase().as_str() {
        "positive" => Some(c),
        "negative" => Some(-c),
        "neutral" => Some(0.0),
        _ => None,
    }
}
