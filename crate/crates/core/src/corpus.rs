//! Labeled dialogue corpora and label-dynamics series.
//!
//! The on-disk format is a JSON array of objects with keys `turn`, `user`,
//! `assistant` and `label`; extra keys are ignored. Dynamics are indexed by
//! sequence position (1-based), with the original turn index carried along,
//! so sparse corpora such as an 18-of-86 focal subset are well defined.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{RegimeError, Result};

/// Behavioral regime code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    /// Normal performance.
    #[serde(rename = "NP")]
    Np,
    /// Functional refusal.
    #[serde(rename = "FR")]
    Fr,
    /// Meta-narrative.
    #[serde(rename = "MN")]
    Mn,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Np, Label::Fr, Label::Mn];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Np => "NP",
            Label::Fr => "FR",
            Label::Mn => "MN",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "NP" => Ok(Label::Np),
            "FR" => Ok(Label::Fr),
            "MN" => Ok(Label::Mn),
            other => Err(format!("unknown label {other:?}; expected one of NP, FR, MN")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabeledTurn {
    /// Index of the turn in the original session (positive).
    pub turn: u32,
    pub user: String,
    pub assistant: String,
    pub label: Label,
}

impl LabeledTurn {
    pub fn new(turn: u32, label: Label) -> Self {
        Self { turn, user: String::new(), assistant: String::new(), label }
    }
}

/// A non-empty, strictly turn-ordered sequence of labeled turns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCorpus {
    turns: Vec<LabeledTurn>,
}

#[derive(Deserialize)]
struct RawTurn {
    turn: serde_json::Value,
    #[serde(default)]
    user: Option<String>,
    #[serde(default)]
    assistant: Option<String>,
    label: serde_json::Value,
}

impl LabeledCorpus {
    pub fn new(turns: Vec<LabeledTurn>) -> Result<Self> {
        if turns.is_empty() {
            return Err(RegimeError::Order("corpus is empty".into()));
        }
        for (i, t) in turns.iter().enumerate() {
            if t.turn == 0 {
                return Err(RegimeError::Schema {
                    turn: 0,
                    message: "turn index must be a positive integer".into(),
                });
            }
            if i > 0 && t.turn <= turns[i - 1].turn {
                return Err(RegimeError::Order(format!(
                    "turn {} at position {} does not follow turn {}",
                    t.turn,
                    i + 1,
                    turns[i - 1].turn
                )));
            }
        }
        Ok(Self { turns })
    }

    /// Corpus with turns numbered `1..=T` and empty text fields.
    pub fn from_labels(labels: &[Label]) -> Result<Self> {
        Self::new(
            labels
                .iter()
                .enumerate()
                .map(|(i, &l)| LabeledTurn::new(i as u32 + 1, l))
                .collect(),
        )
    }

    pub fn turns(&self) -> &[LabeledTurn] {
        &self.turns
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.turns.iter().map(|t| t.label).collect()
    }

    pub fn turn_indices(&self) -> Vec<u32> {
        self.turns.iter().map(|t| t.turn).collect()
    }

    /// Pretty-printed JSON in the corpus file format.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.turns).expect("corpus serialization is infallible")
    }
}

/// Parse and validate a corpus from JSON bytes.
pub fn load_corpus(raw: &[u8]) -> Result<LabeledCorpus> {
    let raw: Vec<RawTurn> =
        serde_json::from_slice(raw).map_err(|e| RegimeError::Parse(e.to_string()))?;
    let mut turns = Vec::with_capacity(raw.len());
    for (pos, r) in raw.into_iter().enumerate() {
        let turn = match r.turn.as_u64() {
            Some(t) if t >= 1 && t <= u32::MAX as u64 => t as u32,
            _ => {
                return Err(RegimeError::Schema {
                    turn: r.turn.as_i64().unwrap_or(-1),
                    message: format!(
                        "turn index at position {} must be a positive integer, got {}",
                        pos + 1,
                        r.turn
                    ),
                })
            }
        };
        let label = r
            .label
            .as_str()
            .ok_or_else(|| format!("label must be a string, got {}", r.label))
            .and_then(Label::from_str)
            .map_err(|message| RegimeError::Schema { turn: turn as i64, message })?;
        turns.push(LabeledTurn {
            turn,
            user: r.user.unwrap_or_default(),
            assistant: r.assistant.unwrap_or_default(),
            label,
        });
    }
    LabeledCorpus::new(turns)
}

/// Labels in turn order, paired with their original turn indices.
pub fn label_strip(corpus: &LabeledCorpus) -> Vec<(u32, Label)> {
    corpus.turns.iter().map(|t| (t.turn, t.label)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct LabelCounts {
    pub np: usize,
    pub fr: usize,
    pub mn: usize,
}

impl LabelCounts {
    pub fn get(&self, label: Label) -> usize {
        match label {
            Label::Np => self.np,
            Label::Fr => self.fr,
            Label::Mn => self.mn,
        }
    }

    pub fn total(&self) -> usize {
        self.np + self.fr + self.mn
    }

    fn bump(&mut self, label: Label) {
        match label {
            Label::Np => self.np += 1,
            Label::Fr => self.fr += 1,
            Label::Mn => self.mn += 1,
        }
    }

    fn minus(self, other: LabelCounts) -> LabelCounts {
        LabelCounts { np: self.np - other.np, fr: self.fr - other.fr, mn: self.mn - other.mn }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabelProportions {
    pub np: f64,
    pub fr: f64,
    pub mn: f64,
}

impl LabelProportions {
    /// Each count divided by the window length.
    pub fn from_counts(c: LabelCounts) -> Self {
        let n = c.total() as f64;
        Self { np: c.np as f64 / n, fr: c.fr as f64 / n, mn: c.mn as f64 / n }
    }

    pub fn get(&self, label: Label) -> f64 {
        match label {
            Label::Np => self.np,
            Label::Fr => self.fr,
            Label::Mn => self.mn,
        }
    }
}

/// Running label counts: entry `t` counts positions `1..=t`.
pub fn cumulative_counts(corpus: &LabeledCorpus) -> Vec<LabelCounts> {
    corpus
        .turns
        .iter()
        .scan(LabelCounts::default(), |acc, t| {
            acc.bump(t.label);
            Some(*acc)
        })
        .collect()
}

/// Label proportions over the trailing window
/// `max(1, t - window + 1)..=t`, truncated at the start of the sequence.
pub fn sliding_proportions(corpus: &LabeledCorpus, window: usize) -> Result<Vec<LabelProportions>> {
    if window == 0 {
        return Err(RegimeError::Parameter("window must be at least 1".into()));
    }
    let cum = cumulative_counts(corpus);
    Ok((0..cum.len())
        .map(|i| {
            let counts = if i >= window { cum[i].minus(cum[i - window]) } else { cum[i] };
            LabelProportions::from_counts(counts)
        })
        .collect())
}

/// One row of the dynamics table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsRow {
    pub position: usize,
    pub turn: u32,
    pub label: Label,
    pub cumulative: LabelCounts,
    pub window: LabelProportions,
}

pub fn dynamics(corpus: &LabeledCorpus, window: usize) -> Result<Vec<DynamicsRow>> {
    let props = sliding_proportions(corpus, window)?;
    Ok(corpus
        .turns
        .iter()
        .zip(cumulative_counts(corpus))
        .zip(props)
        .enumerate()
        .map(|(i, ((t, cumulative), window))| DynamicsRow {
            position: i + 1,
            turn: t.turn,
            label: t.label,
            cumulative,
            window,
        })
        .collect())
}

pub const DYNAMICS_HEADER: &str = "position,turn,label,cum_np,cum_fr,cum_mn,win_np,win_fr,win_mn";

/// Dynamics table as CSV, proportions with six decimals.
pub fn dynamics_csv(corpus: &LabeledCorpus, window: usize) -> Result<String> {
    let mut out = String::from(DYNAMICS_HEADER);
    out.push('\n');
    for r in dynamics(corpus, window)? {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.6}\n",
            r.position,
            r.turn,
            r.label,
            r.cumulative.np,
            r.cumulative.fr,
            r.cumulative.mn,
            r.window.np,
            r.window.fr,
            r.window.mn
        ));
    }
    Ok(out)
}
