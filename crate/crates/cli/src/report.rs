use std::collections::BTreeMap;

use finhors::{Decision, LanguageSample};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Finite,
    Infinite,
    Inconclusive,
}

impl Answer {
    pub fn exit_code(self) -> u8 {
        match self {
            Answer::Finite => 0,
            Answer::Infinite => 1,
            Answer::Inconclusive => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PumpSummary {
    pub fulltype: String,
    pub ancestor_counter: u64,
    pub descendant_counter: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub sizes: Vec<usize>,
    pub complete: bool,
}

impl From<&LanguageSample> for OracleSummary {
    fn from(sample: &LanguageSample) -> Self {
        OracleSummary {
            sizes: sample.sizes().into_iter().collect(),
            complete: sample.complete,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub answer: Answer,
    pub complexity: u32,
    pub root_derivable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_counter: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump: Option<PumpSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Milliseconds per phase.
    #[serde(default)]
    pub timings: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn from_decision(complexity: u32, decision: &Decision) -> Self {
        let mut report = RunReport {
            answer: Answer::Inconclusive,
            complexity,
            root_derivable: false,
            max_counter: None,
            pump: None,
            oracle: None,
            reason: None,
            timings: BTreeMap::new(),
        };
        match decision {
            Decision::Finite {
                root_derivable,
                max_counter,
            } => {
                report.answer = Answer::Finite;
                report.root_derivable = *root_derivable;
                report.max_counter = Some(*max_counter);
            }
            Decision::Infinite { pump, .. } => {
                report.answer = Answer::Infinite;
                report.root_derivable = true;
                report.pump = Some(PumpSummary {
                    fulltype: pump.ancestor.fulltype.to_string(),
                    ancestor_counter: pump.ancestor.counter,
                    descendant_counter: pump.descendant.counter,
                });
            }
            Decision::Inconclusive { reason } => report.reason = Some(reason.clone()),
        }
        report
    }

    pub fn inconclusive(complexity: u32, reason: String) -> Self {
        RunReport::from_decision(complexity, &Decision::Inconclusive { reason })
    }

    /// Whether a fully explored oracle sample contradicts the answer.
    pub fn contradicted_by(&self, sample: &LanguageSample) -> Option<String> {
        if !sample.complete {
            return None;
        }
        let empty = sample.trees.is_empty();
        match self.answer {
            Answer::Infinite => Some(format!(
                "the oracle explored the whole language and found {} tree(s)",
                sample.trees.len()
            )),
            Answer::Finite if self.root_derivable == empty => Some(format!(
                "the goal is {}derivable but the oracle found {} tree(s)",
                if self.root_derivable { "" } else { "not " },
                sample.trees.len()
            )),
            _ => None,
        }
    }
}
