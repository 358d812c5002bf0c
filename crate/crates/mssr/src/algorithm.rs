use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifies one of the decision algorithms across the analysis,
/// experiment and CLI layers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmId {
    Bdoa,
    Simple,
    Det,
    Rand,
    DetMulti,
    /// Algorithm 4 variant without the `+1` term in the break-even point;
    /// exists only for the plus-one comparison experiment.
    DetMultiNoPlusOne,
    RandMulti,
}

impl AlgorithmId {
    pub fn needs_lambda(self) -> bool {
        !matches!(self, AlgorithmId::Bdoa | AlgorithmId::Simple)
    }

    pub fn needs_predictions(self) -> bool {
        !matches!(self, AlgorithmId::Bdoa)
    }

    pub fn is_multi(self) -> bool {
        matches!(
            self,
            AlgorithmId::DetMulti | AlgorithmId::DetMultiNoPlusOne | AlgorithmId::RandMulti
        )
    }

    pub fn is_randomized(self) -> bool {
        matches!(self, AlgorithmId::Rand | AlgorithmId::RandMulti)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmId::Bdoa => "bdoa",
            AlgorithmId::Simple => "simple",
            AlgorithmId::Det => "det",
            AlgorithmId::Rand => "rand",
            AlgorithmId::DetMulti => "det-multi",
            AlgorithmId::DetMultiNoPlusOne => "det-multi-no-plus-one",
            AlgorithmId::RandMulti => "rand-multi",
        }
    }

    pub fn parse(s: &str) -> Option<AlgorithmId> {
        match s {
            "bdoa" => Some(AlgorithmId::Bdoa),
            "simple" => Some(AlgorithmId::Simple),
            "det" => Some(AlgorithmId::Det),
            "rand" => Some(AlgorithmId::Rand),
            "det-multi" => Some(AlgorithmId::DetMulti),
            "det-multi-no-plus-one" => Some(AlgorithmId::DetMultiNoPlusOne),
            "rand-multi" => Some(AlgorithmId::RandMulti),
            _ => None,
        }
    }
}

impl fmt::Display for AlgorithmId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
