use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// How address and bus qubits are carried through the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    SingleRail,
    #[serde(alias = "hybrid")]
    HybridDualRail,
    /// Two physical rails per logical qubit, tree initialized in vacuum.
    #[serde(alias = "standard-vacuum")]
    StandardDualRailVacuum,
    /// Two physical rails per logical qubit, tree initialized in the logical subspace.
    #[serde(alias = "standard-logical")]
    StandardDualRailLogical,
}

impl Encoding {
    pub const ALL: [Encoding; 4] = [
        Encoding::SingleRail,
        Encoding::HybridDualRail,
        Encoding::StandardDualRailVacuum,
        Encoding::StandardDualRailLogical,
    ];

    pub fn is_standard(self) -> bool {
        matches!(self, Encoding::StandardDualRailVacuum | Encoding::StandardDualRailLogical)
    }

    /// Physical rails routed per logical qubit.
    pub fn rails(self) -> usize {
        if self.is_standard() {
            2
        } else {
            1
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Encoding::SingleRail => "single-rail",
            Encoding::HybridDualRail => "hybrid-dual-rail",
            Encoding::StandardDualRailVacuum => "standard-dual-rail-vacuum",
            Encoding::StandardDualRailLogical => "standard-dual-rail-logical",
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "single-rail" => Ok(Encoding::SingleRail),
            "hybrid" | "hybrid-dual-rail" => Ok(Encoding::HybridDualRail),
            "standard-vacuum" | "standard-dual-rail-vacuum" => Ok(Encoding::StandardDualRailVacuum),
            "standard-logical" | "standard-dual-rail-logical" => Ok(Encoding::StandardDualRailLogical),
            other => Err(Error::invalid(format!("unknown encoding {other:?}"))),
        }
    }
}
