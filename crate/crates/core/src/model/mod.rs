//! Shared domain types.
//!
//! Everything in here is plain data: enumerations with a stable text form,
//! records produced by the ingestion pipelines, the stakeholder role matrix
//! and the rollup configuration consumed by the engine and the simulator.
//! Construction validates invariants; nothing here performs I/O.

mod config;
mod incident;
mod metrics;
mod risk;
mod roles;
mod share;

pub mod secs;

pub use config::{
    ChallengerSet, ConfigError, DaMode, EscapeHatch, ForcedInclusion, ProofSystem, ProverSet,
    RollupConfig, SequencerConfig, SequencerTopology, UpgradePolicy,
};
pub use incident::{
    CompressedIncidentType, IncidentClass, IncidentDetailType, IncidentRecord, SourceKind,
};
pub use metrics::{HarmMetrics, WithdrawalLatency};
pub use risk::{
    FlagBasis, ProfileError, ProjectCategory, ProjectRiskProfile, RiskDimension, RiskEntry,
    Sentiment,
};
pub use roles::{
    binarize, EraField, FieldTable, RoleAssignment, RoleError, RoleFlag, RoleMatrix, RoleTriple,
    Stakeholder,
};
pub use share::Share;

use thiserror::Error;

/// Failure to parse one of the text-serialized enumerations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {kind} `{input}`")]
pub struct ParseEnumError {
    pub kind: &'static str,
    pub input: String,
}

/// Declares a closed enumeration whose text form is kebab-case.
///
/// Generates `Display`, `FromStr`, serde impls and an `ALL` table in
/// declaration order.
macro_rules! text_enum {
    (
        $(#[$meta:meta])*
        $vis:vis enum $name:ident : $kind:literal {
            $( $(#[$vmeta:meta])* $variant:ident => $text:literal ),+ $(,)?
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        $vis enum $name {
            $( $(#[$vmeta])* $variant ),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl ::std::fmt::Display for $name {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl ::std::str::FromStr for $name {
            type Err = $crate::model::ParseEnumError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err($crate::model::ParseEnumError {
                        kind: $kind,
                        input: s.to_string(),
                    }),
                }
            }
        }

        impl ::serde::Serialize for $name {
            fn serialize<S: ::serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> ::serde::Deserialize<'de> for $name {
            fn deserialize<D: ::serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = <::std::borrow::Cow<'de, str>>::deserialize(d)?;
                s.parse().map_err(::serde::de::Error::custom)
            }
        }
    };
}

pub(crate) use text_enum;

/// Lowercases, trims and collapses internal whitespace.
pub fn normalize_text(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// A non-fatal condition surfaced by an ingestion step.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Warning {
    pub code: String,
    pub message: String,
}

impl Warning {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        let w = Self {
            code: code.to_string(),
            message: message.into(),
        };
        log::warn!("{}: {}", w.code, w.message);
        w
    }
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "warning[{}]: {}", self.code, self.message)
    }
}
