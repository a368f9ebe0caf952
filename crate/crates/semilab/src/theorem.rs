//! Identifiers for the estimates the laboratory can certify and check.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// An estimate family together with its hypothesis set and recipe.
///
/// The short numeric ids (`"1.3"`, `"1.9"`, ...) are the values accepted by the
/// command line `--theorem` flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// Strong log-gradient bound for `Λ < p(N)` with finite `Π`.
    UniversalGradient,
    /// Weak log-gradient bound when `t^{-α} f` is non-increasing.
    WeakGradient,
    /// `ε`-regularised bounds for `Λ ∈ [p(N), p_S(N))`.
    Regularized,
    /// Unregularised bound under the superlinear `h`-inverse condition.
    Superlinear,
    /// Lane-Emden `f = t^α` with `α < p_S(N)`.
    LaneEmden,
    /// Universal bound obtained from a Harnack constant.
    HarnackUniversal,
    /// Lichnerowicz-type `f = a t − b t^σ + c t^τ`.
    Lichnerowicz,
}

impl Theorem {
    pub const ALL: [Theorem; 7] = [
        Theorem::UniversalGradient,
        Theorem::WeakGradient,
        Theorem::Regularized,
        Theorem::Superlinear,
        Theorem::LaneEmden,
        Theorem::HarnackUniversal,
        Theorem::Lichnerowicz,
    ];

    /// Short id used on the command line.
    pub fn id(self) -> &'static str {
        match self {
            Theorem::UniversalGradient => "1.3",
            Theorem::WeakGradient => "1.5",
            Theorem::Regularized => "1.7",
            Theorem::Superlinear => "1.8",
            Theorem::LaneEmden => "1.9",
            Theorem::HarnackUniversal => "6.5",
            Theorem::Lichnerowicz => "8",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Theorem::UniversalGradient => "universal-gradient",
            Theorem::WeakGradient => "weak-gradient",
            Theorem::Regularized => "regularized",
            Theorem::Superlinear => "superlinear",
            Theorem::LaneEmden => "lane-emden",
            Theorem::HarnackUniversal => "harnack-universal",
            Theorem::Lichnerowicz => "lichnerowicz",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Error returned for an identifier that names no supported estimate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unsupported theorem identifier `{0}`")]
pub struct UnknownTheorem(pub String);

impl FromStr for Theorem {
    type Err = UnknownTheorem;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        let key = key.strip_prefix("thm").unwrap_or(&key).trim_start_matches(['.', ' ']);
        Theorem::ALL
            .into_iter()
            .find(|t| {
                t.id() == key
                    || t.name() == key
                    || (key == "8.2" || key == "8.3" || key == "8.4") && *t == Theorem::Lichnerowicz
            })
            .ok_or_else(|| UnknownTheorem(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for t in Theorem::ALL {
            assert_eq!(t.id().parse::<Theorem>().unwrap(), t);
            assert_eq!(t.name().parse::<Theorem>().unwrap(), t);
        }
        assert_eq!("Thm1.9".parse::<Theorem>().unwrap(), Theorem::LaneEmden);
        assert_eq!("8.2".parse::<Theorem>().unwrap(), Theorem::Lichnerowicz);
        assert!("2.1".parse::<Theorem>().is_err());
    }
}
