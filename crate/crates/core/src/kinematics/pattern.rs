use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Alpha,
    Beta,
    El,
    VMax,
    Zero,
}

impl Phase {
    pub fn token(self) -> &'static str {
        match self {
            Phase::Alpha => "alpha",
            Phase::Beta => "beta",
            Phase::El => "el",
            Phase::VMax => "vmax",
            Phase::Zero => "0",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "alpha" => Phase::Alpha,
            "beta" => Phase::Beta,
            "el" => Phase::El,
            "vmax" => Phase::VMax,
            "0" => Phase::Zero,
            _ => return None,
        })
    }
}

use Phase::*;

const ORDERS: [(&[Phase], bool); 17] = [
    (&[Alpha], false),
    (&[Alpha, Beta], true),
    (&[Alpha, El, Beta], true),
    (&[Alpha, VMax, El, Beta], true),
    (&[Alpha, El], false),
    (&[Alpha, VMax, El], false),
    (&[Alpha, VMax, Beta], true),
    (&[Alpha, VMax], false),
    (&[Beta], false),
    (&[Beta, El, Beta], true),
    (&[Beta, El], false),
    (&[VMax, El, Beta], true),
    (&[VMax, El], false),
    (&[VMax, Beta], true),
    (&[VMax], false),
    (&[El, Beta], true),
    (&[El], false),
];

/// Ordered phases of positive velocity plus an optional final standstill.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhasePattern {
    pub sequence: Vec<Phase>,
    pub trailing_zero: bool,
}

impl PhasePattern {
    pub fn new(sequence: Vec<Phase>, trailing_zero: bool) -> Self {
        Self { sequence, trailing_zero }
    }

    /// Builds a pattern from a raw phase list, merging repeats and splitting off a final standstill.
    pub fn from_phases<I: IntoIterator<Item = Phase>>(phases: I) -> Self {
        let mut sequence: Vec<Phase> = Vec::new();
        for p in phases {
            if sequence.last() != Some(&p) {
                sequence.push(p);
            }
        }
        let trailing_zero = sequence.last() == Some(&Zero);
        if trailing_zero {
            sequence.pop();
        }
        Self { sequence, trailing_zero }
    }

    /// Number of phases including the final standstill.
    pub fn len(&self) -> usize {
        self.sequence.len() + self.trailing_zero as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when the order is one of the seventeen admissible ones.
    pub fn is_admissible(&self) -> bool {
        ORDERS.iter().any(|(o, _)| *o == self.sequence.as_slice())
    }

    /// True for orders that need an isobar steeper than braking.
    pub fn is_boxed(&self) -> bool {
        ORDERS.iter().any(|(o, boxed)| *boxed && *o == self.sequence.as_slice())
    }

    pub fn contains(&self, phase: Phase) -> bool {
        self.sequence.contains(&phase)
    }
}

impl fmt::Display for PhasePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut tokens: Vec<&str> = self.sequence.iter().map(|p| p.token()).collect();
        if self.trailing_zero {
            tokens.push("0");
        }
        f.write_str(&tokens.join("~>"))
    }
}

impl FromStr for PhasePattern {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let phases = s
            .split("~>")
            .map(|t| Phase::parse(t.trim()).ok_or_else(|| format!("unknown phase `{t}`")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_phases(phases))
    }
}

impl Serialize for PhasePattern {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PhasePattern {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
