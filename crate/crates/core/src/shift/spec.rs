use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeral::check_base;

/// Declarative description of a one-sided subshift over base-g digits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftSpec {
    pub base: u32,
    #[serde(flatten)]
    pub kind: ShiftKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShiftKind {
    /// All sequences over `digits`.
    Full { digits: Vec<u8> },
    /// One-step shift of finite type: `d -> d'` allowed iff `[d, d']` is listed.
    Sft1 { digits: Vec<u8>, allowed: Vec<[u8; 2]> },
    /// Labelled multigraph presentation.
    Sofic { nodes: Vec<String>, edges: Vec<SoficEdge> },
    /// Binary sequences whose runs of 0 between consecutive 1 have length in `gaps`.
    Sgap { gaps: Vec<usize> },
    /// Union of the component shifts.
    Union { parts: Vec<ShiftSpec> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoficEdge {
    pub from: String,
    pub to: String,
    pub label: u8,
}

impl ShiftSpec {
    pub fn full(base: u32, digits: &[u8]) -> Result<Self> {
        Self {
            base,
            kind: ShiftKind::Full {
                digits: digits.to_vec(),
            },
        }
        .validated()
    }

    pub fn sft1(base: u32, digits: &[u8], allowed: &[[u8; 2]]) -> Result<Self> {
        Self {
            base,
            kind: ShiftKind::Sft1 {
                digits: digits.to_vec(),
                allowed: allowed.to_vec(),
            },
        }
        .validated()
    }

    pub fn sofic(base: u32, nodes: &[&str], edges: &[(&str, &str, u8)]) -> Result<Self> {
        Self {
            base,
            kind: ShiftKind::Sofic {
                nodes: nodes.iter().map(|s| s.to_string()).collect(),
                edges: edges
                    .iter()
                    .map(|&(f, t, l)| SoficEdge {
                        from: f.into(),
                        to: t.into(),
                        label: l,
                    })
                    .collect(),
            },
        }
        .validated()
    }

    pub fn sgap(base: u32, gaps: &[usize]) -> Result<Self> {
        Self {
            base,
            kind: ShiftKind::Sgap { gaps: gaps.to_vec() },
        }
        .validated()
    }

    pub fn union(base: u32, parts: Vec<ShiftSpec>) -> Result<Self> {
        Self {
            base,
            kind: ShiftKind::Union { parts },
        }
        .validated()
    }

    /// Binary sequences without two consecutive 1.
    pub fn golden_mean() -> Self {
        Self::sft1(2, &[0, 1], &[[0, 0], [0, 1], [1, 0]]).unwrap()
    }

    /// Base-3 even shift: `A` loops on 1, `B` loops on 2, `A <-> B` on 0.
    pub fn even_shift() -> Self {
        Self::sofic(
            3,
            &["A", "B"],
            &[("A", "A", 1), ("A", "B", 0), ("B", "B", 2), ("B", "A", 0)],
        )
        .unwrap()
    }

    /// Neighbour-digit shift: `d -> d'` iff `d' - d` is in `{-1, 0, 1}` mod `g`.
    pub fn neighbour_digits(base: u32) -> Result<Self> {
        let g = base as i64;
        let digits: Vec<u8> = (0..base as u8).collect();
        let mut allowed = Vec::new();
        for d in 0..g {
            for s in [-1i64, 0, 1] {
                allowed.push([d as u8, (d + s).rem_euclid(g) as u8]);
            }
        }
        allowed.sort_unstable();
        allowed.dedup();
        Self::sft1(base, &digits, &allowed)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ShiftSpec = serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validated()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    /// Checks all invariants and normalizes digit lists to ascending order.
    pub fn validated(mut self) -> Result<Self> {
        check_base(self.base).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        let g = self.base;
        let check_digit = |d: u8| -> Result<()> {
            if u32::from(d) >= g {
                Err(Error::InvalidSpec(format!("digit {d} not below base {g}")))
            } else {
                Ok(())
            }
        };
        match &mut self.kind {
            ShiftKind::Full { digits } => {
                digits.sort_unstable();
                digits.dedup();
                if digits.is_empty() {
                    return Err(Error::InvalidSpec("full shift needs digits".into()));
                }
                digits.iter().try_for_each(|&d| check_digit(d))?;
            }
            ShiftKind::Sft1 { digits, allowed } => {
                digits.sort_unstable();
                digits.dedup();
                if digits.is_empty() {
                    return Err(Error::InvalidSpec("sft1 needs digits".into()));
                }
                digits.iter().try_for_each(|&d| check_digit(d))?;
                allowed.sort_unstable();
                allowed.dedup();
                for &[d, e] in allowed.iter() {
                    if digits.binary_search(&d).is_err() || digits.binary_search(&e).is_err() {
                        return Err(Error::InvalidSpec(format!(
                            "allowed pair [{d},{e}] uses a digit outside the alphabet"
                        )));
                    }
                }
            }
            ShiftKind::Sofic { nodes, edges } => {
                if nodes.is_empty() {
                    return Err(Error::InvalidSpec("sofic presentation needs nodes".into()));
                }
                let mut sorted = nodes.clone();
                sorted.sort();
                sorted.dedup();
                if sorted.len() != nodes.len() {
                    return Err(Error::InvalidSpec("duplicate node names".into()));
                }
                for e in edges.iter() {
                    check_digit(e.label)?;
                    for name in [&e.from, &e.to] {
                        if !nodes.contains(name) {
                            return Err(Error::InvalidSpec(format!("unknown node {name:?}")));
                        }
                    }
                }
            }
            ShiftKind::Sgap { gaps } => {
                gaps.sort_unstable();
                gaps.dedup();
                if gaps.is_empty() {
                    return Err(Error::InvalidSpec("gap set must be nonempty".into()));
                }
                if gaps.iter().sum::<usize>() > 100_000 {
                    return Err(Error::InvalidSpec("gap set too large".into()));
                }
            }
            ShiftKind::Union { parts } => {
                if parts.is_empty() {
                    return Err(Error::InvalidSpec("union needs parts".into()));
                }
                for part in parts.iter_mut() {
                    if part.base != g {
                        return Err(Error::InvalidSpec("union parts must share the base".into()));
                    }
                    *part = part.clone().validated()?;
                }
            }
        }
        Ok(self)
    }

    /// Digits of a full shift, if this is one.
    pub fn full_digits(&self) -> Option<&[u8]> {
        match &self.kind {
            ShiftKind::Full { digits } => Some(digits),
            _ => None,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ShiftKind::Full { .. } => "full",
            ShiftKind::Sft1 { .. } => "sft1",
            ShiftKind::Sofic { .. } => "sofic",
            ShiftKind::Sgap { .. } => "sgap",
            ShiftKind::Union { .. } => "union",
        }
    }
}
