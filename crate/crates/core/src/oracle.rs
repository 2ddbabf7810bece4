//! Exact enumeration of `A_Sigma ∩ [0, N)` and empirical residue distributions.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::analyze::{rational_f64, AnalysisReport, LimitValue, Verdict};
use crate::error::{Error, Result};
use crate::numeral::{GAdditiveFamily, ModulusVector, ResidueAdder, ResidueVector};
use crate::shift::subset::SubsetAutomaton;
use crate::shift::{build_cover, Cover, Edge, Language, ShiftSpec};

/// Default pass threshold for [`compare`].
pub const DEFAULT_TOLERANCE: f64 = 0.02;

/// Enumeration horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    /// Integers below `N`.
    Below(u128),
    /// Integers below `g^m`.
    Power(usize),
}

/// Enumerator for the integers whose canonical expansion lies in the language.
#[derive(Clone, Debug)]
pub struct Oracle {
    base: u32,
    language: Language,
    /// Subset automaton of the reversed cover: reads words most significant digit first.
    rev: SubsetAutomaton,
}

fn reversed(cover: &Cover) -> Result<Cover> {
    let edges = cover
        .edges()
        .iter()
        .map(|e| Edge {
            from: e.to,
            to: e.from,
            label: e.label,
        })
        .collect();
    Cover::new(cover.base(), cover.names().to_vec(), edges)
}

fn pow_u128(g: u32, m: usize) -> Result<u128> {
    u128::from(g)
        .checked_pow(m as u32)
        .ok_or_else(|| Error::Bound(format!("{g}^{m} does not fit in 128 bits")))
}

impl Oracle {
    pub fn new(spec: &ShiftSpec) -> Result<Self> {
        let cover = build_cover(spec)?;
        let all: Vec<usize> = (0..cover.node_count()).collect();
        Ok(Oracle {
            base: spec.base,
            language: Language::new(&cover)?,
            rev: SubsetAutomaton::build(&reversed(&cover)?, &[all])?,
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Whether the canonical expansion of `n` is in the language.
    pub fn contains(&self, n: u128) -> bool {
        self.language
            .contains(&crate::numeral::integer_to_word_u128(n, self.base))
    }

    /// Exclusive upper limit and the largest length needed.
    fn horizon(&self, bound: Bound) -> Result<(u128, usize)> {
        match bound {
            Bound::Power(m) => Ok((pow_u128(self.base, m)?, m)),
            Bound::Below(n) => {
                let mut t = 0usize;
                let mut x = n.saturating_sub(1);
                while x > 0 {
                    x /= u128::from(self.base);
                    t += 1;
                }
                Ok((n, t.max(1)))
            }
        }
    }

    /// First-level tasks `(t, leading digits)`, in ascending value order.
    fn tasks(&self, t_max: usize) -> Vec<(usize, Vec<(u8, usize)>)> {
        let mut out = Vec::new();
        for t in 1..=t_max {
            for (d, s) in self.rev.transitions(0) {
                if d == 0 && t > 1 {
                    continue;
                }
                if t == 1 {
                    out.push((t, vec![(d, s)]));
                    continue;
                }
                for (d2, s2) in self.rev.transitions(s) {
                    out.push((t, vec![(d, s), (d2, s2)]));
                }
            }
        }
        out
    }

    /// `A ∩ [0, N)` in ascending order.
    pub fn enumerate(&self, bound: Bound) -> Result<Vec<u128>> {
        let (limit, t_max) = self.horizon(bound)?;
        let g = u128::from(self.base);
        let chunks: Vec<Vec<u128>> = self
            .tasks(t_max)
            .into_par_iter()
            .map(|(t, lead)| {
                let mut out = Vec::new();
                let mut v = 0u128;
                for &(d, _) in &lead {
                    v = v * g + u128::from(d);
                }
                let s = lead.last().expect("nonempty task").1;
                self.values_dfs(s, t - lead.len(), v, limit, &mut out);
                out
            })
            .collect();
        Ok(chunks.into_iter().flatten().collect())
    }

    fn values_dfs(&self, s: usize, left: usize, v: u128, limit: u128, out: &mut Vec<u128>) {
        let g = u128::from(self.base);
        if left == 0 {
            if v < limit {
                out.push(v);
            }
            return;
        }
        for (d, t) in self.rev.transitions(s) {
            let nv = v * g + u128::from(d);
            // Smallest completion of this prefix.
            if nv.checked_mul(g.pow(left as u32 - 1)).is_none_or(|lo| lo >= limit) {
                break;
            }
            self.values_dfs(t, left - 1, nv, limit, out);
        }
    }

    /// Residue counts of `f(n)` over `A ∩ [0, N)`.
    pub fn census(&self, family: &GAdditiveFamily, bound: Bound) -> Result<CensusTable> {
        let (limit, t_max) = self.horizon(bound)?;
        let per_len = self.census_per_length(family, limit, t_max)?;
        let mut counts = vec![0u64; family.moduli().size()];
        for row in per_len {
            counts.iter_mut().zip(row).for_each(|(x, y)| *x += y);
        }
        let total = counts.iter().sum();
        Ok(CensusTable {
            horizon: limit,
            moduli: family.moduli().clone(),
            counts,
            total,
        })
    }

    /// Residue counts below `limit`, split by digit count `t = 1..=t_max` (0 has one digit).
    fn census_per_length(&self, family: &GAdditiveFamily, limit: u128, t_max: usize) -> Result<Vec<Vec<u64>>> {
        if family.base() != self.base {
            return Err(Error::Domain("family base differs from shift base".into()));
        }
        let moduli = family.moduli();
        let adder = ResidueAdder::new(moduli);
        let incs: Vec<Vec<usize>> = (0..t_max).map(|i| family.increments(i as u64)).collect();
        let g = u128::from(self.base);
        let size = moduli.size();
        let walk = Walk {
            oracle: self,
            incs: &incs,
            adder: &adder,
            limit,
        };
        let parts: Vec<(usize, Vec<u64>)> = self
            .tasks(t_max)
            .into_par_iter()
            .map(|(t, lead)| {
                let mut counts = vec![0u64; size];
                let mut v = 0u128;
                let mut r = 0usize;
                for (j, &(d, _)) in lead.iter().enumerate() {
                    v = v * g + u128::from(d);
                    r = adder.add(r, incs[t - 1 - j][d as usize]);
                }
                walk.count(lead.last().expect("nonempty task").1, t - lead.len(), v, r, &mut counts);
                (t, counts)
            })
            .collect();
        let mut out = vec![vec![0u64; size]; t_max];
        for (t, counts) in parts {
            out[t - 1].iter_mut().zip(counts).for_each(|(x, y)| *x += y);
        }
        Ok(out)
    }

    /// Censuses for `N = g^m`, `m = 1..=m_max`, in one pass.
    pub fn census_ladder(&self, family: &GAdditiveFamily, m_max: usize) -> Result<Vec<CensusTable>> {
        let per_len = self.census_by_length(family, m_max)?;
        let mut acc = vec![0u64; family.moduli().size()];
        let mut out = Vec::with_capacity(m_max);
        for (m, counts) in per_len.into_iter().enumerate() {
            acc.iter_mut().zip(&counts).for_each(|(x, y)| *x += y);
            out.push(CensusTable {
                horizon: pow_u128(self.base, m + 1)?,
                moduli: family.moduli().clone(),
                counts: acc.clone(),
                total: acc.iter().sum(),
            });
        }
        Ok(out)
    }

    /// Residue counts of elements with exactly `t` digits, `t = 1..=t_max` (0 counts as one digit).
    pub fn census_by_length(&self, family: &GAdditiveFamily, t_max: usize) -> Result<Vec<Vec<u64>>> {
        self.census_per_length(family, pow_u128(self.base, t_max)?, t_max)
    }

    /// `|A ∩ (aN + b) ∩ [0, g^m)|` for `m = 1..=m_max`, by dynamic programming over
    /// (language state, residue) with the most significant digit nonzero.
    pub fn progression_counts(&self, a: u64, b: u64, m_max: usize) -> Result<Vec<u64>> {
        if a == 0 {
            return Err(Error::Domain("modulus must be >= 1".into()));
        }
        let au = a as usize;
        let b = (b % a) as usize;
        let aut = self.language.automaton();
        let g = u64::from(self.base);
        let mut layer = vec![0u64; aut.len() * au];
        layer[0] = 1;
        let mut weight = 1 % a;
        let mut total = 0u64;
        let mut out = Vec::with_capacity(m_max);
        for t in 1..=m_max {
            let mut next = vec![0u64; aut.len() * au];
            for s in 0..aut.len() {
                for r in 0..au {
                    let c = layer[s * au + r];
                    if c == 0 {
                        continue;
                    }
                    for (d, q) in aut.transitions(s) {
                        let nr = ((r as u64 + u64::from(d) * weight) % a) as usize;
                        next[q * au + nr] += c;
                        if nr == b && (d != 0 || t == 1) {
                            total += c;
                        }
                    }
                }
            }
            layer = next;
            weight = weight * g % a;
            out.push(total);
        }
        Ok(out)
    }

    /// `|A ∩ [0, g^m)|` from language counts: words whose last digit is nonzero, plus `0`.
    pub fn count_below_power(&self, m: usize) -> BigUint {
        let aut = self.language.automaton();
        let mut layer = vec![BigUint::zero(); aut.len()];
        layer[0] = BigUint::from(1u32);
        let mut total = BigUint::zero();
        if aut.step(0, 0).is_some() {
            total += 1u32;
        }
        for _ in 0..m {
            let mut next = vec![BigUint::zero(); aut.len()];
            for (s, c) in layer.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (d, t) in aut.transitions(s) {
                    if d != 0 {
                        total += c;
                    }
                    next[t] += c;
                }
            }
            layer = next;
        }
        total
    }
}

struct Walk<'a> {
    oracle: &'a Oracle,
    incs: &'a [Vec<usize>],
    adder: &'a ResidueAdder,
    limit: u128,
}

impl Walk<'_> {
    fn count(&self, s: usize, left: usize, v: u128, r: usize, counts: &mut [u64]) {
        let g = u128::from(self.oracle.base);
        if left == 0 {
            if v < self.limit {
                counts[r] += 1;
            }
            return;
        }
        let scale = g.pow(left as u32 - 1);
        for (d, t) in self.oracle.rev.transitions(s) {
            let nv = v * g + u128::from(d);
            if nv.checked_mul(scale).is_none_or(|lo| lo >= self.limit) {
                break;
            }
            self.count(
                t,
                left - 1,
                nv,
                self.adder.add(r, self.incs[left - 1][d as usize]),
                counts,
            );
        }
    }
}

/// `A_Sigma ∩ [0, N)` in ascending order.
pub fn enumerate_set(spec: &ShiftSpec, bound: Bound) -> Result<Vec<u128>> {
    Oracle::new(spec)?.enumerate(bound)
}

/// Residue counts of `f(n)` over `A_Sigma ∩ [0, N)`.
pub fn census(spec: &ShiftSpec, family: &GAdditiveFamily, bound: Bound) -> Result<CensusTable> {
    Oracle::new(spec)?.census(family, bound)
}

/// Exact residue counts over an enumerated set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CensusTable {
    /// Exclusive upper limit `N`.
    pub horizon: u128,
    pub moduli: ModulusVector,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl CensusTable {
    pub fn count(&self, b: &ResidueVector) -> u64 {
        self.counts[self.moduli.index_of(&self.moduli.reduce(&b.0))]
    }

    /// Exact frequency; `None` when the set is empty.
    pub fn frequency(&self, idx: usize) -> Option<BigRational> {
        (self.total > 0).then(|| BigRational::new(self.counts[idx].into(), self.total.into()))
    }

    pub fn frequencies_f64(&self) -> Vec<f64> {
        let t = self.total.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / t).collect()
    }

    /// Rows `b1,..,br,count,frequency_num,frequency_den`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let heads: Vec<String> = (1..=self.moduli.len()).map(|j| format!("b{j}")).collect();
        out.push_str(&heads.join(","));
        out.push_str(",count,frequency_num,frequency_den\n");
        for (idx, &c) in self.counts.iter().enumerate() {
            let b: Vec<String> = self.moduli.residue_at(idx).0.iter().map(u64::to_string).collect();
            let (num, den) = match self.frequency(idx) {
                Some(q) => (q.numer().to_string(), q.denom().to_string()),
                None => ("0".into(), "1".into()),
            };
            out.push_str(&format!("{},{c},{num},{den}\n", b.join(",")));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": crate::analyze::SCHEMA_VERSION,
            "horizon": self.horizon.to_string(),
            "moduli": self.moduli.as_slice(),
            "total": self.total,
            "cells": self.counts.iter().enumerate().map(|(idx, &c)| {
                let q = self.frequency(idx);
                serde_json::json!({
                    "residue": self.moduli.residue_at(idx).0,
                    "count": c,
                    "frequency": q.as_ref().map(crate::analyze::rational_string),
                    "float": q.as_ref().map(rational_f64),
                })
            }).collect::<Vec<_>>(),
        })
    }
}

/// Predicted versus empirical frequencies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub tv_distance: f64,
    pub max_cell_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Cells without a predicted limit, reported but not scored.
    pub oscillating: Vec<Vec<u64>>,
}

/// Scores a report's limit table against a census.
///
/// For zero-or-nonexistent verdicts only the predicted-zero cells are scored: the
/// distance is the empirical mass found there.
pub fn compare(report: &AnalysisReport, table: &CensusTable, tolerance: f64) -> Result<Comparison> {
    let pred = report
        .table
        .as_ref()
        .ok_or_else(|| Error::Precondition(format!("verdict {} carries no limit table", report.verdict)))?;
    if pred.moduli() != &table.moduli {
        return Err(Error::Domain("report and census use different moduli".into()));
    }
    if table.total == 0 {
        return Err(Error::Precondition("census is empty".into()));
    }
    let emp = table.frequencies_f64();
    let mut tv = 0.0;
    let mut max_err: f64 = 0.0;
    let mut oscillating = Vec::new();
    let zero_only = report.verdict == Verdict::ZeroOrNonexistent;
    for (idx, cell) in pred.cells().iter().enumerate() {
        match cell {
            LimitValue::Value(q) => {
                if zero_only && !cell.is_zero() {
                    continue;
                }
                let err = (rational_f64(q) - emp[idx]).abs();
                max_err = max_err.max(err);
                tv += if zero_only { emp[idx] } else { 0.5 * err };
            }
            LimitValue::Dne => oscillating.push(table.moduli.residue_at(idx).0),
        }
    }
    Ok(Comparison {
        tv_distance: tv,
        max_cell_error: max_err,
        tolerance,
        pass: tv <= tolerance,
        oscillating,
    })
}

/// `(m, tv(m))` for `m = 1..=m_max` against the report's prediction.
pub fn convergence_table(
    spec: &ShiftSpec,
    family: &GAdditiveFamily,
    report: &AnalysisReport,
    m_max: usize,
) -> Result<Vec<(usize, f64)>> {
    let ladder = Oracle::new(spec)?.census_ladder(family, m_max)?;
    ladder
        .iter()
        .enumerate()
        .map(|(m, t)| Ok((m + 1, compare(report, t, DEFAULT_TOLERANCE)?.tv_distance)))
        .collect()
}

/// Per-length distinct residues of canonical expansions, lengths `1..=t_max`.
pub fn length_residue_supports(
    spec: &ShiftSpec,
    family: &GAdditiveFamily,
    t_max: usize,
) -> Result<Vec<Vec<ResidueVector>>> {
    let per_len = Oracle::new(spec)?.census_by_length(family, t_max)?;
    Ok(per_len
        .into_iter()
        .map(|counts| {
            counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, _)| family.moduli().residue_at(i))
                .collect()
        })
        .collect())
}
