//! Topological entropy, mass dimension and transversality with arithmetic progressions.

use std::collections::{HashSet, VecDeque};

use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};

use crate::chain::ChainSystem;
use crate::error::{Error, Result};
use crate::graph;
use crate::numeral::{check_base, ln_biguint, word_to_integer, Word};
use crate::oracle::{Bound, Oracle};
use crate::shift::{build_cover, fischer_cover, Cover, Language, ShiftSpec};

/// Relative gap between the Collatz-Wielandt bounds at which power iteration stops.
pub const POWER_TOLERANCE: f64 = 1e-12;
/// Power iteration cap before falling back to the language-count slope.
pub const POWER_ITERATION_CAP: usize = 100_000;
/// Lengths used by the language-count slope.
pub const SLOPE_RANGE: (usize, usize) = (30, 40);
/// Largest `i_max` accepted by [`block_sequence_shift`].
pub const BLOCK_INDEX_CAP: usize = 12;

/// Perron eigenvalue of the determinized presentation of `cover`, with its source.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerronEstimate {
    pub eigenvalue: f64,
    /// False when the iteration cap was hit and the count slope was used instead.
    pub converged: bool,
}

/// Dominant eigenvalue of a strongly connected component, by power iteration on `A + I`.
fn component_radius(succ: &[Vec<usize>], comp: &[usize]) -> Option<f64> {
    let mut pos = vec![usize::MAX; succ.len()];
    for (i, &v) in comp.iter().enumerate() {
        pos[v] = i;
    }
    let local: Vec<Vec<usize>> = comp
        .iter()
        .map(|&v| {
            succ[v]
                .iter()
                .filter(|&&w| pos[w] != usize::MAX)
                .map(|&w| pos[w])
                .collect()
        })
        .collect();
    if local.iter().all(Vec::is_empty) {
        return Some(0.0);
    }
    let n = comp.len();
    let mut x = vec![1.0f64; n];
    for _ in 0..POWER_ITERATION_CAP {
        let mut y = x.clone();
        for (v, out) in local.iter().enumerate() {
            for &w in out {
                y[v] += x[w];
            }
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for v in 0..n {
            let r = y[v] / x[v];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if hi - lo <= POWER_TOLERANCE * hi {
            return Some(0.5 * (hi + lo) - 1.0);
        }
        let top = y.iter().cloned().fold(0.0, f64::max);
        x = y.into_iter().map(|t| t / top).collect();
    }
    None
}

/// Perron eigenvalue of the language automaton of `cover`.
pub fn perron_eigenvalue(cover: &Cover) -> Result<PerronEstimate> {
    if cover.node_count() == 0 {
        return Err(Error::EmptyShift);
    }
    let lang = Language::new(&cover.trimmed()?)?;
    let succ = lang.automaton().successors();
    let mut best = 0.0f64;
    for comp in graph::strongly_connected_components(&succ) {
        match component_radius(&succ, &comp) {
            Some(r) => best = best.max(r),
            None => {
                let h = entropy_slope(cover, SLOPE_RANGE.0, SLOPE_RANGE.1)?;
                return Ok(PerronEstimate {
                    eigenvalue: h.exp(),
                    converged: false,
                });
            }
        }
    }
    Ok(PerronEstimate {
        eigenvalue: best,
        converged: true,
    })
}

/// `h(Σ) = log λ`, with `λ` the Perron eigenvalue of the determinized cover.
pub fn entropy(cover: &Cover) -> Result<f64> {
    Ok(perron_eigenvalue(cover)?.eigenvalue.ln())
}

/// `(log|L^n1| - log|L^n0|) / (n1 - n0)`.
pub fn entropy_slope(cover: &Cover, n0: usize, n1: usize) -> Result<f64> {
    if n1 <= n0 {
        return Err(Error::Domain("slope needs n0 < n1".into()));
    }
    let counts = Language::new(&cover.trimmed()?)?.counts(n1);
    Ok((ln_biguint(&counts[n1]) - ln_biguint(&counts[n0])) / (n1 - n0) as f64)
}

/// `(log λ)/(log g)`, kept in eigenvalue form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExactDimension {
    pub eigenvalue: f64,
    pub base: u32,
}

impl ExactDimension {
    pub fn value(&self) -> f64 {
        if self.eigenvalue <= 1.0 {
            return 0.0;
        }
        self.eigenvalue.ln() / f64::from(self.base).ln()
    }
}

/// Slopes `log c_m / (m log g)` of counts `c_m = |A ∩ [0, g^m)|` and a fit over the last third.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalDimension {
    pub base: u32,
    /// `(m, log c_m)`, with `None` for an empty count.
    pub log_counts: Vec<(usize, Option<f64>)>,
    pub slopes: Vec<(usize, f64)>,
    /// Least-squares slope of `log c_m` against `m log g` over the last third of the range.
    pub fit: f64,
    pub lower: f64,
    pub upper: f64,
    /// No element below the horizon.
    pub empty: bool,
}

impl EmpiricalDimension {
    /// From `log c_m` for `m = 1..=m_max`.
    pub fn from_log_counts(base: u32, logs: Vec<Option<f64>>) -> Self {
        let lg = f64::from(base).ln();
        let m_max = logs.len();
        let log_counts: Vec<(usize, Option<f64>)> = logs.into_iter().enumerate().map(|(i, l)| (i + 1, l)).collect();
        let slopes: Vec<(usize, f64)> = log_counts
            .iter()
            .map(|&(m, l)| (m, l.map_or(0.0, |l| l / (m as f64 * lg))))
            .collect();
        let empty = log_counts.last().is_none_or(|(_, l)| l.is_none());
        let width = m_max.div_ceil(3).max(2).min(m_max);
        let window = &log_counts[m_max - width..];
        let points: Vec<(f64, f64)> = window
            .iter()
            .filter_map(|&(m, l)| l.map(|l| (m as f64 * lg, l)))
            .collect();
        let fit = if points.len() >= 2 {
            let k = points.len() as f64;
            let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
            let my = points.iter().map(|p| p.1).sum::<f64>() / k;
            let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
            sxy / sxx
        } else {
            0.0
        };
        let ws = &slopes[m_max - width..];
        let lower = ws.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        let upper = ws.iter().map(|s| s.1).fold(0.0, f64::max);
        let clamp = |x: f64| if x.is_finite() { x.clamp(0.0, 1.0) } else { 0.0 };
        EmpiricalDimension {
            base,
            log_counts,
            slopes,
            fit: clamp(fit),
            lower: clamp(lower),
            upper: clamp(upper),
            empty,
        }
    }

    pub fn from_counts(base: u32, counts: &[u64]) -> Self {
        let logs = counts.iter().map(|&c| (c > 0).then(|| (c as f64).ln())).collect();
        Self::from_log_counts(base, logs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransversalityVerdict {
    EqualDimension,
    FiniteIntersection,
}

impl TransversalityVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            TransversalityVerdict::EqualDimension => "equal-dimension",
            TransversalityVerdict::FiniteIntersection => "finite-intersection",
        }
    }
}

/// Outcome of the witness search for `A ∩ (aN + b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Transversality {
    pub a: u64,
    pub b: u64,
    pub verdict: TransversalityVerdict,
    /// A word of the language with `|w| >= a - 1` and `(w)_g = b mod a`.
    pub witness: Option<Word>,
    /// Every element of the intersection, when it is finite.
    pub finite_set: Option<Vec<u128>>,
    pub explored_states: usize,
}

impl Transversality {
    pub fn to_json(&self) -> Value {
        json!({
            "a": self.a,
            "b": self.b,
            "verdict": self.verdict.as_str(),
            "witness_lsb": self.witness.as_ref().map(Word::to_lsb_string),
            "witness_value": self.witness.as_ref().and_then(|w| word_to_integer(w).ok()).map(|n| n.to_string()),
            "finite_set": self.finite_set.as_ref().map(|s| s.iter().map(ToString::to_string).collect::<Vec<_>>()),
            "explored_states": self.explored_states,
        })
    }
}

/// Decides whether `A_Σ ∩ (aN + b)` has full dimension or is finite.
///
/// Breadth-first search over (cover node, residue, saturated length, `g^len mod a`)
/// for a nonempty word of the language of length at least `a - 1` with value `b mod a`.
pub fn transversality_check(spec: &ShiftSpec, a: u64, b: u64) -> Result<Transversality> {
    if a == 0 {
        return Err(Error::Domain("modulus must be >= 1".into()));
    }
    let b = b % a;
    let fc = fischer_cover(&build_cover(spec)?)?;
    let cover = fc.cover();
    let g = u64::from(cover.base());
    let n = cover.node_count();
    let au = a as usize;
    let cap = (a.saturating_sub(1)).max(1) as usize;
    let total = n
        .checked_mul(au)
        .and_then(|x| x.checked_mul(cap + 1))
        .and_then(|x| x.checked_mul(au))
        .filter(|&x| x <= crate::analyze::WITNESS_STATE_CAP)
        .ok_or_else(|| Error::Bound("transversality search space too large".into()))?;
    let enc = |v: usize, r: u64, len: usize, w: u64| ((v * au + r as usize) * (cap + 1) + len) * au + w as usize;
    let mut parent: Vec<Option<(usize, u8)>> = vec![None; total];
    let mut seen = vec![false; total];
    let mut q = VecDeque::new();
    for v in 0..n {
        let code = enc(v, 0, 0, 1 % a);
        seen[code] = true;
        q.push_back((v, 0u64, 0usize, 1 % a));
    }
    let threshold = (a - 1) as usize;
    let mut explored = 0usize;
    let mut found = None;
    'bfs: while let Some((v, r, len, w)) = q.pop_front() {
        explored += 1;
        let here = enc(v, r, len, w);
        for e in cover.out_edges(v) {
            let next = (e.to, (r + u64::from(e.label) * w) % a, (len + 1).min(cap), w * g % a);
            let code = enc(next.0, next.1, next.2, next.3);
            if seen[code] {
                continue;
            }
            seen[code] = true;
            parent[code] = Some((here, e.label));
            if next.1 == b && next.2 >= threshold {
                found = Some(code);
                break 'bfs;
            }
            q.push_back(next);
        }
    }
    match found {
        Some(mut at) => {
            let mut ds = Vec::new();
            while let Some((prev, d)) = parent[at] {
                ds.push(d);
                at = prev;
            }
            ds.reverse();
            let witness = Word::new(cover.base(), ds)?;
            Ok(Transversality {
                a,
                b,
                verdict: TransversalityVerdict::EqualDimension,
                witness: Some(witness),
                finite_set: None,
                explored_states: explored,
            })
        }
        None => {
            // Every element has fewer than a - 1 digits.
            let oracle = Oracle::new(spec)?;
            let set: Vec<u128> = oracle
                .enumerate(Bound::Power(threshold))?
                .into_iter()
                .filter(|&x| x % u128::from(a) == u128::from(b))
                .collect();
            Ok(Transversality {
                a,
                b,
                verdict: TransversalityVerdict::FiniteIntersection,
                witness: None,
                finite_set: Some(set),
                explored_states: explored,
            })
        }
    }
}

/// Exact and empirical dimension of a set, with the transversality verdict when one was computed.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionEstimate {
    pub exact: Option<ExactDimension>,
    pub empirical: Option<EmpiricalDimension>,
    pub transversality: Option<Transversality>,
    pub notes: Vec<String>,
}

impl DimensionEstimate {
    pub fn to_json(&self) -> Value {
        json!({
            "schema": crate::analyze::SCHEMA_VERSION,
            "exact": self.exact.map(|e| json!({ "eigenvalue": e.eigenvalue, "base": e.base, "value": e.value() })),
            "empirical": self.empirical.as_ref().map(|e| json!({
                "slopes": e.slopes.iter().map(|&(m, s)| json!({ "m": m, "slope": s })).collect::<Vec<_>>(),
                "fit": e.fit,
                "lower": e.lower,
                "upper": e.upper,
                "empty": e.empty,
            })),
            "verdict": self.transversality.as_ref().map(Transversality::to_json),
            "notes": self.notes,
        })
    }
}

/// `dim_M(A_Σ) = h(Σ)/log g`, with count slopes up to `g^m_max`.
pub fn mass_dimension(spec: &ShiftSpec, m_max: usize) -> Result<DimensionEstimate> {
    let cover = build_cover(spec)?;
    let perron = perron_eigenvalue(&cover)?;
    let oracle = Oracle::new(spec)?;
    let logs = (1..=m_max)
        .map(|m| {
            let c = oracle.count_below_power(m);
            (c != BigUint::ZERO).then(|| ln_biguint(&c))
        })
        .collect();
    let mut notes = Vec::new();
    if !perron.converged {
        notes.push("power iteration hit its cap; eigenvalue taken from the count slope".into());
    }
    Ok(DimensionEstimate {
        exact: Some(ExactDimension {
            eigenvalue: perron.eigenvalue,
            base: spec.base,
        }),
        empirical: Some(EmpiricalDimension::from_log_counts(spec.base, logs)),
        transversality: None,
        notes,
    })
}

/// Count slopes of `A_Σ ∩ (aN + b)` up to `g^m_max`.
pub fn empirical_dimension(spec: &ShiftSpec, a: u64, b: u64, m_max: usize) -> Result<DimensionEstimate> {
    let counts = Oracle::new(spec)?.progression_counts(a, b, m_max)?;
    let emp = EmpiricalDimension::from_counts(spec.base, &counts);
    let mut notes = Vec::new();
    if emp.empty {
        notes.push(format!("no element of {a}N + {} below {}^{m_max}", b % a, spec.base));
    }
    Ok(DimensionEstimate {
        exact: None,
        empirical: Some(emp),
        transversality: None,
        notes,
    })
}

/// Exact dimension of `A_Σ ∩ (aN + b)` for a transitive sofic shift, plus count slopes.
pub fn progression_dimension(spec: &ShiftSpec, a: u64, b: u64, m_max: usize) -> Result<DimensionEstimate> {
    let t = transversality_check(spec, a, b)?;
    let perron = perron_eigenvalue(&build_cover(spec)?)?;
    let eigenvalue = match t.verdict {
        TransversalityVerdict::EqualDimension => perron.eigenvalue,
        TransversalityVerdict::FiniteIntersection => 1.0,
    };
    let mut est = empirical_dimension(spec, a, b, m_max)?;
    est.exact = Some(ExactDimension {
        eigenvalue,
        base: spec.base,
    });
    est.transversality = Some(t);
    Ok(est)
}

/// `ν_i 𝓜_i^n`, which counts the extensions of length `i + np` by state.
pub fn evolve_counts(sys: &ChainSystem, i: usize, n: u64) -> Result<Vec<BigUint>> {
    let nu = sys.initial_counts(i)?;
    Ok(sys.count_matrix(i).pow(n).left_mul(&nu))
}

/// Prefix of the sequence `w = (W_0)(W_1)(W_2)...` with `W_k = { h d^k z : z ∈ D^k }`.
#[derive(Clone, Debug)]
pub struct BlockSequence {
    base: u32,
    digits: Vec<u8>,
    h: u8,
    i_max: usize,
    word: Vec<u8>,
}

/// Builds `w(i_max)`: the blocks `W_0, ..., W_{i_max}` concatenated, `d` the least digit of `D`.
pub fn block_sequence_shift(g: u32, digits: &[u8], h: u8, i_max: usize) -> Result<BlockSequence> {
    check_base(g)?;
    let mut ds = digits.to_vec();
    ds.sort_unstable();
    ds.dedup();
    if ds.is_empty() || ds.iter().any(|&d| u32::from(d) >= g) || u32::from(h) >= g {
        return Err(Error::Domain(format!("digits must be nonempty and below {g}")));
    }
    if ds.contains(&h) {
        return Err(Error::Precondition(format!("h = {h} must lie outside D")));
    }
    if i_max > BLOCK_INDEX_CAP {
        return Err(Error::Domain(format!("i_max must be at most {BLOCK_INDEX_CAP}")));
    }
    let mut seq = BlockSequence {
        base: g,
        digits: ds,
        h,
        i_max,
        word: Vec::new(),
    };
    let mut word = Vec::new();
    for k in 0..=i_max {
        for w in seq.block_raw(k) {
            word.extend_from_slice(&w);
        }
    }
    seq.word = word;
    Ok(seq)
}

impl BlockSequence {
    fn block_raw(&self, k: usize) -> Vec<Vec<u8>> {
        let d = self.digits[0];
        let mut zs: Vec<Vec<u8>> = vec![Vec::new()];
        for _ in 0..k {
            zs = zs
                .into_iter()
                .flat_map(|z| self.digits.iter().map(move |&x| [z.as_slice(), &[x]].concat()))
                .collect();
        }
        zs.into_iter()
            .map(|z| {
                let mut w = vec![self.h];
                w.extend(std::iter::repeat_n(d, k));
                w.extend(z);
                w
            })
            .collect()
    }

    /// The words of `W_k`, in lexicographic order of `z`.
    pub fn block(&self, k: usize) -> Vec<Word> {
        self.block_raw(k)
            .into_iter()
            .map(|w| Word::from_raw(self.base, w))
            .collect()
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn i_max(&self) -> usize {
        self.i_max
    }

    pub fn prefix(&self) -> &[u8] {
        &self.word
    }

    /// Sorted values `(u)_g` of all subwords `u` with `|u| <= m`, including 0.
    pub fn values(&self, m: usize) -> Result<Vec<u128>> {
        if u128::from(self.base).checked_pow(m as u32).is_none() {
            return Err(Error::Bound(format!("{}^{m} exceeds u128", self.base)));
        }
        let g = u128::from(self.base);
        let mut set: HashSet<u128> = HashSet::from([0]);
        for s in 0..self.word.len() {
            let (mut val, mut pw) = (0u128, 1u128);
            for &d in self.word[s..].iter().take(m) {
                val += u128::from(d) * pw;
                pw *= g;
                set.insert(val);
            }
        }
        let mut out: Vec<u128> = set.into_iter().collect();
        out.sort_unstable();
        Ok(out)
    }

    /// `|A ∩ (aN + b) ∩ [0, g^m)|` for `m = 1..=m_max`, from subwords of the prefix.
    pub fn progression_counts(&self, a: u64, b: u64, m_max: usize) -> Result<Vec<u64>> {
        if a == 0 {
            return Err(Error::Domain("modulus must be >= 1".into()));
        }
        if m_max > 2 * self.i_max {
            return Err(Error::Domain(format!(
                "m_max must be at most 2 i_max = {}",
                2 * self.i_max
            )));
        }
        let vals = self.values(m_max)?;
        let g = u128::from(self.base);
        let (a, b) = (u128::from(a), u128::from(b % a));
        Ok((1..=m_max)
            .map(|m| {
                let top = g.pow(m as u32);
                vals.iter().filter(|&&v| v < top && v % a == b).count() as u64
            })
            .collect())
    }

    pub fn empirical_dimension(&self, a: u64, b: u64, m_max: usize) -> Result<DimensionEstimate> {
        let counts = self.progression_counts(a, b, m_max)?;
        Ok(DimensionEstimate {
            exact: None,
            empirical: Some(EmpiricalDimension::from_counts(self.base, &counts)),
            transversality: None,
            notes: vec![format!("subwords of w({}), {} symbols", self.i_max, self.word.len())],
        })
    }
}

/// One rung `S_n` of the gap-set ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderStep {
    pub gaps: Vec<usize>,
    pub entropy: f64,
    /// Exact dimension of `A_{S_n} ∩ (aN + b)`.
    pub dimension: f64,
    pub transversality: Transversality,
}

/// Exact dimensions of `A_{S_n} ∩ (aN + b)` for the prefixes `S_n` of `gaps`.
pub fn sgap_dimension_ladder(base: u32, gaps: &[usize], a: u64, b: u64) -> Result<Vec<LadderStep>> {
    if gaps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("gap set must be strictly ascending".into()));
    }
    (1..=gaps.len())
        .map(|n| {
            let spec = ShiftSpec::sgap(base, &gaps[..n])?;
            let h = entropy(&build_cover(&spec)?)?;
            let t = transversality_check(&spec, a, b)?;
            let dimension = match t.verdict {
                TransversalityVerdict::EqualDimension => h / f64::from(base).ln(),
                TransversalityVerdict::FiniteIntersection => 0.0,
            };
            Ok(LadderStep {
                gaps: gaps[..n].to_vec(),
                entropy: h,
                dimension,
                transversality: t,
            })
        })
        .collect()
}
