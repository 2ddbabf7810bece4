//! Analysis reports: verdicts, predicted limit tables, witnesses.

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::chain::MarkovCondition;
use crate::numeral::{ModulusVector, ResidueVector, Word};
use crate::shift::{CoverOrigin, ShiftSpec};

/// Version tag carried by every JSON document.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Uniform,
    SubgroupUniform,
    ZeroOrNonexistent,
    NotUniformWithWitness,
    /// The limit exists for every class but is neither uniform nor uniform on a subgroup.
    NonUniformLimit,
    Unsupported,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Uniform => "uniform",
            Verdict::SubgroupUniform => "subgroup-uniform",
            Verdict::ZeroOrNonexistent => "zero-or-nonexistent",
            Verdict::NotUniformWithWitness => "not-uniform-with-witness",
            Verdict::NonUniformLimit => "non-uniform-limit",
            Verdict::Unsupported => "unsupported",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    #[serde(rename = "thm-missing-digits")]
    MissingDigits,
    #[serde(rename = "prop-general")]
    GeneralPair,
    #[serde(rename = "thm-gelfond")]
    Gelfond,
    #[serde(rename = "thm-sft")]
    Sft,
    #[serde(rename = "chain-direct")]
    ChainDirect,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::MissingDigits => "thm-missing-digits",
            Method::GeneralPair => "prop-general",
            Method::Gelfond => "thm-gelfond",
            Method::Sft => "thm-sft",
            Method::ChainDirect => "chain-direct",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A predicted limit: an exact rational, or "does not exist".
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LimitValue {
    Value(BigRational),
    Dne,
}

impl LimitValue {
    pub fn value(&self) -> Option<&BigRational> {
        match self {
            LimitValue::Value(q) => Some(q),
            LimitValue::Dne => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, LimitValue::Value(q) if q.is_zero())
    }
}

impl fmt::Display for LimitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitValue::Value(q) => write!(f, "{}", rational_string(q)),
            LimitValue::Dne => f.write_str("DNE"),
        }
    }
}

/// `num/den`, with integers written as `n/1`.
pub fn rational_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn rational_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn ratio(n: u64, d: u64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Predicted limit per residue vector, in lexicographic residue order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitTable {
    moduli: ModulusVector,
    cells: Vec<LimitValue>,
}

impl LimitTable {
    pub fn new(moduli: ModulusVector, cells: Vec<LimitValue>) -> Self {
        assert_eq!(moduli.size(), cells.len(), "one cell per residue vector");
        LimitTable { moduli, cells }
    }

    pub fn constant(moduli: ModulusVector, value: BigRational) -> Self {
        let cells = vec![LimitValue::Value(value); moduli.size()];
        LimitTable { moduli, cells }
    }

    pub fn uniform(moduli: ModulusVector) -> Self {
        let n = moduli.size() as u64;
        Self::constant(moduli, ratio(1, n))
    }

    pub fn moduli(&self) -> &ModulusVector {
        &self.moduli
    }

    pub fn cells(&self) -> &[LimitValue] {
        &self.cells
    }

    pub fn get(&self, b: &ResidueVector) -> &LimitValue {
        &self.cells[self.moduli.index_of(&self.moduli.reduce(&b.0))]
    }

    pub fn get_index(&self, idx: usize) -> &LimitValue {
        &self.cells[idx]
    }

    /// Sum over cells with a value.
    pub fn total(&self) -> BigRational {
        self.cells.iter().filter_map(LimitValue::value).sum()
    }

    pub fn has_dne(&self) -> bool {
        self.cells.contains(&LimitValue::Dne)
    }

    /// Marginal on the first `r` components; `None` if a summed cell is DNE.
    pub fn project(&self, r: usize) -> Option<LimitTable> {
        let moduli = ModulusVector::new(self.moduli.as_slice()[..r].to_vec()).ok()?;
        let mut cells = vec![BigRational::zero(); moduli.size()];
        for (idx, c) in self.cells.iter().enumerate() {
            let b = self.moduli.residue_at(idx);
            let target = moduli.index_of(&ResidueVector(b.0[..r].to_vec()));
            cells[target] += c.value()?;
        }
        Some(LimitTable {
            moduli,
            cells: cells.into_iter().map(LimitValue::Value).collect(),
        })
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.cells
                .iter()
                .enumerate()
                .map(|(idx, c)| {
                    let b = self.moduli.residue_at(idx).0;
                    match c {
                        LimitValue::Value(q) => json!({
                            "residue": b,
                            "value": rational_string(q),
                            "float": rational_f64(q),
                        }),
                        LimitValue::Dne => json!({ "residue": b, "value": "DNE", "float": Value::Null }),
                    }
                })
                .collect(),
        )
    }
}

/// `<delta_a> x <delta_a'>` with `delta = gcd(aa', d_j - d_1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Subgroup {
    pub delta: u64,
    pub delta_a: u64,
    pub delta_a_sum: u64,
}

/// The coset carrying the length-`i` elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coset {
    pub i: usize,
    pub representative: ResidueVector,
}

/// A word or integer certifying a claim, with the residues it was checked against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub description: String,
    pub word: Option<Word>,
    pub integer: Option<BigUint>,
    pub residues: Option<ResidueVector>,
}

impl Witness {
    fn to_json(&self) -> Value {
        json!({
            "description": self.description,
            "word_lsb": self.word.as_ref().map(Word::to_lsb_string),
            "integer": self.integer.as_ref().map(ToString::to_string),
            "residues": self.residues.as_ref().map(|r| r.0.clone()),
        })
    }
}

/// Exhaustive search that closed without reaching its target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureCertificate {
    pub explored_states: usize,
    pub target: String,
}

/// Echo of the analyzed input.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportInputs {
    pub shift: Option<ShiftSpec>,
    pub base: u32,
    pub moduli: Vec<u64>,
    pub functions: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct AnalysisReport {
    pub inputs: ReportInputs,
    pub verdict: Verdict,
    pub method: Method,
    pub table: Option<LimitTable>,
    pub subgroup: Option<Subgroup>,
    pub cosets: Vec<Coset>,
    /// Limit along `i + np` for each `i` of one period, when these differ.
    pub per_i: Vec<(usize, LimitTable)>,
    pub witnesses: Vec<Witness>,
    pub certificate: Option<ClosureCertificate>,
    pub cover_origin: Option<CoverOrigin>,
    pub markov: Option<MarkovCondition>,
    /// Named side conditions and whether they hold.
    pub checks: Vec<(String, bool)>,
    pub notes: Vec<String>,
}

impl AnalysisReport {
    pub fn new(inputs: ReportInputs, verdict: Verdict, method: Method) -> Self {
        AnalysisReport {
            inputs,
            verdict,
            method,
            table: None,
            subgroup: None,
            cosets: Vec::new(),
            per_i: Vec::new(),
            witnesses: Vec::new(),
            certificate: None,
            cover_origin: None,
            markov: None,
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn unsupported(inputs: ReportInputs, method: Method, reason: impl Into<String>) -> Self {
        let mut r = Self::new(inputs, Verdict::Unsupported, method);
        r.notes.push(reason.into());
        r
    }

    pub fn to_json(&self) -> Value {
        let shift = self
            .inputs
            .shift
            .as_ref()
            .map(|s| serde_json::to_value(s).unwrap_or(Value::Null));
        json!({
            "schema": SCHEMA_VERSION,
            "inputs": {
                "shift": shift,
                "base": self.inputs.base,
                "moduli": self.inputs.moduli,
                "functions": self.inputs.functions,
            },
            "verdict": self.verdict.as_str(),
            "method": self.method.as_str(),
            "table": self.table.as_ref().map(LimitTable::to_json),
            "subgroup": self.subgroup,
            "cosets": self.cosets.iter().map(|c| json!({ "i": c.i, "representative": c.representative.0 })).collect::<Vec<_>>(),
            "per_i": self.per_i.iter().map(|(i, t)| json!({ "i": i, "table": t.to_json() })).collect::<Vec<_>>(),
            "witnesses": self.witnesses.iter().map(Witness::to_json).collect::<Vec<_>>(),
            "certificate": self.certificate,
            "cover_origin": self.cover_origin,
            "markov": self.markov,
            "checks": self.checks.iter().map(|(k, v)| json!({ "name": k, "holds": v })).collect::<Vec<_>>(),
            "notes": self.notes,
        })
    }
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.render(f, false)
    }
}

impl AnalysisReport {
    /// Text rendering; witness words most-significant-first when `msb`.
    pub fn render(&self, f: &mut impl fmt::Write, msb: bool) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict)?;
        writeln!(f, "method:  {}", self.method)?;
        if let Some(s) = &self.subgroup {
            writeln!(
                f,
                "delta = {} (delta_a = {}, delta_a' = {})",
                s.delta, s.delta_a, s.delta_a_sum
            )?;
        }
        if let Some(t) = &self.table {
            writeln!(f, "{:<16} {:>12} {:>10}", "residue", "limit", "float")?;
            for (idx, c) in t.cells().iter().enumerate() {
                let b = t.moduli().residue_at(idx);
                let float = c.value().map_or("-".to_string(), |q| format!("{:.6}", rational_f64(q)));
                writeln!(f, "{:<16} {:>12} {:>10}", b.to_string(), c.to_string(), float)?;
            }
        }
        for w in &self.witnesses {
            write!(f, "witness: {}", w.description)?;
            if let Some(word) = &w.word {
                if msb {
                    write!(f, " word(msb)={}", word.to_msb_string())?;
                } else {
                    write!(f, " word(lsb)={}", word.to_lsb_string())?;
                }
            }
            if let Some(n) = &w.integer {
                write!(f, " n={n}")?;
            }
            writeln!(f)?;
        }
        if let Some(c) = &self.certificate {
            writeln!(
                f,
                "certificate: closure of {} states never reaches {}",
                c.explored_states, c.target
            )?;
        }
        for (name, holds) in &self.checks {
            writeln!(f, "check: {name}: {}", if *holds { "holds" } else { "fails" })?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}
