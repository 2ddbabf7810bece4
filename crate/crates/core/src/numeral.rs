//! Base-g words, g-additive functions and the arithmetic quantities built on them.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported base; digits are stored as `u8`.
pub const MAX_BASE: u32 = 256;

/// Scan bound for eventual periods.
pub const PERIOD_SCAN_CAP: usize = 1_000_000;

pub(crate) fn check_base(g: u32) -> Result<()> {
    if !(2..=MAX_BASE).contains(&g) {
        return Err(Error::Domain(format!("base {g} outside [2, {MAX_BASE}]")));
    }
    Ok(())
}

/// A finite digit string over `{0, .., g-1}`; index 0 is the least significant digit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    base: u32,
    digits: Vec<u8>,
}

impl Word {
    pub fn new(base: u32, digits: Vec<u8>) -> Result<Self> {
        check_base(base)?;
        if let Some(d) = digits.iter().find(|&&d| u32::from(d) >= base) {
            return Err(Error::Domain(format!("digit {d} not below base {base}")));
        }
        Ok(Word { base, digits })
    }

    pub fn empty(base: u32) -> Self {
        Word {
            base,
            digits: Vec::new(),
        }
    }

    pub(crate) fn from_raw(base: u32, digits: Vec<u8>) -> Self {
        Word { base, digits }
    }

    /// Parses a least-significant-first digit string such as `"012"`.
    pub fn parse_lsb(base: u32, s: &str) -> Result<Self> {
        let digits = if s.contains('.') {
            s.split('.')
                .map(|t| t.parse::<u8>().map_err(|e| Error::Domain(e.to_string())))
                .collect::<Result<Vec<_>>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(36)
                        .map(|d| d as u8)
                        .ok_or_else(|| Error::Domain(format!("bad digit {c:?}")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        Word::new(base, digits)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn push(&mut self, d: u8) {
        assert!(u32::from(d) < self.base, "digit {d} not below base {}", self.base);
        self.digits.push(d);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut digits = self.digits.clone();
        digits.extend_from_slice(&other.digits);
        Word {
            base: self.base,
            digits,
        }
    }

    fn render<'a>(&self, it: impl Iterator<Item = &'a u8>) -> String {
        if self.base <= 36 {
            it.map(|&d| std::char::from_digit(u32::from(d), 36).unwrap()).collect()
        } else {
            it.map(|d| d.to_string()).collect::<Vec<_>>().join(".")
        }
    }

    /// Digits in storage order, least significant first.
    pub fn to_lsb_string(&self) -> String {
        self.render(self.digits.iter())
    }

    /// Conventional rendering, most significant digit first.
    pub fn to_msb_string(&self) -> String {
        self.render(self.digits.iter().rev())
    }

    /// Value as `u128` when it fits.
    pub fn value_u128(&self) -> Option<u128> {
        let g = u128::from(self.base);
        self.digits
            .iter()
            .rev()
            .try_fold(0u128, |acc, &d| acc.checked_mul(g)?.checked_add(u128::from(d)))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_lsb_string())
    }
}

/// `(w)_g = sum w_i g^i`.
pub fn word_to_integer(w: &Word) -> Result<BigUint> {
    if w.is_empty() {
        return Err(Error::Domain("the empty word does not represent an integer".into()));
    }
    let g = BigUint::from(w.base);
    Ok(w.digits
        .iter()
        .rev()
        .fold(BigUint::zero(), |acc, &d| acc * &g + BigUint::from(d)))
}

/// Canonical expansion without most-significant zeros; `0` maps to `[0]`.
pub fn integer_to_word(n: &BigUint, g: u32) -> Result<Word> {
    check_base(g)?;
    if n.is_zero() {
        return Ok(Word::from_raw(g, vec![0]));
    }
    let digits = n.to_radix_le(g).into_iter().collect();
    Ok(Word::from_raw(g, digits))
}

pub(crate) fn integer_to_word_u128(mut n: u128, g: u32) -> Word {
    if n == 0 {
        return Word::from_raw(g, vec![0]);
    }
    let mut digits = Vec::new();
    while n > 0 {
        digits.push((n % u128::from(g)) as u8);
        n /= u128::from(g);
    }
    Word::from_raw(g, digits)
}

pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = u128::from(m);
    let mut b = u128::from(base) % m128;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    acc as u64
}

pub fn totient(mut n: u64) -> u64 {
    let mut result = n;
    let mut q = 2u64;
    while q * q <= n {
        if n.is_multiple_of(q) {
            while n.is_multiple_of(q) {
                n /= q;
            }
            result -= result / q;
        }
        q += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// A vector of moduli `(a_1, .., a_r)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModulusVector(Vec<u64>);

/// A residue vector `(b_1, .., b_r)`, reduced componentwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResidueVector(pub Vec<u64>);

impl fmt::Display for ResidueVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Cap on `|a|` so state spaces stay addressable.
pub const MAX_RESIDUES: u64 = 1 << 24;

impl ModulusVector {
    pub fn new(moduli: Vec<u64>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::Domain("at least one modulus is required".into()));
        }
        if moduli.contains(&0) {
            return Err(Error::Domain("moduli must be >= 1".into()));
        }
        let size = moduli
            .iter()
            .try_fold(1u64, |acc, &a| acc.checked_mul(a))
            .filter(|&s| s <= MAX_RESIDUES)
            .ok_or_else(|| Error::Domain(format!("residue space too large (cap {MAX_RESIDUES})")))?;
        debug_assert!(size >= 1);
        Ok(ModulusVector(moduli))
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `|a| = a_1 ... a_r`.
    pub fn size(&self) -> usize {
        self.0.iter().product::<u64>() as usize
    }

    pub fn reduce(&self, values: &[u64]) -> ResidueVector {
        ResidueVector(self.0.iter().zip(values).map(|(&a, &v)| v % a).collect())
    }

    /// Lexicographic index with `b_1` most significant.
    pub fn index_of(&self, b: &ResidueVector) -> usize {
        self.0
            .iter()
            .zip(&b.0)
            .fold(0usize, |acc, (&a, &v)| acc * a as usize + (v % a) as usize)
    }

    pub fn residue_at(&self, mut idx: usize) -> ResidueVector {
        let mut out = vec![0u64; self.0.len()];
        for (slot, &a) in out.iter_mut().zip(&self.0).rev() {
            *slot = (idx % a as usize) as u64;
            idx /= a as usize;
        }
        ResidueVector(out)
    }

    pub fn all(&self) -> impl Iterator<Item = ResidueVector> + '_ {
        (0..self.size()).map(|i| self.residue_at(i))
    }

    pub fn add(&self, x: &ResidueVector, y: &ResidueVector) -> ResidueVector {
        ResidueVector(
            self.0
                .iter()
                .zip(x.0.iter().zip(&y.0))
                .map(|(&a, (&u, &v))| (u + v) % a)
                .collect(),
        )
    }

    pub fn sub(&self, x: &ResidueVector, y: &ResidueVector) -> ResidueVector {
        ResidueVector(
            self.0
                .iter()
                .zip(x.0.iter().zip(&y.0))
                .map(|(&a, (&u, &v))| (u + a - v % a) % a)
                .collect(),
        )
    }

    pub fn add_index(&self, x: usize, y: usize) -> usize {
        self.index_of(&self.add(&self.residue_at(x), &self.residue_at(y)))
    }

    pub fn sub_index(&self, x: usize, y: usize) -> usize {
        self.index_of(&self.sub(&self.residue_at(x), &self.residue_at(y)))
    }
}

/// Precomputed addition on residue indices.
#[derive(Clone, Debug)]
pub(crate) struct ResidueAdder {
    moduli: ModulusVector,
    table: Option<Vec<u32>>,
}

impl ResidueAdder {
    const TABLE_LIMIT: usize = 2048;

    pub(crate) fn new(moduli: &ModulusVector) -> Self {
        let n = moduli.size();
        let table = (n <= Self::TABLE_LIMIT).then(|| {
            let mut t = vec![0u32; n * n];
            for x in 0..n {
                for y in 0..n {
                    t[x * n + y] = moduli.add_index(x, y) as u32;
                }
            }
            t
        });
        ResidueAdder {
            moduli: moduli.clone(),
            table,
        }
    }

    #[inline]
    pub(crate) fn add(&self, x: usize, y: usize) -> usize {
        match &self.table {
            Some(t) => t[x * self.moduli.size() + y] as usize,
            None => self.moduli.add_index(x, y),
        }
    }
}

/// Eventual period `(p, ell)`: `f(d g^{i+np}) = f(d g^i)` for `i >= ell`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventualPeriod {
    pub p: usize,
    pub ell: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Rule {
    Identity,
    DigitSum,
    /// `values[i][d]` for `i < ell + p`.
    Table {
        ell: usize,
        p: usize,
        values: Vec<Vec<u64>>,
    },
}

/// A g-additive function reduced modulo `a`, described by `d, i -> f(d g^i) mod a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GAdditiveFunction {
    base: u32,
    modulus: u64,
    rule: Rule,
}

/// On-disk form of a g-additive function.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionFile {
    pub base: u32,
    pub modulus: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<[u64; 3]>>,
}

impl GAdditiveFunction {
    fn checked(base: u32, modulus: u64, rule: Rule) -> Result<Self> {
        check_base(base)?;
        if modulus == 0 {
            return Err(Error::Domain("modulus must be >= 1".into()));
        }
        Ok(GAdditiveFunction { base, modulus, rule })
    }

    /// `n -> n mod a`.
    pub fn identity(base: u32, modulus: u64) -> Result<Self> {
        Self::checked(base, modulus, Rule::Identity)
    }

    /// Sum of base-g digits mod `a`.
    pub fn digit_sum(base: u32, modulus: u64) -> Result<Self> {
        Self::checked(base, modulus, Rule::DigitSum)
    }

    /// Built-in by name: `"id"` or `"sum_digits"`.
    pub fn builtin(name: &str, base: u32, modulus: u64) -> Result<Self> {
        match name {
            "id" => Self::identity(base, modulus),
            "sum_digits" => Self::digit_sum(base, modulus),
            other => Err(Error::InvalidSpec(format!("unknown built-in function {other:?}"))),
        }
    }

    /// Table of `(d, i, f(d g^i))` for `i < ell + p`, extended periodically beyond.
    pub fn from_table(base: u32, modulus: u64, ell: usize, p: usize, entries: &[(u32, usize, u64)]) -> Result<Self> {
        check_base(base)?;
        if modulus == 0 || p == 0 {
            return Err(Error::InvalidSpec("modulus and p must be >= 1".into()));
        }
        let span = ell + p;
        let mut values: Vec<Vec<Option<u64>>> = vec![vec![None; base as usize]; span];
        for row in values.iter_mut() {
            row[0] = Some(0);
        }
        let mut late = Vec::new();
        for &(d, i, v) in entries {
            if d >= base {
                return Err(Error::InvalidSpec(format!("digit {d} not below base {base}")));
            }
            let v = v % modulus;
            if d == 0 && v != 0 {
                return Err(Error::InvalidSpec("f(0) must vanish".into()));
            }
            if i >= span {
                late.push((d, i, v));
                continue;
            }
            match values[i][d as usize] {
                Some(old) if old != v && d != 0 => {
                    return Err(Error::InvalidSpec(format!("conflicting entries for d={d}, i={i}")))
                }
                _ => values[i][d as usize] = Some(v),
            }
        }
        let values: Vec<Vec<u64>> = values
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(d, v)| v.ok_or_else(|| Error::InvalidSpec(format!("missing entry d={d}, i={i}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let f = Self::checked(base, modulus, Rule::Table { ell, p, values })?;
        for (d, i, v) in late {
            if f.value(d, i as u64) != v {
                return Err(Error::InvalidSpec(format!(
                    "entry d={d}, i={i} contradicts the declared period"
                )));
            }
        }
        Ok(f)
    }

    pub fn from_file(file: &FunctionFile) -> Result<Self> {
        match (&file.name, &file.table) {
            (Some(name), None) => Self::builtin(name, file.base, file.modulus),
            (None, Some(table)) => {
                let ell = file.ell.unwrap_or(0);
                let p = file
                    .p
                    .ok_or_else(|| Error::InvalidSpec("table functions need \"p\"".into()))?;
                let entries: Vec<(u32, usize, u64)> = table
                    .iter()
                    .map(|&[d, i, v]| {
                        let d = u32::try_from(d).map_err(|_| Error::InvalidSpec(format!("digit {d} too large")))?;
                        Ok((d, i as usize, v))
                    })
                    .collect::<Result<_>>()?;
                Self::from_table(file.base, file.modulus, ell, p, &entries)
            }
            _ => Err(Error::InvalidSpec(
                "function file needs exactly one of \"name\" or \"table\"".into(),
            )),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: FunctionFile = serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn name(&self) -> &'static str {
        match self.rule {
            Rule::Identity => "id",
            Rule::DigitSum => "sum_digits",
            Rule::Table { .. } => "table",
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rule == Rule::Identity
    }

    /// `f(d g^i) mod a`.
    pub fn value(&self, d: u32, i: u64) -> u64 {
        let a = self.modulus;
        match &self.rule {
            Rule::Identity => {
                let pw = pow_mod(u64::from(self.base), i, a);
                ((u128::from(d) * u128::from(pw)) % u128::from(a)) as u64
            }
            Rule::DigitSum => u64::from(d) % a,
            Rule::Table { ell, p, values } => {
                let (ell, p) = (*ell as u64, *p as u64);
                let j = if i < ell + p { i } else { ell + (i - ell) % p };
                values[j as usize][d as usize]
            }
        }
    }

    fn digit_images(&self, i: u64) -> Vec<u64> {
        (0..self.base).map(|d| self.value(d, i)).collect()
    }

    /// Least `(ell, p)` for this component alone.
    fn minimal_period(&self) -> Result<EventualPeriod> {
        match &self.rule {
            Rule::DigitSum => Ok(EventualPeriod { p: 1, ell: 0 }),
            Rule::Identity => {
                let a = self.modulus;
                let mut seen: HashMap<u64, usize> = HashMap::new();
                let mut x = 1 % a;
                for j in 0..=PERIOD_SCAN_CAP {
                    if let Some(&j0) = seen.get(&x) {
                        return Ok(EventualPeriod { p: j - j0, ell: j0 });
                    }
                    seen.insert(x, j);
                    x = ((u128::from(x) * u128::from(self.base)) % u128::from(a)) as u64;
                }
                Err(Error::Bound("eventual period scan exceeded".into()))
            }
            Rule::Table { ell, p, .. } => {
                let (ell, p) = (*ell, *p);
                let seq: Vec<Vec<u64>> = (0..ell + 2 * p).map(|i| self.digit_images(i as u64)).collect();
                let q = (1..=p)
                    .filter(|q| p % q == 0)
                    .find(|&q| (ell..ell + p).all(|i| seq[i + q] == seq[i]))
                    .unwrap_or(p);
                let mut start = ell;
                while start > 0 && seq[start - 1 + q] == seq[start - 1] {
                    start -= 1;
                }
                Ok(EventualPeriod { p: q, ell: start })
            }
        }
    }
}

/// A tuple `f = (f_1, .., f_r)` of g-additive functions over one base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GAdditiveFamily {
    base: u32,
    functions: Vec<GAdditiveFunction>,
    moduli: ModulusVector,
}

impl GAdditiveFamily {
    pub fn new(functions: Vec<GAdditiveFunction>) -> Result<Self> {
        let base = functions
            .first()
            .ok_or_else(|| Error::Domain("a family needs at least one function".into()))?
            .base;
        if functions.iter().any(|f| f.base != base) {
            return Err(Error::Domain("all functions must share one base".into()));
        }
        let moduli = ModulusVector::new(functions.iter().map(|f| f.modulus).collect())?;
        Ok(GAdditiveFamily {
            base,
            functions,
            moduli,
        })
    }

    /// `(id mod a)`.
    pub fn identity(base: u32, a: u64) -> Result<Self> {
        Self::new(vec![GAdditiveFunction::identity(base, a)?])
    }

    /// `(id mod a, S_g mod a')`.
    pub fn id_sum(base: u32, a: u64, a_sum: u64) -> Result<Self> {
        Self::new(vec![
            GAdditiveFunction::identity(base, a)?,
            GAdditiveFunction::digit_sum(base, a_sum)?,
        ])
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn functions(&self) -> &[GAdditiveFunction] {
        &self.functions
    }

    pub fn moduli(&self) -> &ModulusVector {
        &self.moduli
    }

    pub fn names(&self) -> Vec<String> {
        self.functions.iter().map(|f| f.name().to_string()).collect()
    }

    /// `f(d g^i) mod a`, componentwise.
    pub fn value(&self, d: u32, i: u64) -> ResidueVector {
        ResidueVector(self.functions.iter().map(|f| f.value(d, i)).collect())
    }

    /// Residue index increments `inc[d]` for digit position `i`.
    pub(crate) fn increments(&self, i: u64) -> Vec<usize> {
        (0..self.base)
            .map(|d| self.moduli.index_of(&self.value(d, i)))
            .collect()
    }

    /// `f((w)_g)` for `w` placed at digit offset `offset`, i.e. `f(g^offset (w)_g)`.
    pub fn eval_at(&self, w: &Word, offset: u64) -> ResidueVector {
        let mut acc = vec![0u64; self.functions.len()];
        for (j, &d) in w.digits().iter().enumerate() {
            for (slot, f) in acc.iter_mut().zip(&self.functions) {
                *slot = (*slot + f.value(u32::from(d), offset + j as u64)) % f.modulus;
            }
        }
        ResidueVector(acc)
    }

    /// Eventual period check over one window: valid iff `f(d g^{i+p}) = f(d g^i)` on `[ell, ell+p)`.
    pub fn is_eventual_period(&self, period: EventualPeriod) -> bool {
        if period.p == 0 {
            return false;
        }
        let (ell, p) = (period.ell as u64, period.p as u64);
        (ell..ell + p).all(|i| (0..self.base).all(|d| self.value(d, i + p) == self.value(d, i)))
    }
}

/// `f((w)_g) mod a`, componentwise.
pub fn eval_family(fam: &GAdditiveFamily, w: &Word) -> Result<ResidueVector> {
    if w.base() != fam.base() {
        return Err(Error::Domain(format!(
            "word base {} differs from family base {}",
            w.base(),
            fam.base()
        )));
    }
    Ok(fam.eval_at(w, 0))
}

/// Least eventual period `(ell, p)` of the whole family.
pub fn find_eventual_period(fam: &GAdditiveFamily) -> Result<EventualPeriod> {
    let mut ell = 0usize;
    let mut p = 1usize;
    for f in fam.functions() {
        let part = f.minimal_period()?;
        ell = ell.max(part.ell);
        p = p.lcm(&part.p);
        if p > PERIOD_SCAN_CAP || ell > PERIOD_SCAN_CAP {
            return Err(Error::Bound(format!("eventual period exceeds {PERIOD_SCAN_CAP}")));
        }
    }
    let period = EventualPeriod { p, ell };
    if !fam.is_eventual_period(period) {
        return Err(Error::Domain("eventual period verification failed".into()));
    }
    Ok(period)
}

/// `a' * phi(a (g - 1))`.
pub fn euler_period(g: u32, a: u64, a_sum: u64) -> Result<u64> {
    check_base(g)?;
    if a == 0 || a_sum == 0 {
        return Err(Error::Domain("moduli must be >= 1".into()));
    }
    if u64::from(g).gcd(&a) != 1 {
        return Err(Error::Precondition(format!("gcd({g}, {a}) != 1")));
    }
    let m = a
        .checked_mul(u64::from(g) - 1)
        .ok_or_else(|| Error::Domain("modulus overflow".into()))?;
    a_sum
        .checked_mul(totient(m))
        .ok_or_else(|| Error::Domain("period overflow".into()))
}

/// `gcd(aa', d_2 - d_1, .., d_t - d_1)` for strictly increasing digits.
pub fn delta_gcd(aa: u64, digits: &[u32]) -> Result<u64> {
    if digits.len() < 2 {
        return Err(Error::Precondition("at least two digits are required".into()));
    }
    if digits.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("digits must be strictly increasing".into()));
    }
    let d1 = u64::from(digits[0]);
    Ok(digits[1..].iter().fold(aa, |acc, &d| acc.gcd(&(u64::from(d) - d1))))
}

pub(crate) fn biguint_to_f64(n: &BigUint) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY)
}

/// Natural log of a positive big integer without overflow.
pub(crate) fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return biguint_to_f64(n).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}
