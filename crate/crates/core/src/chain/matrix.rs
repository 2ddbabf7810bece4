//! Exact nonnegative matrices and distributions over a common denominator.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest exponent accepted by [`RationalMatrix::pow`].
pub const MAX_POWER: u64 = 1 << 16;

fn ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(num.clone().into(), den.clone().into())
}

/// Square matrix of nonnegative integers, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountMatrix {
    n: usize,
    entries: Vec<BigUint>,
}

impl CountMatrix {
    pub fn new(n: usize, entries: Vec<BigUint>) -> Self {
        assert_eq!(entries.len(), n * n, "entry count must be n^2");
        CountMatrix { n, entries }
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![BigUint::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = BigUint::one();
        }
        CountMatrix { n, entries }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> &BigUint {
        &self.entries[r * self.n + c]
    }

    pub fn row(&self, r: usize) -> &[BigUint] {
        &self.entries[r * self.n..(r + 1) * self.n]
    }

    pub fn row_sum(&self, r: usize) -> BigUint {
        self.row(r).iter().sum()
    }

    pub fn col_sum(&self, c: usize) -> BigUint {
        (0..self.n).map(|r| self.get(r, c)).sum()
    }

    pub fn mul(&self, other: &CountMatrix) -> CountMatrix {
        let n = self.n;
        let mut out = vec![BigUint::zero(); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..n {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        out[r * n + c] += a * b;
                    }
                }
            }
        }
        CountMatrix { n, entries: out }
    }

    pub fn pow(&self, mut e: u64) -> CountMatrix {
        let mut acc = CountMatrix::identity(self.n);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Row vector times matrix.
    pub fn left_mul(&self, v: &[BigUint]) -> Vec<BigUint> {
        let mut out = vec![BigUint::zero(); self.n];
        for (r, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (c, a) in self.row(r).iter().enumerate() {
                if !a.is_zero() {
                    out[c] += x * a;
                }
            }
        }
        out
    }

    /// Positive-entry adjacency lists.
    pub fn support(&self) -> Vec<Vec<usize>> {
        (0..self.n)
            .map(|r| (0..self.n).filter(|&c| !self.get(r, c).is_zero()).collect())
            .collect()
    }

    /// Principal submatrix on `states` (in that order).
    pub fn restrict(&self, states: &[usize]) -> CountMatrix {
        let entries = states
            .iter()
            .flat_map(|&r| states.iter().map(move |&c| self.get(r, c).clone()))
            .collect();
        CountMatrix {
            n: states.len(),
            entries,
        }
    }
}

/// Matrix of rationals `numer / denom` sharing one denominator.
#[derive(Clone, Debug)]
pub struct RationalMatrix {
    numer: CountMatrix,
    denom: BigUint,
}

impl PartialEq for RationalMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.numer.n == other.numer.n
            && self
                .numer
                .entries
                .iter()
                .zip(&other.numer.entries)
                .all(|(a, b)| a * &other.denom == b * &self.denom)
    }
}

impl RationalMatrix {
    pub fn new(numer: CountMatrix, denom: BigUint) -> Self {
        assert!(!denom.is_zero(), "denominator must be positive");
        RationalMatrix { numer, denom }
    }

    pub fn size(&self) -> usize {
        self.numer.n
    }

    pub fn numerators(&self) -> &CountMatrix {
        &self.numer
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denom
    }

    pub fn get(&self, r: usize, c: usize) -> BigRational {
        ratio(self.numer.get(r, c), &self.denom)
    }

    pub fn get_f64(&self, r: usize, c: usize) -> f64 {
        crate::numeral::biguint_to_f64(self.numer.get(r, c)) / crate::numeral::biguint_to_f64(&self.denom)
    }

    /// Every row and column sums to exactly 1.
    pub fn is_doubly_stochastic(&self) -> bool {
        (0..self.size()).all(|i| self.numer.row_sum(i) == self.denom && self.numer.col_sum(i) == self.denom)
    }

    pub fn is_stochastic(&self) -> bool {
        (0..self.size()).all(|i| self.numer.row_sum(i) == self.denom)
    }

    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        RationalMatrix {
            numer: self.numer.mul(&other.numer),
            denom: &self.denom * &other.denom,
        }
    }

    /// Exact power by repeated squaring.
    pub fn pow(&self, e: u64) -> Result<RationalMatrix> {
        if e > MAX_POWER {
            return Err(Error::Bound(format!("matrix exponent {e} exceeds {MAX_POWER}")));
        }
        Ok(RationalMatrix {
            numer: self.numer.pow(e),
            denom: self.denom.pow(e as u32),
        })
    }

    pub fn support(&self) -> Vec<Vec<usize>> {
        self.numer.support()
    }

    pub fn restrict(&self, states: &[usize]) -> RationalMatrix {
        RationalMatrix {
            numer: self.numer.restrict(states),
            denom: self.denom.clone(),
        }
    }

    /// CSV with a header row of state labels and `num/den` cells.
    pub fn to_csv(&self, labels: &[String]) -> String {
        let quote = |s: &str| format!("\"{}\"", s.replace('"', "\"\""));
        let mut out = String::from("state");
        for l in labels {
            out.push(',');
            out.push_str(&quote(l));
        }
        out.push('\n');
        for (r, l) in labels.iter().enumerate() {
            out.push_str(&quote(l));
            for c in 0..self.size() {
                let q = self.get(r, c);
                out.push_str(&format!(",{}/{}", q.numer(), q.denom()));
            }
            out.push('\n');
        }
        out
    }
}

/// Probability vector `numer / denom` over a state space.
#[derive(Clone, Debug)]
pub struct RationalDistribution {
    numer: Vec<BigUint>,
    denom: BigUint,
}

impl PartialEq for RationalDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.numer.len() == other.numer.len()
            && self
                .numer
                .iter()
                .zip(&other.numer)
                .all(|(a, b)| a * &other.denom == b * &self.denom)
    }
}

impl RationalDistribution {
    /// Normalizes counts by their total.
    pub fn from_counts(counts: Vec<BigUint>) -> Result<Self> {
        let denom: BigUint = counts.iter().sum();
        if denom.is_zero() {
            return Err(Error::Precondition("distribution with zero total mass".into()));
        }
        Ok(RationalDistribution { numer: counts, denom })
    }

    pub fn len(&self) -> usize {
        self.numer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numer.is_empty()
    }

    pub fn get(&self, i: usize) -> BigRational {
        ratio(&self.numer[i], &self.denom)
    }

    pub fn values(&self) -> Vec<BigRational> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        let d = crate::numeral::biguint_to_f64(&self.denom);
        self.numer
            .iter()
            .map(|x| crate::numeral::biguint_to_f64(x) / d)
            .collect()
    }

    pub fn numerators(&self) -> &[BigUint] {
        &self.numer
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denom
    }

    /// Total mass is exactly 1.
    pub fn is_normalized(&self) -> bool {
        self.numer.iter().sum::<BigUint>() == self.denom
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.numer[i].is_zero()).collect()
    }

    pub fn mass(&self, states: &[usize]) -> BigRational {
        let s: BigUint = states.iter().map(|&i| &self.numer[i]).sum();
        ratio(&s, &self.denom)
    }

    /// Conditional distribution on `states` (in that order).
    pub fn restrict(&self, states: &[usize]) -> Result<Self> {
        Self::from_counts(states.iter().map(|&i| self.numer[i].clone()).collect())
    }

    pub fn mul_matrix(&self, m: &RationalMatrix) -> RationalDistribution {
        RationalDistribution {
            numer: m.numer.left_mul(&self.numer),
            denom: &self.denom * &m.denom,
        }
    }
}
