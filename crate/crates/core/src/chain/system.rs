//! Extension sets, transition matrices and initial distributions.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::chain::matrix::{CountMatrix, RationalDistribution, RationalMatrix};
use crate::error::{Error, Result};
use crate::numeral::{
    find_eventual_period, EventualPeriod, GAdditiveFamily, ModulusVector, ResidueAdder, ResidueVector, Word,
};
use crate::shift::{FischerCover, Regularity};

/// Largest state space for which matrices are materialized.
pub const MAX_STATES: usize = 4096;

/// `Z_a x V`, residues lexicographic (first component most significant), then nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSpace {
    moduli: ModulusVector,
    nodes: Vec<String>,
}

impl StateSpace {
    pub fn new(moduli: ModulusVector, nodes: Vec<String>) -> Self {
        StateSpace { moduli, nodes }
    }

    pub fn size(&self) -> usize {
        self.moduli.size() * self.nodes.len()
    }

    pub fn moduli(&self) -> &ModulusVector {
        &self.moduli
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn index(&self, residue: usize, node: usize) -> usize {
        residue * self.nodes.len() + node
    }

    /// `(residue index, node)` of a state.
    pub fn split(&self, state: usize) -> (usize, usize) {
        (state / self.nodes.len(), state % self.nodes.len())
    }

    pub fn residue(&self, state: usize) -> ResidueVector {
        self.moduli.residue_at(self.split(state).0)
    }

    /// `(b1,..,br|node)`.
    pub fn label(&self, state: usize) -> String {
        let (r, v) = self.split(state);
        let b: Vec<String> = self.moduli.residue_at(r).0.iter().map(u64::to_string).collect();
        format!("({}|{})", b.join(","), self.nodes[v])
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.size()).map(|s| self.label(s)).collect()
    }
}

/// Overrides for [`ChainSystem::build`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ChainOptions {
    /// Eventual period to use instead of the least one (must be valid).
    pub period: Option<EventualPeriod>,
    /// Prefix length of the restricted language.
    pub ell: Option<usize>,
}

/// `|E_i(b, F, F')|` indexed by `(F, F', b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionCounts {
    nodes: usize,
    residues: usize,
    counts: Vec<BigUint>,
}

impl ExtensionCounts {
    pub fn get(&self, b: usize, from: usize, to: usize) -> &BigUint {
        &self.counts[(from * self.nodes + to) * self.residues + b]
    }

    /// Number of length-p words leaving `from`.
    pub fn out_total(&self, from: usize) -> BigUint {
        let lo = from * self.nodes * self.residues;
        self.counts[lo..lo + self.nodes * self.residues].iter().sum()
    }
}

/// The chains `X^i` of a regular Fischer cover and a g-additive family.
#[derive(Clone, Debug)]
pub struct ChainSystem {
    family: GAdditiveFamily,
    period: EventualPeriod,
    ell: usize,
    start: usize,
    cover: FischerCover,
    k: usize,
    space: StateSpace,
    adder: ResidueAdder,
    matrices: Vec<RationalMatrix>,
}

impl ChainSystem {
    pub fn build(cover: FischerCover, family: GAdditiveFamily, options: ChainOptions) -> Result<Self> {
        if cover.base() != family.base() {
            return Err(Error::Domain(format!(
                "cover base {} differs from family base {}",
                cover.base(),
                family.base()
            )));
        }
        let k = match cover.regularity() {
            Regularity::Regular(k) => k,
            Regularity::Irregular => return Err(Error::Irregular),
        };
        let period = match options.period {
            Some(p) if family.is_eventual_period(p) => p,
            Some(p) => return Err(Error::Domain(format!("({}, {}) is not an eventual period", p.p, p.ell))),
            None => find_eventual_period(&family)?,
        };
        let sync = cover.shortest_synchronizing_length()?;
        let ell = match options.ell {
            Some(ell) => {
                if ell == 0 || cover.prefix_class_counts(ell).iter().all(Zero::is_zero) {
                    return Err(Error::Precondition(format!(
                        "ell = {ell} admits no synchronizing prefix; shortest synchronizing length is {sync}"
                    )));
                }
                ell
            }
            None => period.ell.max(sync).max(1),
        };
        let space = StateSpace::new(family.moduli().clone(), cover.cover().names().to_vec());
        if space.size() > MAX_STATES {
            return Err(Error::Bound(format!(
                "state space of {} exceeds {MAX_STATES}",
                space.size()
            )));
        }
        let adder = ResidueAdder::new(family.moduli());
        let start = ell.max(period.ell);
        let mut sys = ChainSystem {
            family,
            period,
            ell,
            start,
            cover,
            k,
            space,
            adder,
            matrices: Vec::new(),
        };
        let matrices = (start..start + period.p)
            .map(|i| sys.compute_matrix(i))
            .collect::<Result<Vec<_>>>()?;
        sys.matrices = matrices;
        Ok(sys)
    }

    pub fn family(&self) -> &GAdditiveFamily {
        &self.family
    }

    pub fn cover(&self) -> &FischerCover {
        &self.cover
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn period(&self) -> EventualPeriod {
        self.period
    }

    pub fn p(&self) -> usize {
        self.period.p
    }

    /// Prefix length of the restricted language.
    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Indices whose matrices are stored: one full period.
    pub fn stored_range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.period.p
    }

    /// Representative of `i` in the stored range, when `i` lies at or beyond it.
    pub fn canonical_index(&self, i: usize) -> Option<usize> {
        (i >= self.start).then(|| self.start + (i - self.start) % self.period.p)
    }

    pub fn extension_counts(&self, i: usize) -> ExtensionCounts {
        let n = self.space.node_count();
        let r = self.space.moduli().size();
        let base = self.cover.cover();
        let incs: Vec<Vec<usize>> = (0..self.period.p)
            .map(|j| self.family.increments((i + j) as u64))
            .collect();
        let mut counts = vec![BigUint::zero(); n * n * r];
        for from in 0..n {
            let mut layer: HashMap<(usize, usize), BigUint> = HashMap::from([((from, 0), BigUint::one())]);
            for inc in &incs {
                let mut next: HashMap<(usize, usize), BigUint> = HashMap::new();
                for (&(v, b), c) in &layer {
                    for e in base.out_edges(v) {
                        let nb = self.adder.add(b, inc[e.label as usize]);
                        *next.entry((e.to, nb)).or_insert_with(BigUint::zero) += c;
                    }
                }
                layer = next;
            }
            for ((to, b), c) in layer {
                counts[(from * n + to) * r + b] = c;
            }
        }
        ExtensionCounts {
            nodes: n,
            residues: r,
            counts,
        }
    }

    /// `E_i(b, F, F')` in lexicographic order.
    pub fn extension_set(&self, i: usize, b: &ResidueVector, from: usize, to: usize) -> Result<Vec<Word>> {
        let n = self.space.node_count();
        if from >= n || to >= n {
            return Err(Error::Domain("node out of range".into()));
        }
        let target = self.space.moduli().index_of(&self.space.moduli().reduce(&b.0));
        let incs: Vec<Vec<usize>> = (0..self.period.p)
            .map(|j| self.family.increments((i + j) as u64))
            .collect();
        let mut out = Vec::new();
        let mut buf = Vec::with_capacity(self.period.p);
        self.ext_dfs(from, 0, &incs, to, target, &mut buf, &mut out);
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn ext_dfs(
        &self,
        v: usize,
        b: usize,
        incs: &[Vec<usize>],
        to: usize,
        target: usize,
        buf: &mut Vec<u8>,
        out: &mut Vec<Word>,
    ) {
        let j = buf.len();
        if j == incs.len() {
            if v == to && b == target {
                out.push(Word::from_raw(self.family.base(), buf.clone()));
            }
            return;
        }
        for e in self.cover.cover().out_edges(v) {
            buf.push(e.label);
            self.ext_dfs(
                e.to,
                self.adder.add(b, incs[j][e.label as usize]),
                incs,
                to,
                target,
                buf,
                out,
            );
            buf.pop();
        }
    }

    fn compute_count_matrix(&self, i: usize) -> CountMatrix {
        let ext = self.extension_counts(i);
        let n = self.space.node_count();
        let moduli = self.space.moduli();
        let size = self.space.size();
        let mut entries = vec![BigUint::zero(); size * size];
        for b in 0..moduli.size() {
            for b2 in 0..moduli.size() {
                let diff = moduli.sub_index(b2, b);
                for f in 0..n {
                    for f2 in 0..n {
                        let c = ext.get(diff, f, f2);
                        if !c.is_zero() {
                            entries[self.space.index(b, f) * size + self.space.index(b2, f2)] = c.clone();
                        }
                    }
                }
            }
        }
        CountMatrix::new(size, entries)
    }

    fn compute_matrix(&self, i: usize) -> Result<RationalMatrix> {
        let m = RationalMatrix::new(
            self.compute_count_matrix(i),
            BigUint::from(self.k).pow(self.period.p as u32),
        );
        if !m.is_doubly_stochastic() {
            return Err(Error::Precondition(format!("M_{i} is not doubly stochastic")));
        }
        Ok(m)
    }

    /// `k^p M_i`: the unnormalized E-set counts arranged over the state space.
    pub fn count_matrix(&self, i: usize) -> CountMatrix {
        match self.canonical_index(i) {
            Some(c) => self.matrices[c - self.start].numerators().clone(),
            None => self.compute_count_matrix(i),
        }
    }

    pub fn transition_matrix(&self, i: usize) -> Result<RationalMatrix> {
        match self.canonical_index(i) {
            Some(c) => Ok(self.matrices[c - self.start].clone()),
            None => self.compute_matrix(i),
        }
    }

    /// Matrix stored for `i`, which must lie in [`Self::stored_range`] or beyond.
    pub(crate) fn stored_matrix(&self, i: usize) -> Option<&RationalMatrix> {
        self.canonical_index(i).map(|c| &self.matrices[c - self.start])
    }

    /// Counts of `w` in `L^i_{V,ell}` by state `(f((w)_g), F(w))`.
    pub fn initial_counts(&self, i: usize) -> Result<Vec<BigUint>> {
        if i < self.ell {
            return Err(Error::Precondition(format!("i = {i} below ell = {}", self.ell)));
        }
        let aut = self.cover.automaton();
        let r = self.space.moduli().size();
        let n = self.space.node_count();
        let mut layer: HashMap<(usize, usize), BigUint> =
            HashMap::from([((self.cover.all_state(), 0), BigUint::one())]);
        for j in 0..self.ell {
            let inc = self.family.increments(j as u64);
            let mut next: HashMap<(usize, usize), BigUint> = HashMap::new();
            for (&(s, b), c) in &layer {
                for (d, t) in aut.transitions(s) {
                    *next
                        .entry((t, self.adder.add(b, inc[d as usize])))
                        .or_insert_with(BigUint::zero) += c;
                }
            }
            layer = next;
        }
        let mut counts = vec![BigUint::zero(); r * n];
        for ((s, b), c) in layer {
            if let Some(v) = self.cover.classify(s) {
                counts[b * n + v] += c;
            }
        }
        if counts.iter().all(Zero::is_zero) {
            return Err(Error::Precondition("restricted language is empty".into()));
        }
        let base = self.cover.cover();
        for j in self.ell..i {
            let inc = self.family.increments(j as u64);
            let mut next = vec![BigUint::zero(); r * n];
            for (state, c) in counts.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let (b, v) = (state / n, state % n);
                for e in base.out_edges(v) {
                    next[self.adder.add(b, inc[e.label as usize]) * n + e.to] += c;
                }
            }
            counts = next;
        }
        Ok(counts)
    }

    /// `mu_i`.
    pub fn initial_distribution(&self, i: usize) -> Result<RationalDistribution> {
        RationalDistribution::from_counts(self.initial_counts(i)?)
    }

    /// `mu_i M_i^n`.
    pub fn evolve(&self, i: usize, n: u64) -> Result<RationalDistribution> {
        let mu = self.initial_distribution(i)?;
        if n == 0 {
            return Ok(mu);
        }
        Ok(mu.mul_matrix(&self.transition_matrix(i)?.pow(n)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::{chain_cover, ShiftSpec};
    use num_rational::BigRational;

    fn system(spec: &ShiftSpec, fam: GAdditiveFamily) -> ChainSystem {
        ChainSystem::build(chain_cover(spec).unwrap(), fam, ChainOptions::default()).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn binary_full_shift_base_three() {
        let sys = system(
            &ShiftSpec::full(3, &[0, 1]).unwrap(),
            GAdditiveFamily::identity(3, 2).unwrap(),
        );
        let p = EventualPeriod { p: 2, ell: 0 };
        let sys2 = ChainSystem::build(
            sys.cover().clone(),
            sys.family().clone(),
            ChainOptions {
                period: Some(p),
                ell: None,
            },
        )
        .unwrap();
        let words = |b: u64| -> Vec<String> {
            sys2.extension_set(1, &ResidueVector(vec![b]), 0, 0)
                .unwrap()
                .iter()
                .map(Word::to_lsb_string)
                .collect()
        };
        assert_eq!(words(0), vec!["00", "11"]);
        assert_eq!(words(1), vec!["01", "10"]);
        let m = sys2.transition_matrix(1).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert_eq!(m.get(r, c), q(1, 2));
            }
        }
        let evolved = sys2.evolve(1, 1).unwrap();
        assert_eq!(evolved.values(), vec![q(1, 2), q(1, 2)]);
        assert_eq!(sys2.evolve(1, 0).unwrap(), sys2.initial_distribution(1).unwrap());
    }

    #[test]
    fn trivial_modulus() {
        let sys = system(&ShiftSpec::even_shift(), GAdditiveFamily::identity(3, 1).unwrap());
        let ext = sys.extension_counts(1);
        let paths = sys.cover().path_counts(sys.p());
        for (f, want) in paths.iter().enumerate().take(2) {
            let total: BigUint = (0..2).map(|f2| ext.get(0, f, f2).clone()).sum();
            assert_eq!(&total, want);
        }
        let mu = sys.initial_distribution(3).unwrap();
        assert!(mu.is_normalized());
        let full = system(
            &ShiftSpec::full(10, &[1, 2]).unwrap(),
            GAdditiveFamily::identity(10, 1).unwrap(),
        );
        assert_eq!(full.transition_matrix(1).unwrap().get(0, 0), q(1, 1));
    }

    #[test]
    fn single_digit_words() {
        let sys = system(
            &ShiftSpec::full(10, &[1, 2]).unwrap(),
            GAdditiveFamily::identity(10, 3).unwrap(),
        );
        assert_eq!(sys.ell(), 1);
        let mu = sys.initial_distribution(1).unwrap();
        assert_eq!(mu.values(), vec![q(0, 1), q(1, 2), q(1, 2)]);
    }

    #[test]
    fn even_shift_doubly_stochastic_and_evolution() {
        let sys = system(&ShiftSpec::even_shift(), GAdditiveFamily::id_sum(3, 5, 7).unwrap());
        assert_eq!(sys.space().size(), 70);
        for i in sys.stored_range() {
            let m = sys.transition_matrix(i).unwrap();
            assert!(m.is_doubly_stochastic());
        }
        let ell = sys.ell();
        let direct = sys.initial_distribution(ell + sys.p()).unwrap();
        assert_eq!(sys.evolve(ell, 1).unwrap(), direct);
        assert_eq!(
            sys.space().label(sys.space().index(sys.space().moduli().size() - 1, 1)),
            "(4,6|B)"
        );
    }

    #[test]
    fn irregular_cover_rejected() {
        let gm = chain_cover(&ShiftSpec::golden_mean()).unwrap();
        let err = ChainSystem::build(gm, GAdditiveFamily::identity(2, 3).unwrap(), ChainOptions::default());
        assert!(matches!(err, Err(Error::Irregular)));
    }
}
