//! Counting and enumerating the language of a cover.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::Result;
use crate::numeral::Word;
use crate::shift::cover::Cover;
use crate::shift::subset::SubsetAutomaton;

/// The language of a cover, via its subset automaton started from all nodes.
#[derive(Clone, Debug)]
pub struct Language {
    base: u32,
    aut: SubsetAutomaton,
}

impl Language {
    pub fn new(cover: &Cover) -> Result<Self> {
        let all: Vec<usize> = (0..cover.node_count()).collect();
        Ok(Language {
            base: cover.base(),
            aut: SubsetAutomaton::build(cover, &[all])?,
        })
    }

    /// Number of deterministic states (distinct reachable node subsets).
    pub fn state_count(&self) -> usize {
        self.aut.len()
    }

    pub(crate) fn automaton(&self) -> &SubsetAutomaton {
        &self.aut
    }

    pub fn contains(&self, w: &Word) -> bool {
        w.digits()
            .iter()
            .try_fold(0usize, |s, &d| self.aut.step(s, d))
            .is_some()
    }

    /// `|L^n|` for `n = 0..=n_max`.
    pub fn counts(&self, n_max: usize) -> Vec<BigUint> {
        let mut layer = vec![BigUint::zero(); self.aut.len()];
        layer[0] = BigUint::one();
        let mut out = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            out.push(layer.iter().sum());
            if n == n_max {
                break;
            }
            let mut next = vec![BigUint::zero(); self.aut.len()];
            for (s, c) in layer.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for (_, t) in self.aut.transitions(s) {
                    next[t] += c;
                }
            }
            layer = next;
        }
        out
    }

    pub fn count(&self, n: usize) -> BigUint {
        self.counts(n).pop().unwrap()
    }

    /// All words of length `n` in lexicographic order (digit 0 first).
    pub fn words(&self, n: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut buf = Vec::with_capacity(n);
        self.dfs(0, n, &mut buf, &mut out);
        out
    }

    fn dfs(&self, s: usize, left: usize, buf: &mut Vec<u8>, out: &mut Vec<Word>) {
        if left == 0 {
            out.push(Word::from_raw(self.base, buf.clone()));
            return;
        }
        for (d, t) in self.aut.transitions(s) {
            buf.push(d);
            self.dfs(t, left - 1, buf, out);
            buf.pop();
        }
    }
}

/// `|L^n|` of the presented shift.
pub fn language_count(cover: &Cover, n: usize) -> Result<BigUint> {
    Ok(Language::new(cover)?.count(n))
}

/// `L^n` in lexicographic order, each word once.
pub fn enumerate_words(cover: &Cover, n: usize) -> Result<Vec<Word>> {
    Ok(Language::new(cover)?.words(n))
}
