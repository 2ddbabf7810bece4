//! Subset construction and Moore partition refinement over a cover.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::shift::cover::Cover;

/// Cap on the number of subset states explored.
pub const SUBSET_STATE_CAP: usize = 1 << 20;

/// Deterministic automaton whose states are nonempty node subsets; every state accepts.
#[derive(Clone, Debug)]
pub(crate) struct SubsetAutomaton {
    pub(crate) labels: Vec<u8>,
    pub(crate) states: Vec<Vec<usize>>,
    pub(crate) index: HashMap<Vec<usize>, usize>,
    /// `next[s][j]` follows `labels[j]`.
    pub(crate) next: Vec<Vec<Option<usize>>>,
}

fn successors_by_label(cover: &Cover, set: &[usize]) -> BTreeMap<u8, Vec<usize>> {
    let mut out: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for &v in set {
        for e in cover.out_edges(v) {
            out.entry(e.label).or_default().push(e.to);
        }
    }
    for targets in out.values_mut() {
        targets.sort_unstable();
        targets.dedup();
    }
    out
}

impl SubsetAutomaton {
    /// Explores every subset reachable from `starts`, labels in ascending order.
    pub(crate) fn build(cover: &Cover, starts: &[Vec<usize>]) -> Result<Self> {
        let labels = cover.labels();
        let mut label_pos = [usize::MAX; 256];
        for (j, &l) in labels.iter().enumerate() {
            label_pos[l as usize] = j;
        }
        let mut aut = SubsetAutomaton {
            labels,
            states: Vec::new(),
            index: HashMap::new(),
            next: Vec::new(),
        };
        let mut queue = VecDeque::new();
        for s in starts {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            if !s.is_empty() && !aut.index.contains_key(&s) {
                aut.intern(s.clone());
                queue.push_back(aut.states.len() - 1);
            }
        }
        while let Some(id) = queue.pop_front() {
            let mut row = vec![None; aut.labels.len()];
            for (label, targets) in successors_by_label(cover, &aut.states[id].clone()) {
                let t = match aut.index.get(&targets) {
                    Some(&t) => t,
                    None => {
                        if aut.states.len() >= SUBSET_STATE_CAP {
                            return Err(Error::Bound(format!(
                                "subset construction exceeded {SUBSET_STATE_CAP} states"
                            )));
                        }
                        aut.intern(targets);
                        queue.push_back(aut.states.len() - 1);
                        aut.states.len() - 1
                    }
                };
                row[label_pos[label as usize]] = Some(t);
            }
            aut.next.push(row);
        }
        // Rows were pushed in BFS order, which matches state ids.
        Ok(aut)
    }

    fn intern(&mut self, set: Vec<usize>) {
        self.index.insert(set.clone(), self.states.len());
        self.states.push(set);
    }

    pub(crate) fn len(&self) -> usize {
        self.states.len()
    }

    pub(crate) fn lookup(&self, set: &[usize]) -> Option<usize> {
        self.index.get(set).copied()
    }

    pub(crate) fn label_index(&self, d: u8) -> Option<usize> {
        self.labels.binary_search(&d).ok()
    }

    pub(crate) fn step(&self, s: usize, d: u8) -> Option<usize> {
        self.label_index(d).and_then(|j| self.next[s][j])
    }

    /// Outgoing `(label, target)` pairs in label order.
    pub(crate) fn transitions(&self, s: usize) -> impl Iterator<Item = (u8, usize)> + '_ {
        self.next[s]
            .iter()
            .zip(&self.labels)
            .filter_map(|(t, &l)| t.map(|t| (l, t)))
    }

    pub(crate) fn successors(&self) -> Vec<Vec<usize>> {
        (0..self.len())
            .map(|s| self.transitions(s).map(|(_, t)| t).collect())
            .collect()
    }

    /// Moore refinement: states share a class iff their follower languages agree.
    /// Class ids are numbered by first appearance in state order.
    pub(crate) fn refine(&self) -> Vec<usize> {
        let n = self.len();
        let mut class: Vec<usize> = {
            let mut ids: HashMap<Vec<bool>, usize> = HashMap::new();
            (0..n)
                .map(|s| {
                    let sig: Vec<bool> = self.next[s].iter().map(Option::is_some).collect();
                    let k = ids.len();
                    *ids.entry(sig).or_insert(k)
                })
                .collect()
        };
        let mut count = class.iter().max().map_or(0, |m| m + 1);
        loop {
            let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
            let refined: Vec<usize> = (0..n)
                .map(|s| {
                    let mut sig = Vec::with_capacity(self.labels.len() + 1);
                    sig.push(class[s]);
                    sig.extend(self.next[s].iter().map(|t| t.map_or(usize::MAX, |t| class[t])));
                    let k = ids.len();
                    *ids.entry(sig).or_insert(k)
                })
                .collect();
            let new_count = ids.len();
            class = refined;
            if new_count == count {
                return class;
            }
            count = new_count;
        }
    }
}
