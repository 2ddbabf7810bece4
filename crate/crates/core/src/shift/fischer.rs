//! Minimal right-resolving presentations and follower-set queries.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph;
use crate::numeral::Word;
use crate::shift::cover::{build_cover, Cover, Edge};
use crate::shift::spec::{ShiftKind, ShiftSpec};
use crate::shift::subset::SubsetAutomaton;

/// Which presentation a [`FischerCover`] holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverOrigin {
    /// The minimal right-resolving irreducible presentation.
    Fischer,
    /// The one-step SFT graph (node per digit), used directly.
    SftShortcut,
}

/// In-degree = out-degree = k at every node with k >= 2, or not.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regularity {
    Regular(usize),
    Irregular,
}

/// Follower class of a word: a cover node, or outside the node set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FollowerClass {
    Node(usize),
    /// Terminal nodes of the paths labelled by the word.
    OutsideV(Vec<usize>),
}

/// A right-resolving, irreducible presentation with follower-class machinery.
#[derive(Clone, Debug)]
pub struct FischerCover {
    cover: Cover,
    origin: CoverOrigin,
    aut: SubsetAutomaton,
    class: Vec<usize>,
    node_class: Vec<usize>,
    all_state: usize,
    sync_words: Vec<Word>,
    distinguishing: HashMap<(usize, usize), Word>,
}

impl FischerCover {
    /// Wraps a right-resolving, strongly connected cover.
    pub fn from_presentation(cover: Cover, origin: CoverOrigin) -> Result<Self> {
        if !cover.is_right_resolving() {
            return Err(Error::Precondition("presentation is not right-resolving".into()));
        }
        if !cover.is_strongly_connected() {
            return Err(Error::NotTransitive(cover.components()));
        }
        let n = cover.node_count();
        let mut starts = vec![(0..n).collect::<Vec<_>>()];
        starts.extend((0..n).map(|v| vec![v]));
        let aut = SubsetAutomaton::build(&cover, &starts)?;
        let class = aut.refine();
        let node_class: Vec<usize> = (0..n).map(|v| class[aut.lookup(&[v]).unwrap()]).collect();
        let all_state = 0;

        let sync_words = synchronizing_words(&cover, &aut, all_state)?;
        let mut distinguishing = HashMap::new();
        for u in 0..n {
            for v in u + 1..n {
                if node_class[u] != node_class[v] {
                    let w = distinguishing_word(&cover, u, v)
                        .expect("distinct follower classes have a distinguishing word");
                    distinguishing.insert((u, v), w);
                }
            }
        }
        Ok(FischerCover {
            cover,
            origin,
            aut,
            class,
            node_class,
            all_state,
            sync_words,
            distinguishing,
        })
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn base(&self) -> u32 {
        self.cover.base()
    }

    pub fn node_count(&self) -> usize {
        self.cover.node_count()
    }

    pub fn origin(&self) -> CoverOrigin {
        self.origin
    }

    pub fn is_right_resolving(&self) -> bool {
        self.cover.is_right_resolving()
    }

    /// Distinct nodes have distinct follower languages.
    pub fn is_minimal(&self) -> bool {
        let mut seen = self.node_class.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len() == self.node_class.len()
    }

    /// A word all of whose paths end at `v`.
    pub fn sync_word(&self, v: usize) -> &Word {
        &self.sync_words[v]
    }

    /// A word readable from exactly one of `u`, `v`.
    pub fn distinguishing_word(&self, u: usize, v: usize) -> Option<&Word> {
        self.distinguishing.get(&(u.min(v), u.max(v)))
    }

    pub fn is_transitive(&self) -> bool {
        self.cover.is_strongly_connected()
    }

    pub fn is_mixing(&self) -> bool {
        let succ = self.cover.successors();
        let all: Vec<usize> = (0..self.node_count()).collect();
        self.is_transitive() && graph::component_period(&succ, &all) == 1
    }

    pub fn regularity(&self) -> Regularity {
        let n = self.node_count();
        let k = self.cover.out_degree(0);
        let regular = (0..n).all(|v| self.cover.out_degree(v) == k && self.cover.in_degree(v) == k);
        if regular && k >= 2 {
            Regularity::Regular(k)
        } else {
            Regularity::Irregular
        }
    }

    /// `k` when regular.
    pub fn k(&self) -> Option<usize> {
        match self.regularity() {
            Regularity::Regular(k) => Some(k),
            Regularity::Irregular => None,
        }
    }

    pub(crate) fn automaton(&self) -> &SubsetAutomaton {
        &self.aut
    }

    pub(crate) fn all_state(&self) -> usize {
        self.all_state
    }

    /// Node whose follower language equals that of subset state `s`.
    pub(crate) fn classify(&self, s: usize) -> Option<usize> {
        let set = &self.aut.states[s];
        if set.len() == 1 {
            return Some(set[0]);
        }
        self.node_class.iter().position(|&c| c == self.class[s])
    }

    pub fn follower_class(&self, w: &Word) -> Result<FollowerClass> {
        let s = w
            .digits()
            .iter()
            .try_fold(self.all_state, |s, &d| self.aut.step(s, d))
            .ok_or_else(|| Error::Domain(format!("word {w} is not in the language")))?;
        Ok(match self.classify(s) {
            Some(v) => FollowerClass::Node(v),
            None => FollowerClass::OutsideV(self.aut.states[s].clone()),
        })
    }

    /// Least length of a synchronizing word: one whose paths all end at a single node.
    pub fn shortest_synchronizing_length(&self) -> Result<usize> {
        let n = self.node_count();
        let bound = 10 * n * n;
        let mut depth = vec![usize::MAX; self.aut.len()];
        depth[self.all_state] = 0;
        let mut q = VecDeque::from([self.all_state]);
        while let Some(s) = q.pop_front() {
            if self.aut.states[s].len() == 1 {
                return Ok(depth[s]);
            }
            if depth[s] >= bound {
                break;
            }
            for (_, t) in self.aut.transitions(s) {
                if depth[t] == usize::MAX {
                    depth[t] = depth[s] + 1;
                    q.push_back(t);
                }
            }
        }
        Err(Error::Bound(format!("no synchronizing word within length {bound}")))
    }

    /// Per-node counts of words of length `ell` whose follower class is that node.
    pub(crate) fn prefix_class_counts(&self, ell: usize) -> Vec<BigUint> {
        let mut layer: HashMap<usize, BigUint> = HashMap::from([(self.all_state, BigUint::one())]);
        for _ in 0..ell {
            let mut next: HashMap<usize, BigUint> = HashMap::new();
            for (&s, c) in &layer {
                for (_, t) in self.aut.transitions(s) {
                    *next.entry(t).or_insert_with(BigUint::zero) += c;
                }
            }
            layer = next;
        }
        let mut per_node = vec![BigUint::zero(); self.node_count()];
        for (s, c) in layer {
            if let Some(v) = self.classify(s) {
                per_node[v] += c;
            }
        }
        per_node
    }

    /// Number of paths of length `m` leaving each node.
    pub(crate) fn path_counts(&self, m: usize) -> Vec<BigUint> {
        let n = self.node_count();
        let mut cnt = vec![BigUint::one(); n];
        for _ in 0..m {
            cnt = (0..n)
                .map(|v| self.cover.out_edges(v).map(|e| &cnt[e.to]).sum())
                .collect();
        }
        cnt
    }

    fn require_sync(&self, ell: usize, per_node: &[BigUint]) -> Result<()> {
        if per_node.iter().all(Zero::is_zero) {
            let shortest = self
                .shortest_synchronizing_length()
                .map(|l| l.to_string())
                .unwrap_or_else(|_| "none".into());
            return Err(Error::Precondition(format!(
                "no synchronizing word of length {ell}; shortest synchronizing length is {shortest}"
            )));
        }
        Ok(())
    }

    /// `|L^i_{V,ell}|`: words of length `i` whose length-`ell` prefix has a node follower class.
    pub fn restricted_count(&self, ell: usize, i: usize) -> Result<BigUint> {
        if i < ell {
            return Err(Error::Precondition(format!("length {i} below ell = {ell}")));
        }
        let per_node = self.prefix_class_counts(ell);
        self.require_sync(ell, &per_node)?;
        let tails = self.path_counts(i - ell);
        Ok(per_node.iter().zip(&tails).map(|(a, b)| a * b).sum())
    }

    /// The words counted by [`Self::restricted_count`], in lexicographic order.
    pub fn restricted_enumerate(&self, ell: usize, i: usize) -> Result<Vec<Word>> {
        if i < ell {
            return Err(Error::Precondition(format!("length {i} below ell = {ell}")));
        }
        self.require_sync(ell, &self.prefix_class_counts(ell))?;
        let mut out = Vec::new();
        let mut buf = Vec::with_capacity(i);
        self.restricted_dfs(self.all_state, ell, i, &mut buf, &mut out);
        Ok(out)
    }

    fn restricted_dfs(&self, s: usize, ell: usize, i: usize, buf: &mut Vec<u8>, out: &mut Vec<Word>) {
        if buf.len() == ell {
            if let Some(v) = self.classify(s) {
                self.path_dfs(v, i, buf, out);
            }
            return;
        }
        for (d, t) in self.aut.transitions(s) {
            buf.push(d);
            self.restricted_dfs(t, ell, i, buf, out);
            buf.pop();
        }
    }

    fn path_dfs(&self, v: usize, i: usize, buf: &mut Vec<u8>, out: &mut Vec<Word>) {
        if buf.len() == i {
            out.push(Word::from_raw(self.base(), buf.clone()));
            return;
        }
        for e in self.cover.out_edges(v) {
            buf.push(e.label);
            self.path_dfs(e.to, i, buf, out);
            buf.pop();
        }
    }
}

/// Per node, a shortest word whose paths all end there.
fn synchronizing_words(cover: &Cover, aut: &SubsetAutomaton, start: usize) -> Result<Vec<Word>> {
    let mut parent: Vec<Option<(usize, u8)>> = vec![None; aut.len()];
    let mut seen = vec![false; aut.len()];
    seen[start] = true;
    let mut q = VecDeque::from([start]);
    let mut found: Vec<Option<usize>> = vec![None; cover.node_count()];
    while let Some(s) = q.pop_front() {
        if let [v] = aut.states[s][..] {
            found[v].get_or_insert(s);
        }
        for (d, t) in aut.transitions(s) {
            if !seen[t] {
                seen[t] = true;
                parent[t] = Some((s, d));
                q.push_back(t);
            }
        }
    }
    found
        .into_iter()
        .map(|s| {
            let mut s = s.ok_or_else(|| Error::Precondition("no synchronizing word".into()))?;
            let mut digits = Vec::new();
            while let Some((p, d)) = parent[s] {
                digits.push(d);
                s = p;
            }
            digits.reverse();
            Ok(Word::from_raw(cover.base(), digits))
        })
        .collect()
}

/// Shortest word readable from exactly one of `u`, `v` in a right-resolving cover.
fn distinguishing_word(cover: &Cover, u: usize, v: usize) -> Option<Word> {
    let mut parent: HashMap<(usize, usize), ((usize, usize), u8)> = HashMap::new();
    let mut q = VecDeque::from([(u, v)]);
    let mut seen = BTreeSet::from([(u, v)]);
    let labels = cover.labels();
    let unwind = |mut at: (usize, usize), last: u8, parent: &HashMap<_, _>| {
        let mut digits = vec![last];
        while let Some(&(p, d)) = parent.get(&at) {
            digits.push(d);
            at = p;
        }
        digits.reverse();
        Word::from_raw(cover.base(), digits)
    };
    while let Some((x, y)) = q.pop_front() {
        for &d in &labels {
            match (cover.step(x, d), cover.step(y, d)) {
                (Some(_), None) | (None, Some(_)) => return Some(unwind((x, y), d, &parent)),
                (Some(a), Some(b)) => {
                    if seen.insert((a, b)) {
                        parent.insert((a, b), ((x, y), d));
                        q.push_back((a, b));
                    }
                }
                (None, None) => {}
            }
        }
    }
    None
}

fn subset_name(cover: &Cover, set: &[usize]) -> String {
    if let [v] = set {
        return cover.names()[*v].clone();
    }
    let parts: Vec<&str> = set.iter().map(|&v| cover.names()[v].as_str()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Fischer cover of the shift presented by `c`.
///
/// The follower-set graph is built by determinizing from the all-nodes subset and
/// merging states with equal follower languages; the Fischer cover is its unique
/// terminal strongly connected component. The input is transitive exactly when
/// that component exists and presents the whole language.
pub fn fischer_cover(c: &Cover) -> Result<FischerCover> {
    let t = c.trimmed()?;
    let all: Vec<usize> = (0..t.node_count()).collect();
    let aut = SubsetAutomaton::build(&t, &[all])?;
    let class = aut.refine();
    let k = class.iter().max().map_or(0, |m| m + 1);

    let mut qedges: BTreeSet<(usize, u8, usize)> = BTreeSet::new();
    for s in 0..aut.len() {
        for (d, u) in aut.transitions(s) {
            qedges.insert((class[s], d, class[u]));
        }
    }
    let mut qsucc = vec![Vec::new(); k];
    for &(a, _, b) in &qedges {
        qsucc[a].push(b);
    }
    let comps = graph::strongly_connected_components(&qsucc);
    let mut comp_of = vec![0usize; k];
    for (ci, comp) in comps.iter().enumerate() {
        for &v in comp {
            comp_of[v] = ci;
        }
    }
    let sinks: Vec<&Vec<usize>> = comps
        .iter()
        .enumerate()
        .filter(|(ci, comp)| comp.iter().all(|&v| qsucc[v].iter().all(|&w| comp_of[w] == *ci)))
        .map(|(_, comp)| comp)
        .collect();
    if sinks.len() != 1 {
        return Err(Error::NotTransitive(t.components()));
    }
    let sink = sinks[0];
    let mut pos = vec![usize::MAX; k];
    for (i, &cl) in sink.iter().enumerate() {
        pos[cl] = i;
    }
    let names: Vec<String> = sink
        .iter()
        .map(|&cl| {
            let members: Vec<usize> = (0..aut.len()).filter(|&s| class[s] == cl).collect();
            let rep = members
                .iter()
                .copied()
                .find(|&s| aut.states[s].len() == 1)
                .unwrap_or(members[0]);
            subset_name(&t, &aut.states[rep])
        })
        .collect();
    let edges: Vec<Edge> = qedges
        .iter()
        .filter(|&&(a, _, b)| pos[a] != usize::MAX && pos[b] != usize::MAX)
        .map(|&(a, d, b)| Edge {
            from: pos[a],
            to: pos[b],
            label: d,
        })
        .collect();
    let candidate = Cover::new(t.base(), names, edges)?;

    if !same_language(&aut, &candidate)? {
        return Err(Error::NotTransitive(t.components()));
    }
    FischerCover::from_presentation(candidate, CoverOrigin::Fischer)
}

/// Language of `aut` (from state 0) equals the language of `cover` from all nodes.
fn same_language(aut: &SubsetAutomaton, cover: &Cover) -> Result<bool> {
    let all: Vec<usize> = (0..cover.node_count()).collect();
    let other = SubsetAutomaton::build(cover, &[all])?;
    let mut seen = BTreeSet::from([(0usize, 0usize)]);
    let mut q = VecDeque::from([(0usize, 0usize)]);
    let mut labels = aut.labels.clone();
    labels.extend(other.labels.iter().copied());
    labels.sort_unstable();
    labels.dedup();
    while let Some((x, y)) = q.pop_front() {
        for &d in &labels {
            match (aut.step(x, d), other.step(y, d)) {
                (None, None) => {}
                (Some(a), Some(b)) => {
                    if seen.insert((a, b)) {
                        q.push_back((a, b));
                    }
                }
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}

/// The one-step SFT graph as a chain cover, when it is irreducible and k-regular.
pub fn sft_shortcut(spec: &ShiftSpec) -> Result<Option<FischerCover>> {
    if !matches!(spec.kind, ShiftKind::Sft1 { .. }) {
        return Ok(None);
    }
    let cover = build_cover(spec)?;
    if !cover.is_strongly_connected() {
        return Ok(None);
    }
    let fc = FischerCover::from_presentation(cover, CoverOrigin::SftShortcut)?;
    Ok(fc.k().map(|_| fc))
}

/// Fischer cover of a spec, or the SFT shortcut graph when that applies.
pub fn chain_cover(spec: &ShiftSpec) -> Result<FischerCover> {
    if let Some(fc) = sft_shortcut(spec)? {
        return Ok(fc);
    }
    fischer_cover(&build_cover(spec)?)
}
