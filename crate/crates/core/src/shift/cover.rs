use std::fmt;

use crate::error::{Error, Result};
use crate::graph;
use crate::numeral::check_base;
use crate::shift::spec::{ShiftKind, ShiftSpec};

/// A labelled edge `from -label-> to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: u8,
}

/// A labelled multigraph presentation of a subshift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    base: u32,
    names: Vec<String>,
    edges: Vec<Edge>,
    out: Vec<Vec<usize>>,
}

impl Cover {
    pub fn new(base: u32, names: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        check_base(base)?;
        let n = names.len();
        for e in &edges {
            if e.from >= n || e.to >= n {
                return Err(Error::InvalidSpec("edge endpoint out of range".into()));
            }
            if u32::from(e.label) >= base {
                return Err(Error::InvalidSpec(format!("label {} not below base {base}", e.label)));
            }
        }
        let mut out = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            out[e.from].push(i);
        }
        for list in out.iter_mut() {
            list.sort_by_key(|&i| (edges[i].label, edges[i].to));
        }
        Ok(Cover {
            base,
            names,
            edges,
            out,
        })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Out-edges of `v` sorted by label.
    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = &Edge> + '_ {
        self.out[v].iter().map(move |&i| &self.edges[i])
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out[v].len()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.to == v).count()
    }

    /// Node adjacency lists (one entry per edge).
    pub fn successors(&self) -> Vec<Vec<usize>> {
        (0..self.node_count())
            .map(|v| self.out_edges(v).map(|e| e.to).collect())
            .collect()
    }

    /// Terminal node of the `d`-edge leaving `v` (first one if several).
    pub fn step(&self, v: usize, d: u8) -> Option<usize> {
        self.out_edges(v).find(|e| e.label == d).map(|e| e.to)
    }

    pub fn is_right_resolving(&self) -> bool {
        (0..self.node_count()).all(|v| {
            let labels: Vec<u8> = self.out_edges(v).map(|e| e.label).collect();
            labels.windows(2).all(|w| w[0] != w[1])
        })
    }

    pub fn is_strongly_connected(&self) -> bool {
        graph::strongly_connected_components(&self.successors()).len() == 1
    }

    /// Distinct labels in ascending order.
    pub fn labels(&self) -> Vec<u8> {
        let mut l: Vec<u8> = self.edges.iter().map(|e| e.label).collect();
        l.sort_unstable();
        l.dedup();
        l
    }

    /// Subgraph on `keep` (in that order).
    pub fn induced(&self, keep: &[usize]) -> Cover {
        let mut pos = vec![usize::MAX; self.node_count()];
        for (i, &v) in keep.iter().enumerate() {
            pos[v] = i;
        }
        let names = keep.iter().map(|&v| self.names[v].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| pos[e.from] != usize::MAX && pos[e.to] != usize::MAX)
            .map(|e| Edge {
                from: pos[e.from],
                to: pos[e.to],
                label: e.label,
            })
            .collect();
        Cover::new(self.base, names, edges).expect("induced subgraph is valid")
    }

    /// Essential part: repeatedly drop nodes without in- or out-edges.
    pub fn trimmed(&self) -> Result<Cover> {
        let n = self.node_count();
        let mut alive = vec![true; n];
        loop {
            let mut indeg = vec![0usize; n];
            let mut outdeg = vec![0usize; n];
            for e in &self.edges {
                if alive[e.from] && alive[e.to] {
                    outdeg[e.from] += 1;
                    indeg[e.to] += 1;
                }
            }
            let mut changed = false;
            for v in 0..n {
                if alive[v] && (indeg[v] == 0 || outdeg[v] == 0) {
                    alive[v] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let keep: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
        if keep.is_empty() {
            return Err(Error::EmptyShift);
        }
        Ok(self.induced(&keep))
    }

    /// Strongly connected components carrying a cycle, each as its own cover.
    pub fn components(&self) -> Vec<Cover> {
        let succ = self.successors();
        graph::strongly_connected_components(&succ)
            .into_iter()
            .filter(|c| graph::has_cycle(&succ, c))
            .map(|c| self.induced(&c))
            .collect()
    }

    /// Disjoint union; node names are prefixed by the part index.
    pub fn disjoint_union(base: u32, parts: &[Cover]) -> Result<Cover> {
        let mut names = Vec::new();
        let mut edges = Vec::new();
        for (k, part) in parts.iter().enumerate() {
            let offset = names.len();
            names.extend(part.names.iter().map(|s| format!("{k}:{s}")));
            edges.extend(part.edges.iter().map(|e| Edge {
                from: e.from + offset,
                to: e.to + offset,
                label: e.label,
            }));
        }
        Cover::new(base, names, edges)
    }
}

impl fmt::Display for Cover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} nodes, {} edges", self.node_count(), self.edges.len())?;
        for e in &self.edges {
            writeln!(f, "  {} -{}-> {}", self.names[e.from], e.label, self.names[e.to])?;
        }
        Ok(())
    }
}

/// Standard presentation of a shift spec, trimmed to its essential part.
pub fn build_cover(spec: &ShiftSpec) -> Result<Cover> {
    let g = spec.base;
    let raw = match &spec.kind {
        ShiftKind::Full { digits } => Cover::new(
            g,
            vec!["*".into()],
            digits
                .iter()
                .map(|&d| Edge {
                    from: 0,
                    to: 0,
                    label: d,
                })
                .collect(),
        )?,
        ShiftKind::Sft1 { digits, allowed } => {
            let pos = |d: u8| digits.binary_search(&d).expect("validated digit");
            Cover::new(
                g,
                digits.iter().map(|d| d.to_string()).collect(),
                allowed
                    .iter()
                    .map(|&[d, e]| Edge {
                        from: pos(d),
                        to: pos(e),
                        label: e,
                    })
                    .collect(),
            )?
        }
        ShiftKind::Sofic { nodes, edges } => {
            let pos = |name: &str| nodes.iter().position(|n| n == name).expect("validated node");
            Cover::new(
                g,
                nodes.clone(),
                edges
                    .iter()
                    .map(|e| Edge {
                        from: pos(&e.from),
                        to: pos(&e.to),
                        label: e.label,
                    })
                    .collect(),
            )?
        }
        ShiftKind::Sgap { gaps } => {
            let mut names = vec!["H".to_string()];
            let mut edges = Vec::new();
            for &s in gaps {
                let mut prev = 0usize;
                for j in 1..=s {
                    names.push(format!("{s}.{j}"));
                    let node = names.len() - 1;
                    edges.push(Edge {
                        from: prev,
                        to: node,
                        label: 0,
                    });
                    prev = node;
                }
                edges.push(Edge {
                    from: prev,
                    to: 0,
                    label: 1,
                });
            }
            Cover::new(g, names, edges)?
        }
        ShiftKind::Union { parts } => {
            let covers = parts.iter().map(build_cover).collect::<Result<Vec<_>>>()?;
            Cover::disjoint_union(g, &covers)?
        }
    };
    raw.trimmed()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_examples() {
        let c = build_cover(&ShiftSpec::full(10, &[1, 2, 4]).unwrap()).unwrap();
        assert_eq!(c.node_count(), 1);
        assert_eq!(c.labels(), vec![1, 2, 4]);
        assert_eq!(c.edges().len(), 3);

        let gm = build_cover(&ShiftSpec::golden_mean()).unwrap();
        assert_eq!((gm.node_count(), gm.edges().len()), (2, 3));

        let even = build_cover(&ShiftSpec::even_shift()).unwrap();
        assert_eq!((even.node_count(), even.edges().len()), (2, 4));
        let mut labels: Vec<u8> = even.edges().iter().map(|e| e.label).collect();
        labels.sort_unstable();
        assert_eq!(labels, vec![0, 0, 1, 2]);
    }

    #[test]
    fn sgap_presentation() {
        let c = build_cover(&ShiftSpec::sgap(2, &[1, 2]).unwrap()).unwrap();
        assert_eq!(c.node_count(), 4);
        assert_eq!(c.edges().len(), 5);
        let ones = build_cover(&ShiftSpec::sgap(2, &[0]).unwrap()).unwrap();
        assert_eq!((ones.node_count(), ones.edges().len()), (1, 1));
    }

    #[test]
    fn trimming() {
        // A -> B -> C with a loop on B only: A and C are inessential.
        let spec = ShiftSpec::sofic(2, &["A", "B", "C"], &[("A", "B", 0), ("B", "B", 1), ("B", "C", 0)]).unwrap();
        let c = build_cover(&spec).unwrap();
        assert_eq!(c.names(), &["B".to_string()]);
        let dead = ShiftSpec::sofic(2, &["A", "B"], &[("A", "B", 0)]).unwrap();
        assert!(matches!(build_cover(&dead), Err(Error::EmptyShift)));
        // An sft1 digit without successors disappears.
        let sft = ShiftSpec::sft1(3, &[0, 1, 2], &[[0, 0], [0, 1], [1, 0], [0, 2]]).unwrap();
        assert_eq!(build_cover(&sft).unwrap().node_count(), 2);
    }

    #[test]
    fn union_components() {
        let spec = ShiftSpec::union(
            5,
            vec![
                ShiftSpec::full(5, &[0, 1]).unwrap(),
                ShiftSpec::full(5, &[2, 3, 4]).unwrap(),
            ],
        )
        .unwrap();
        let c = build_cover(&spec).unwrap();
        assert_eq!(c.node_count(), 2);
        assert!(!c.is_strongly_connected());
        assert_eq!(c.components().len(), 2);
    }
}
