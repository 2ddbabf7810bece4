//! Small digraph algorithms over adjacency lists.

use std::collections::VecDeque;

use num_integer::Integer;

/// Strongly connected components (iterative Tarjan). Each component is sorted and
/// components are ordered by their least vertex.
pub fn strongly_connected_components(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0usize;
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < succ[v].len() {
                let w = succ[v][*next];
                *next += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps.sort_by_key(|c| c[0]);
    comps
}

/// Whether the component has at least one internal edge (so carries a cycle).
pub fn has_cycle(succ: &[Vec<usize>], comp: &[usize]) -> bool {
    let member = membership(succ.len(), comp);
    comp.iter().any(|&v| succ[v].iter().any(|&w| member[w]))
}

pub(crate) fn membership(n: usize, set: &[usize]) -> Vec<bool> {
    let mut m = vec![false; n];
    for &v in set {
        m[v] = true;
    }
    m
}

/// Period of a strongly connected component: gcd over internal edges `u -> v` of
/// `level(u) + 1 - level(v)`, with BFS levels from the least vertex. Returns 0 for
/// a component without cycles.
pub fn component_period(succ: &[Vec<usize>], comp: &[usize]) -> usize {
    let levels = bfs_levels(succ, comp);
    let member = membership(succ.len(), comp);
    let mut g = 0i64;
    for &u in comp {
        for &v in &succ[u] {
            if member[v] {
                let diff = levels[u].unwrap() as i64 + 1 - levels[v].unwrap() as i64;
                g = g.gcd(&diff.abs());
            }
        }
    }
    g as usize
}

/// BFS levels inside `comp` starting from its least vertex.
pub(crate) fn bfs_levels(succ: &[Vec<usize>], comp: &[usize]) -> Vec<Option<usize>> {
    let member = membership(succ.len(), comp);
    let mut level = vec![None; succ.len()];
    if let Some(&root) = comp.iter().min() {
        level[root] = Some(0);
        let mut q = VecDeque::from([root]);
        while let Some(u) = q.pop_front() {
            let lu = level[u].unwrap();
            for &v in &succ[u] {
                if member[v] && level[v].is_none() {
                    level[v] = Some(lu + 1);
                    q.push_back(v);
                }
            }
        }
    }
    level
}

/// Cyclic subclasses of a component of period `q`: vertices grouped by BFS level mod `q`.
pub fn cyclic_classes(succ: &[Vec<usize>], comp: &[usize], q: usize) -> Vec<Vec<usize>> {
    let levels = bfs_levels(succ, comp);
    let q = q.max(1);
    let mut out = vec![Vec::new(); q];
    for &v in comp {
        out[levels[v].unwrap() % q].push(v);
    }
    out
}

/// Forward closure of `starts`.
pub fn forward_closure(succ: &[Vec<usize>], starts: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut seen = vec![false; succ.len()];
    let mut q: VecDeque<usize> = VecDeque::new();
    for s in starts {
        if !seen[s] {
            seen[s] = true;
            q.push_back(s);
        }
    }
    while let Some(u) = q.pop_front() {
        for &v in &succ[u] {
            if !seen[v] {
                seen[v] = true;
                q.push_back(v);
            }
        }
    }
    (0..succ.len()).filter(|&v| seen[v]).collect()
}

/// Adjacency restricted to `keep`, re-indexed in the order of `keep`.
pub(crate) fn induced(succ: &[Vec<usize>], keep: &[usize]) -> Vec<Vec<usize>> {
    let mut pos = vec![usize::MAX; succ.len()];
    for (i, &v) in keep.iter().enumerate() {
        pos[v] = i;
    }
    keep.iter()
        .map(|&v| {
            succ[v]
                .iter()
                .filter(|&&w| pos[w] != usize::MAX)
                .map(|&w| pos[w])
                .collect()
        })
        .collect()
}
