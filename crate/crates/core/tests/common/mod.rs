#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use digitshift::shift::{chain_cover, FischerCover, ShiftSpec};

/// Built-in transitive sofic examples.
pub fn transitive_builtins() -> Vec<(&'static str, ShiftSpec)> {
    vec![
        ("full(10,{1,2,4})", ShiftSpec::full(10, &[1, 2, 4]).unwrap()),
        ("full(6,{1,2,4})", ShiftSpec::full(6, &[1, 2, 4]).unwrap()),
        ("full(3,{0,2})", ShiftSpec::full(3, &[0, 2]).unwrap()),
        ("full(10,{1,3})", ShiftSpec::full(10, &[1, 3]).unwrap()),
        ("full(5,{0,1,2})", ShiftSpec::full(5, &[0, 1, 2]).unwrap()),
        ("golden mean", ShiftSpec::golden_mean()),
        ("even shift", ShiftSpec::even_shift()),
        ("sgap{1,2}", ShiftSpec::sgap(2, &[1, 2]).unwrap()),
    ]
}

pub fn union_shift() -> ShiftSpec {
    ShiftSpec::union(
        5,
        vec![
            ShiftSpec::full(5, &[0, 1]).unwrap(),
            ShiftSpec::full(5, &[2, 3, 4]).unwrap(),
        ],
    )
    .unwrap()
}

/// All built-ins, including the non-transitive union.
pub fn all_builtins() -> Vec<(&'static str, ShiftSpec)> {
    let mut v = transitive_builtins();
    v.push(("union(5)", union_shift()));
    v
}

/// A random sofic presentation that is a union of `k` permutations with distinct labels
/// per node, kept only if its chain cover is k-regular.
pub fn random_regular_cover(rng: &mut StdRng) -> Option<(ShiftSpec, FischerCover)> {
    let n = rng.gen_range(2..=4usize);
    let k = rng.gen_range(2..=3usize);
    let g = rng.gen_range(k as u32 + 1..=6);
    let names: Vec<String> = (0..n).map(|v| format!("N{v}")).collect();
    let offsets: Vec<usize> = (0..n).map(|_| rng.gen_range(0..g as usize)).collect();
    let mut edges = Vec::new();
    for j in 0..k {
        let perm: Vec<usize> = if j == 0 {
            (0..n).map(|v| (v + 1) % n).collect()
        } else {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(rng);
            p
        };
        for v in 0..n {
            let label = ((j + offsets[v]) % g as usize) as u8;
            edges.push((names[v].clone(), names[perm[v]].clone(), label));
        }
    }
    let node_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let edge_refs: Vec<(&str, &str, u8)> = edges.iter().map(|(f, t, l)| (f.as_str(), t.as_str(), *l)).collect();
    let spec = ShiftSpec::sofic(g, &node_refs, &edge_refs).ok()?;
    let fc = chain_cover(&spec).ok()?;
    fc.k().map(|_| (spec, fc))
}

/// The first `count` accepted random covers from a fixed seed.
pub fn random_regular_covers(seed: u64, count: usize) -> Vec<(ShiftSpec, FischerCover)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        if let Some(c) = random_regular_cover(&mut rng) {
            out.push(c);
        }
    }
    out
}
