//! Missing-digit sets: the delta trichotomy and the general witness criterion.

use std::collections::{HashMap, VecDeque};

use num_integer::Integer;

use crate::analyze::report::{
    ratio, AnalysisReport, ClosureCertificate, Coset, LimitTable, LimitValue, Method, ReportInputs, Subgroup, Verdict,
    Witness,
};
use crate::error::{Error, Result};
use crate::numeral::{delta_gcd, euler_period, GAdditiveFamily, ModulusVector, ResidueVector, Word};
use crate::shift::ShiftSpec;

/// Largest state space explored by the witness search.
pub const WITNESS_STATE_CAP: usize = 1 << 24;

pub(crate) fn check_digits(g: u32, digits: &[u8]) -> Result<Vec<u8>> {
    let spec = ShiftSpec::full(g, digits)?;
    let d = spec.full_digits().expect("full shift").to_vec();
    if d.len() < 2 {
        return Err(Error::Precondition("at least two digits are required".into()));
    }
    Ok(d)
}

fn inputs(g: u32, digits: &[u8], a: u64, a_sum: u64) -> ReportInputs {
    ReportInputs {
        shift: ShiftSpec::full(g, digits).ok(),
        base: g,
        moduli: vec![a, a_sum],
        functions: vec!["id".into(), "sum_digits".into()],
    }
}

fn check_moduli(a: u64, a_sum: u64) -> Result<ModulusVector> {
    ModulusVector::new(vec![a, a_sum])
}

/// Coset family `S(i)` for one period of `i`, starting at `i = 1`.
fn coset_family(g: u32, d1: u64, delta_a: u64, delta_a_sum: u64) -> Vec<Coset> {
    let g = u64::from(g);
    // State (x_i, g^i mod delta_a, i mod delta_a') evolves by a bijection, so the orbit is a cycle.
    let start = (0u64, 1 % delta_a, 0u64);
    let mut state = start;
    let mut out = Vec::new();
    let mut i = 0usize;
    loop {
        let (x, w, y) = state;
        state = ((x + d1 * w) % delta_a, (w * g) % delta_a, (y + 1) % delta_a_sum);
        i += 1;
        out.push(Coset {
            i,
            representative: ResidueVector(vec![state.0, (state.2 * d1) % delta_a_sum]),
        });
        if state == start {
            return out;
        }
    }
}

/// Distribution of `(n mod a, S_g(n) mod a')` over integers with digits in `D`.
pub fn analyze_missing_digits(g: u32, digits: &[u8], a: u64, a_sum: u64) -> Result<AnalysisReport> {
    let d = check_digits(g, digits)?;
    let moduli = check_moduli(a, a_sum)?;
    let inputs = inputs(g, &d, a, a_sum);
    if u64::from(g).gcd(&a) != 1 || a.gcd(&a_sum) != 1 {
        return Ok(AnalysisReport::unsupported(
            inputs,
            Method::MissingDigits,
            "requires gcd(g, a) = gcd(a, a') = 1; use chain-direct or the oracle",
        ));
    }
    let du: Vec<u32> = d.iter().map(|&x| u32::from(x)).collect();
    let delta = delta_gcd(a * a_sum, &du)?;
    let sub = Subgroup {
        delta,
        delta_a: delta.gcd(&a),
        delta_a_sum: delta.gcd(&a_sum),
    };
    let d1 = u64::from(d[0]);
    let mut report;
    if delta == 1 {
        report = AnalysisReport::new(inputs, Verdict::Uniform, Method::MissingDigits);
        report.table = Some(LimitTable::uniform(moduli));
    } else if d1 % sub.delta_a == 0 && d1 % sub.delta_a_sum == 0 {
        report = AnalysisReport::new(inputs, Verdict::SubgroupUniform, Method::MissingDigits);
        let value = ratio(delta, a * a_sum);
        let cells = moduli
            .all()
            .map(|b| {
                if b.0[0] % sub.delta_a == 0 && b.0[1] % sub.delta_a_sum == 0 {
                    LimitValue::Value(value.clone())
                } else {
                    LimitValue::Value(ratio(0, 1))
                }
            })
            .collect();
        report.table = Some(LimitTable::new(moduli, cells));
    } else {
        report = AnalysisReport::new(inputs, Verdict::ZeroOrNonexistent, Method::MissingDigits);
        let cosets = coset_family(g, d1, sub.delta_a, sub.delta_a_sum);
        let cells = moduli
            .all()
            .map(|b| {
                if cosets.iter().any(|c| coset_contains(&sub, c, &b)) {
                    LimitValue::Dne
                } else {
                    LimitValue::Value(ratio(0, 1))
                }
            })
            .collect();
        report.table = Some(LimitTable::new(moduli, cells));
        report.cosets = cosets;
    }
    report.subgroup = Some(sub);
    Ok(report)
}

/// Whether residue `(x, y)` lies in the coset of `c`.
pub fn coset_contains(sub: &Subgroup, c: &Coset, b: &ResidueVector) -> bool {
    (b.0[0] % sub.delta_a) == (c.representative.0[0] % sub.delta_a)
        && (b.0[1] % sub.delta_a_sum) == (c.representative.0[1] % sub.delta_a_sum)
}

/// Joint uniformity of `(id mod a, S_g mod a')` without assuming `gcd(a, a') = 1`.
pub fn analyze_general_pair(g: u32, digits: &[u8], a: u64, a_sum: u64) -> Result<AnalysisReport> {
    let d = check_digits(g, digits)?;
    let moduli = check_moduli(a, a_sum)?;
    let inputs = inputs(g, &d, a, a_sum);
    if u64::from(g).gcd(&a) != 1 {
        return Ok(AnalysisReport::unsupported(
            inputs,
            Method::GeneralPair,
            "requires gcd(g, a) = 1",
        ));
    }
    let p = euler_period(g, a, a_sum)?;
    let d1 = u64::from(d[0]);
    let gcd_a = d[1..].iter().fold(a, |acc, &x| acc.gcd(&(u64::from(x) - d1)));
    let (au, su, pu) = (a as usize, a_sum as usize, p as usize);
    let total = au
        .checked_mul(su)
        .and_then(|x| x.checked_mul(pu))
        .filter(|&x| x <= WITNESS_STATE_CAP)
        .ok_or_else(|| Error::Bound(format!("witness search exceeds {WITNESS_STATE_CAP} states")))?;
    // g^len mod a for len mod p; p is a multiple of the order of g mod a.
    let mut gpow = vec![0u64; pu];
    let mut w = 1 % a;
    for slot in gpow.iter_mut() {
        *slot = w;
        w = w * u64::from(g) % a;
    }
    let enc = |r: u64, s: u64, l: usize| (r as usize * su + s as usize) * pu + l;
    let target = enc(0, 1 % a_sum, 0);
    let mut parent: Vec<Option<(usize, u8)>> = vec![None; total];
    let mut seen = vec![false; total];
    let mut q = VecDeque::from([(0u64, 0u64, 0usize)]);
    let mut explored = 0usize;
    let mut found = None;
    'bfs: while let Some((r, s, l)) = q.pop_front() {
        explored += 1;
        let here = enc(r, s, l);
        for &dig in &d {
            let nr = (r + u64::from(dig) % a * gpow[l]) % a;
            let ns = (s + u64::from(dig)) % a_sum;
            let nl = (l + 1) % pu;
            let next = enc(nr, ns, nl);
            if !seen[next] {
                seen[next] = true;
                parent[next] = Some((here, dig));
                if next == target {
                    found = Some(next);
                    break 'bfs;
                }
                q.push_back((nr, ns, nl));
            }
        }
    }
    let witness = found.map(|mut at| {
        let mut digits = Vec::new();
        loop {
            let (prev, dig) = parent[at].expect("reached state has a parent");
            digits.push(dig);
            at = prev;
            if at == enc(0, 0, 0) {
                break;
            }
        }
        digits.reverse();
        Word::from_raw(g, digits)
    });
    let uniform = gcd_a == 1 && witness.is_some();
    let mut report = AnalysisReport::new(
        inputs,
        if uniform {
            Verdict::Uniform
        } else {
            Verdict::NotUniformWithWitness
        },
        Method::GeneralPair,
    );
    report
        .checks
        .push((format!("gcd(a, d_j - d_1) = 1 (value {gcd_a})"), gcd_a == 1));
    match witness {
        Some(word) => {
            let fam = GAdditiveFamily::id_sum(g, a, a_sum)?;
            let res = fam.eval_at(&word, 0);
            if res.0 != vec![0, 1 % a_sum] || word.len() % pu != 0 {
                return Err(Error::Domain("witness failed re-evaluation".into()));
            }
            report.witnesses.push(Witness {
                description: format!("(w)_g = 0 mod {a}, S_g(w) = 1 mod {a_sum}, |w| = 0 mod {p}"),
                word: Some(word),
                integer: None,
                residues: Some(res),
            });
        }
        None => {
            report.certificate = Some(ClosureCertificate {
                explored_states: explored,
                target: format!("((w)_g, S_g(w), |w| mod {p}) = (0, {}, 0)", 1 % a_sum),
            });
        }
    }
    if uniform {
        report.table = Some(LimitTable::uniform(moduli));
    }
    Ok(report)
}

/// Empirical residue supports by exact word length, lengths `1..=t_max`.
pub fn length_supports(
    g: u32,
    digits: &[u8],
    a: u64,
    a_sum: u64,
    t_max: usize,
) -> Result<HashMap<usize, Vec<ResidueVector>>> {
    let fam = GAdditiveFamily::id_sum(g, a, a_sum)?;
    let moduli = fam.moduli().clone();
    let mut out = HashMap::new();
    let mut layer = vec![false; moduli.size()];
    layer[0] = true;
    for t in 1..=t_max {
        let mut next = vec![false; moduli.size()];
        let mut top = vec![false; moduli.size()];
        for (idx, &on) in layer.iter().enumerate() {
            if !on {
                continue;
            }
            for &dig in digits {
                let v = moduli.add_index(idx, moduli.index_of(&fam.value(u32::from(dig), (t - 1) as u64)));
                next[v] = true;
                if dig != 0 || t == 1 {
                    top[v] = true;
                }
            }
        }
        out.insert(
            t,
            (0..moduli.size())
                .filter(|&i| top[i])
                .map(|i| moduli.residue_at(i))
                .collect(),
        );
        layer = next;
    }
    Ok(out)
}
