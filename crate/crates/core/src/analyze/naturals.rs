//! Joint distribution of `(n mod a, S_g(n) mod a')` over all naturals.

use std::collections::VecDeque;

use num_integer::Integer;

use crate::analyze::missing::WITNESS_STATE_CAP;
use crate::analyze::report::{AnalysisReport, ClosureCertificate, LimitTable, Method, ReportInputs, Verdict, Witness};
use crate::error::{Error, Result};
use crate::numeral::{check_base, word_to_integer, GAdditiveFamily, ModulusVector, Word};
use crate::shift::ShiftSpec;

/// Uniform iff some `n >= 1` has `n = 0 mod a` and `S_g(n) = 1 mod a'`.
pub fn analyze_naturals(g: u32, a: u64, a_sum: u64) -> Result<AnalysisReport> {
    check_base(g)?;
    let moduli = ModulusVector::new(vec![a, a_sum])?;
    let digits: Vec<u8> = (0..g).map(|d| d as u8).collect();
    let inputs = ReportInputs {
        shift: ShiftSpec::full(g, &digits).ok(),
        base: g,
        moduli: vec![a, a_sum],
        functions: vec!["id".into(), "sum_digits".into()],
    };
    let (au, su) = (a as usize, a_sum as usize);
    // State (n mod a, S mod a', g^len mod a, n > 0).
    let total = au
        .checked_mul(su)
        .and_then(|x| x.checked_mul(au))
        .and_then(|x| x.checked_mul(2))
        .filter(|&x| x <= WITNESS_STATE_CAP)
        .ok_or_else(|| Error::Bound(format!("witness search exceeds {WITNESS_STATE_CAP} states")))?;
    let enc = |n: u64, s: u64, w: u64, nz: bool| ((n as usize * su + s as usize) * au + w as usize) * 2 + nz as usize;
    let start = (0u64, 0u64, 1 % a, false);
    let mut parent: Vec<Option<(usize, u8)>> = vec![None; total];
    let mut seen = vec![false; total];
    seen[enc(start.0, start.1, start.2, start.3)] = true;
    let mut q = VecDeque::from([start]);
    let mut explored = 0usize;
    let mut found = None;
    'bfs: while let Some((n, s, w, nz)) = q.pop_front() {
        explored += 1;
        let here = enc(n, s, w, nz);
        for d in 0..u64::from(g) {
            let next = ((n + d * w) % a, (s + d) % a_sum, (w * u64::from(g)) % a, nz || d != 0);
            let code = enc(next.0, next.1, next.2, next.3);
            if !seen[code] {
                seen[code] = true;
                parent[code] = Some((here, d as u8));
                if next.0 == 0 && next.1 == 1 % a_sum && next.3 {
                    found = Some(code);
                    break 'bfs;
                }
                q.push_back(next);
            }
        }
    }
    let classical = (u64::from(g) - 1).gcd(&a_sum) == 1;
    let mut report = AnalysisReport::new(
        inputs,
        if found.is_some() {
            Verdict::Uniform
        } else {
            Verdict::NotUniformWithWitness
        },
        Method::Gelfond,
    );
    report
        .checks
        .push(("classical sufficient condition gcd(g - 1, a') = 1".into(), classical));
    match found {
        Some(mut at) => {
            let root = enc(start.0, start.1, start.2, start.3);
            let mut ds = Vec::new();
            while at != root {
                let (prev, d) = parent[at].expect("reached state has a parent");
                ds.push(d);
                at = prev;
            }
            ds.reverse();
            let word = Word::from_raw(g, ds);
            let n = word_to_integer(&word)?;
            let fam = GAdditiveFamily::id_sum(g, a, a_sum)?;
            let res = fam.eval_at(&word, 0);
            if res.0 != vec![0, 1 % a_sum] {
                return Err(Error::Domain("witness failed re-evaluation".into()));
            }
            report.witnesses.push(Witness {
                description: format!("n = 0 mod {a}, S_g(n) = 1 mod {a_sum}"),
                word: Some(word),
                integer: Some(n),
                residues: Some(res),
            });
            report.table = Some(LimitTable::uniform(moduli));
        }
        None => {
            report.certificate = Some(ClosureCertificate {
                explored_states: explored,
                target: format!("(n mod {a}, S_g(n) mod {a_sum}) = (0, {}) with n > 0", 1 % a_sum),
            });
        }
    }
    if found.is_none() && classical {
        return Err(Error::Domain(
            "classical condition holds but no witness was found".into(),
        ));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    #[test]
    fn examples() {
        let r = analyze_naturals(10, 2, 2).unwrap();
        assert_eq!(r.verdict, Verdict::Uniform);
        assert_eq!(r.witnesses[0].integer, Some(BigUint::from(10u32)));

        let r = analyze_naturals(10, 9, 3).unwrap();
        assert_eq!(r.verdict, Verdict::NotUniformWithWitness);
        assert!(r.certificate.is_some());
        assert!(!r.checks[0].1);

        let r = analyze_naturals(10, 7, 2).unwrap();
        assert_eq!(r.verdict, Verdict::Uniform);
        assert!(r.checks[0].1);
    }
}
