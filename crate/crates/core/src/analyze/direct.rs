//! Verdicts read directly off the Markov chains, and the SFT digit-pair criterion.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use crate::analyze::report::{ratio, AnalysisReport, LimitTable, LimitValue, Method, ReportInputs, Verdict, Witness};
use crate::chain::{markov_condition, visited_classes, ChainOptions, ChainSystem};
use crate::error::{Error, Result};
use crate::numeral::{EventualPeriod, GAdditiveFamily, ModulusVector};
use crate::shift::{chain_cover, sft_shortcut, ShiftKind, ShiftSpec};

/// Largest period reached by lifting past periodic classes.
pub const LIFTED_PERIOD_CAP: usize = 1 << 12;

fn family_inputs(spec: &ShiftSpec, family: &GAdditiveFamily) -> ReportInputs {
    ReportInputs {
        shift: Some(spec.clone()),
        base: family.base(),
        moduli: family.moduli().as_slice().to_vec(),
        functions: family.names(),
    }
}

/// Every prime factor of `a` divides `g`, i.e. `a | g^i` for some `i`.
fn divides_power(a: u64, g: u64) -> bool {
    let mut x = a;
    loop {
        let d = x.gcd(&g);
        if d == 1 {
            return x == 1;
        }
        x /= d;
    }
}

/// Limit table along `i + np` for each `i` in one period: class mass spread evenly over the class.
fn per_index_limit(sys: &ChainSystem, i: usize) -> Result<Option<Vec<BigRational>>> {
    let (_, classes) = visited_classes(sys, i)?;
    if classes.iter().any(|c| c.period != 1) {
        return Ok(None);
    }
    let mu = sys.initial_distribution(i)?;
    let space = sys.space();
    let mut cells = vec![BigRational::zero(); space.moduli().size()];
    for c in &classes {
        let share = mu.mass(&c.states) / BigRational::from_integer(c.states.len().into());
        for &s in &c.states {
            cells[space.split(s).0] += &share;
        }
    }
    Ok(Some(cells))
}

fn periodic_lcm(sys: &ChainSystem) -> Result<usize> {
    let mut l = 1usize;
    for i in sys.stored_range() {
        let (_, classes) = visited_classes(sys, i)?;
        for c in classes {
            if c.period > 1 {
                l = l.lcm(&c.period);
            }
        }
    }
    Ok(l)
}

fn table(moduli: &ModulusVector, cells: &[BigRational]) -> LimitTable {
    LimitTable::new(moduli.clone(), cells.iter().cloned().map(LimitValue::Value).collect())
}

/// Builds the chain system and reads off the limit of every residue class.
pub fn chain_direct(spec: &ShiftSpec, family: &GAdditiveFamily) -> Result<AnalysisReport> {
    if spec.base != family.base() {
        return Err(Error::Domain(format!(
            "shift base {} differs from family base {}",
            spec.base,
            family.base()
        )));
    }
    let inputs = family_inputs(spec, family);
    let unsupported = |why: String| Ok(AnalysisReport::unsupported(inputs.clone(), Method::ChainDirect, why));
    let cover = match chain_cover(spec) {
        Ok(c) => c,
        Err(Error::NotTransitive(parts)) => {
            return unsupported(format!(
                "shift is not transitive ({} components); use the oracle",
                parts.len()
            ))
        }
        Err(e) => return Err(e),
    };
    if cover.k().is_none() {
        return unsupported("cover is not k-regular with k >= 2".into());
    }
    let g = u64::from(family.base());
    let a_id = family
        .functions()
        .iter()
        .filter(|f| f.is_identity())
        .fold(1u64, |acc, f| acc.lcm(&f.modulus()));
    if g.gcd(&a_id) != 1 {
        let allowed = match spec.full_digits() {
            Some(d) => d.len() == g as usize || divides_power(a_id, g),
            None => false,
        };
        if !allowed {
            return unsupported(format!(
                "gcd(g, a) = {} is only handled for full shifts over all digits or when a divides a power of g",
                g.gcd(&a_id)
            ));
        }
    }
    let origin = cover.origin();
    let mut sys = ChainSystem::build(cover, family.clone(), ChainOptions::default())?;
    let moduli = family.moduli().clone();
    let mc = markov_condition(&sys);
    let mut report;
    if mc.holds() {
        report = AnalysisReport::new(inputs, Verdict::Uniform, Method::ChainDirect);
        report.table = Some(LimitTable::uniform(moduli));
        report.cover_origin = Some(origin);
        report.markov = Some(mc);
        return Ok(report);
    }
    loop {
        let l = periodic_lcm(&sys)?;
        if l == 1 {
            break;
        }
        let p = sys.p() * l;
        if p > LIFTED_PERIOD_CAP {
            let mut r = AnalysisReport::unsupported(
                inputs,
                Method::ChainDirect,
                format!("periodic classes need period {p}, above {LIFTED_PERIOD_CAP}"),
            );
            r.markov = Some(mc);
            return Ok(r);
        }
        let period = EventualPeriod {
            p,
            ell: sys.period().ell,
        };
        sys = ChainSystem::build(
            sys.cover().clone(),
            family.clone(),
            ChainOptions {
                period: Some(period),
                ell: None,
            },
        )?;
    }
    let mut per_i = Vec::with_capacity(sys.p());
    for i in sys.stored_range() {
        let cells = per_index_limit(&sys, i)?.expect("classes are aperiodic after lifting");
        per_i.push((i, cells));
    }
    let first = &per_i[0].1;
    let all_equal = per_i.iter().all(|(_, c)| c == first);
    if all_equal {
        let n = moduli.size() as u64;
        let nonzero: Vec<&BigRational> = first.iter().filter(|q| !q.is_zero()).collect();
        let verdict = if first.iter().all(|q| *q == ratio(1, n)) {
            Verdict::Uniform
        } else if nonzero.windows(2).all(|w| w[0] == w[1]) {
            Verdict::SubgroupUniform
        } else {
            Verdict::NonUniformLimit
        };
        report = AnalysisReport::new(inputs, verdict, Method::ChainDirect);
        report.table = Some(table(&moduli, first));
    } else {
        report = AnalysisReport::new(inputs, Verdict::ZeroOrNonexistent, Method::ChainDirect);
        let cells = (0..moduli.size())
            .map(|b| {
                if per_i.iter().all(|(_, c)| c[b] == first[b]) {
                    LimitValue::Value(first[b].clone())
                } else {
                    LimitValue::Dne
                }
            })
            .collect();
        report.table = Some(LimitTable::new(moduli.clone(), cells));
        report.per_i = per_i.iter().map(|(i, c)| (*i, table(&moduli, c))).collect();
    }
    if sys.p() != mc.verdicts.len() {
        report
            .notes
            .push(format!("period lifted to p = {} to resolve periodic classes", sys.p()));
    }
    report.cover_origin = Some(origin);
    report.markov = Some(mc);
    Ok(report)
}

/// Uniformity of `(id mod a, S_g mod a')` on a one-step SFT via a qualifying digit pair.
pub fn analyze_sft(spec: &ShiftSpec, a: u64, a_sum: u64) -> Result<AnalysisReport> {
    let ShiftKind::Sft1 { allowed, .. } = &spec.kind else {
        return Err(Error::Domain("analyze_sft needs a one-step SFT".into()));
    };
    let g = spec.base;
    let family = GAdditiveFamily::id_sum(g, a, a_sum)?;
    let inputs = family_inputs(spec, &family);
    if u64::from(g).gcd(&a) != 1 || a.gcd(&a_sum) != 1 {
        return Ok(AnalysisReport::unsupported(
            inputs,
            Method::Sft,
            "requires gcd(g, a) = gcd(a, a') = 1",
        ));
    }
    if sft_shortcut(spec)?.is_none() {
        return Ok(AnalysisReport::unsupported(
            inputs,
            Method::Sft,
            "transition matrix must be irreducible and k-regular with k >= 2",
        ));
    }
    let has = |d: u8, e: u8| allowed.contains(&[d, e]);
    let aa = a * a_sum;
    let pair = allowed.iter().find_map(|&[d, e]| {
        (d != e && has(d, d) && has(e, d) && u64::from(d.abs_diff(e)).gcd(&aa) == 1).then_some((d, e))
    });
    match pair {
        Some((d, e)) => {
            let mut report = AnalysisReport::new(inputs, Verdict::Uniform, Method::Sft);
            report.table = Some(LimitTable::uniform(family.moduli().clone()));
            report.witnesses.push(Witness {
                description: format!(
                    "T({d},{d}) = T({d},{e}) = T({e},{d}) = 1 and gcd({}, {aa}) = 1",
                    d.abs_diff(e)
                ),
                word: None,
                integer: None,
                residues: None,
            });
            Ok(report)
        }
        None => {
            let mut report = chain_direct(spec, &family)?;
            report
                .notes
                .push("no qualifying digit pair; verdict taken from the chain analysis".into());
            Ok(report)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyze::missing::analyze_missing_digits;
    use crate::numeral::ResidueVector;

    #[test]
    fn even_shift_uniform() {
        let r = chain_direct(&ShiftSpec::even_shift(), &GAdditiveFamily::id_sum(3, 5, 7).unwrap()).unwrap();
        assert_eq!(r.verdict, Verdict::Uniform);
        assert_eq!(r.table.unwrap().get_index(0), &LimitValue::Value(ratio(1, 35)));
    }

    #[test]
    fn base_six_modulus_twelve() {
        let spec = ShiftSpec::full(6, &[1, 2, 4]).unwrap();
        let r = chain_direct(&spec, &GAdditiveFamily::identity(6, 12).unwrap()).unwrap();
        assert_eq!(r.verdict, Verdict::NonUniformLimit);
        let t = r.table.unwrap();
        for b in 0..12u64 {
            let want = match b {
                1 | 2 | 4 => ratio(2, 9),
                7 | 8 | 10 => ratio(1, 9),
                _ => ratio(0, 1),
            };
            assert_eq!(t.get(&ResidueVector(vec![b])), &LimitValue::Value(want), "b = {b}");
        }
    }

    #[test]
    fn all_digits_with_common_factor() {
        let spec = ShiftSpec::full(10, &(0..10).collect::<Vec<_>>()).unwrap();
        let r = chain_direct(&spec, &GAdditiveFamily::id_sum(10, 4, 3).unwrap()).unwrap();
        assert_eq!(r.verdict, Verdict::Uniform);
        let r = chain_direct(
            &ShiftSpec::full(10, &[1, 3]).unwrap(),
            &GAdditiveFamily::identity(10, 6).unwrap(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Unsupported);
    }

    #[test]
    fn agrees_with_trichotomy() {
        for (g, d, a, a2) in [
            (10u32, vec![1u8, 2, 4], 3u64, 1u64),
            (10, vec![0, 3, 6, 9], 3, 1),
            (10, vec![1, 4, 7], 3, 1),
            (7, vec![1, 3], 1, 4),
            (10, vec![1, 2], 3, 2),
            (5, vec![0, 2], 2, 3),
        ] {
            let m = analyze_missing_digits(g, &d, a, a2).unwrap();
            let c = chain_direct(
                &ShiftSpec::full(g, &d).unwrap(),
                &GAdditiveFamily::id_sum(g, a, a2).unwrap(),
            )
            .unwrap();
            assert_eq!(m.verdict, c.verdict, "{g} {d:?} {a} {a2}");
            assert_eq!(m.table, c.table, "{g} {d:?} {a} {a2}");
        }
    }

    #[test]
    fn sft_pairs() {
        let r = analyze_sft(&ShiftSpec::neighbour_digits(10).unwrap(), 3, 7).unwrap();
        assert_eq!(r.verdict, Verdict::Uniform);
        assert_eq!(r.method, Method::Sft);
        for (x, y) in [(0u8, 3u8), (5, 9), (7, 8)] {
            let spec = example_four_by_four(x, y);
            let r = analyze_sft(&spec, 3, 7).unwrap();
            assert_eq!(r.verdict, Verdict::Uniform);
            let c = chain_direct(&spec, &GAdditiveFamily::id_sum(10, 3, 7).unwrap()).unwrap();
            assert_eq!(c.verdict, Verdict::Uniform);
        }
    }

    #[test]
    fn sft_fallback() {
        // Digits 1 and 3 differ by 2, so no pair is coprime to a' = 2.
        let spec = ShiftSpec::sft1(10, &[1, 3], &[[1, 1], [1, 3], [3, 1], [3, 3]]).unwrap();
        let r = analyze_sft(&spec, 1, 2).unwrap();
        assert_eq!(r.method, Method::ChainDirect);
        assert_eq!(r.verdict, Verdict::ZeroOrNonexistent);
    }

    fn example_four_by_four(x: u8, y: u8) -> ShiftSpec {
        ShiftSpec::sft1(
            10,
            &[1, 2, x, y],
            &[[1, 1], [1, 2], [2, 1], [2, x], [x, x], [x, y], [y, 2], [y, y]],
        )
        .unwrap()
    }
}
