//! Irreducibility, periodicity, limits and class decomposition of the chains.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::chain::matrix::{RationalDistribution, RationalMatrix};
use crate::chain::system::ChainSystem;
use crate::error::{Error, Result};
use crate::graph;

/// Support-graph diagnostics of one `M_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MarkovVerdict {
    pub i: usize,
    pub irreducible: bool,
    pub aperiodic: bool,
    /// Period of the chain when irreducible, else 0.
    pub period: usize,
    pub sccs: Vec<Vec<usize>>,
}

/// Verdicts for one full period of indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MarkovCondition {
    pub verdicts: Vec<MarkovVerdict>,
}

impl MarkovCondition {
    pub fn holds(&self) -> bool {
        self.verdicts.iter().all(|v| v.irreducible && v.aperiodic)
    }
}

pub fn matrix_verdict(i: usize, m: &RationalMatrix) -> MarkovVerdict {
    let succ = m.support();
    let sccs = graph::strongly_connected_components(&succ);
    let irreducible = sccs.len() == 1;
    let period = if irreducible {
        graph::component_period(&succ, &sccs[0])
    } else {
        0
    };
    MarkovVerdict {
        i,
        irreducible,
        aperiodic: period == 1,
        period,
        sccs,
    }
}

/// Checks every `M_i` in the stored range.
pub fn markov_condition(sys: &ChainSystem) -> MarkovCondition {
    MarkovCondition {
        verdicts: sys
            .stored_range()
            .map(|i| matrix_verdict(i, sys.stored_matrix(i).expect("stored index")))
            .collect(),
    }
}

/// A communicating class of the visited support.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassInfo {
    pub states: Vec<usize>,
    pub period: usize,
    /// Cyclic subclasses when `period > 1`.
    pub cyclic: Vec<Vec<usize>>,
}

/// Limit of `mu_i M_i^n` as `n` grows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitDistribution {
    pub i: usize,
    /// Visited support: forward closure of `supp mu_i`.
    pub support: Vec<usize>,
    pub exists: bool,
    /// Uniform value on the support when the limit exists and the support is one class.
    #[serde(skip)]
    pub value: Option<BigRational>,
    pub classes: Vec<ClassInfo>,
}

/// Forward closure of `supp mu_i` and its communicating classes with periods.
pub fn visited_classes(sys: &ChainSystem, i: usize) -> Result<(Vec<usize>, Vec<ClassInfo>)> {
    let mu = sys.initial_distribution(i)?;
    let m = sys.transition_matrix(i)?;
    let succ = m.support();
    let support = graph::forward_closure(&succ, mu.support());
    let sub = graph::induced(&succ, &support);
    let classes = graph::strongly_connected_components(&sub)
        .into_iter()
        .map(|c| {
            let period = graph::component_period(&sub, &c);
            let cyclic = if period > 1 {
                graph::cyclic_classes(&sub, &c, period)
                    .into_iter()
                    .map(|cl| cl.into_iter().map(|x| support[x]).collect())
                    .collect()
            } else {
                Vec::new()
            };
            ClassInfo {
                states: c.into_iter().map(|x| support[x]).collect(),
                period,
                cyclic,
            }
        })
        .collect();
    Ok((support, classes))
}

pub fn limit_distribution(sys: &ChainSystem, i: usize) -> Result<LimitDistribution> {
    let (support, classes) = visited_classes(sys, i)?;
    let exists = classes.iter().all(|c| c.period == 1);
    let value = (exists && classes.len() == 1)
        .then(|| BigRational::new(BigUint::one().into(), BigUint::from(support.len()).into()));
    Ok(LimitDistribution {
        i,
        support,
        exists,
        value,
        classes,
    })
}

/// One communicating class with its restricted chain and weight `mu_i(C)`.
#[derive(Clone, Debug)]
pub struct ChainClass {
    pub states: Vec<usize>,
    pub matrix: RationalMatrix,
    pub initial: RationalDistribution,
    pub weight: BigRational,
}

/// Splits the visited support into closed communicating classes.
pub fn decompose_classes(sys: &ChainSystem, i: usize) -> Result<Vec<ChainClass>> {
    let mu = sys.initial_distribution(i)?;
    let m = sys.transition_matrix(i)?;
    let succ = m.support();
    let (_, classes) = visited_classes(sys, i)?;
    classes
        .into_iter()
        .map(|c| {
            let member = graph::membership(m.size(), &c.states);
            if c.states.iter().any(|&s| succ[s].iter().any(|&t| !member[t])) {
                return Err(Error::Precondition(format!("visited class at i = {i} is not closed")));
            }
            let weight = mu.mass(&c.states);
            if weight.is_zero() {
                return Err(Error::Precondition(format!(
                    "visited class at i = {i} carries no initial mass"
                )));
            }
            Ok(ChainClass {
                matrix: m.restrict(&c.states),
                initial: mu.restrict(&c.states)?,
                weight,
                states: c.states,
            })
        })
        .collect()
}

/// `sum_j weight_j (mu_{i,j} M_j^n)` embedded back into the full state space.
pub fn recombine(sys: &ChainSystem, classes: &[ChainClass], n: u64) -> Result<Vec<BigRational>> {
    let mut out = vec![BigRational::zero(); sys.space().size()];
    for c in classes {
        let evolved = c.initial.mul_matrix(&c.matrix.pow(n)?);
        for (j, &s) in c.states.iter().enumerate() {
            out[s] += &c.weight * evolved.get(j);
        }
    }
    Ok(out)
}

/// Measured mixing rate on the visited support.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralGap {
    /// Estimated second-largest eigenvalue modulus; NaN unless irreducible and aperiodic.
    pub rho: f64,
    /// Total-variation distance to uniform at `n = 1..=n_max`.
    pub tv: Vec<f64>,
}

pub fn spectral_gap_estimate(sys: &ChainSystem, i: usize, n_max: usize) -> Result<SpectralGap> {
    let lim = limit_distribution(sys, i)?;
    let m = sys.transition_matrix(i)?;
    let support = &lim.support;
    let n = support.len();
    let p: Vec<Vec<f64>> = support
        .iter()
        .map(|&r| support.iter().map(|&c| m.get_f64(r, c)).collect())
        .collect();
    let step = |x: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; n];
        for (r, xr) in x.iter().enumerate() {
            if *xr != 0.0 {
                for (c, pc) in p[r].iter().enumerate() {
                    y[c] += xr * pc;
                }
            }
        }
        y
    };
    let mu = sys.initial_distribution(i)?.to_f64();
    let mut x: Vec<f64> = support.iter().map(|&s| mu[s]).collect();
    let u = 1.0 / n as f64;
    let mut tv = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        x = step(&x);
        tv.push(0.5 * x.iter().map(|v| (v - u).abs()).sum::<f64>());
    }
    let rho = if lim.exists && lim.classes.len() == 1 {
        deflated_rate(n, step)
    } else {
        f64::NAN
    };
    Ok(SpectralGap { rho, tv })
}

/// Decay rate of a zero-sum vector under repeated steps, uniform component projected out.
fn deflated_rate(n: usize, step: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    const WARMUP: usize = 200;
    const MEASURE: usize = 200;
    let center = |x: &mut Vec<f64>| {
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= mean);
    };
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x: Vec<f64> = (0..n).map(|j| ((j as f64 + 1.0) * 1.618_033_988_7).sin()).collect();
    center(&mut x);
    let mut log_growth = 0.0;
    for t in 0..WARMUP + MEASURE {
        let nx = norm(&x);
        if nx < 1e-300 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        x = step(&x);
        center(&mut x);
        if t >= WARMUP {
            let ny = norm(&x);
            if ny < 1e-300 {
                return 0.0;
            }
            log_growth += ny.ln();
        }
    }
    let rho = (log_growth / MEASURE as f64).exp();
    if rho < 1e-12 {
        0.0
    } else {
        rho
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::system::ChainOptions;
    use crate::numeral::GAdditiveFamily;
    use crate::shift::{chain_cover, ShiftSpec};

    fn system(spec: &ShiftSpec, fam: GAdditiveFamily) -> ChainSystem {
        ChainSystem::build(chain_cover(spec).unwrap(), fam, ChainOptions::default()).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn binary_full_shift_mixes_in_one_step() {
        let sys = system(
            &ShiftSpec::full(3, &[0, 1]).unwrap(),
            GAdditiveFamily::identity(3, 2).unwrap(),
        );
        assert!(markov_condition(&sys).holds());
        let lim = limit_distribution(&sys, 1).unwrap();
        assert_eq!(lim.support, vec![0, 1]);
        assert_eq!(lim.value, Some(q(1, 2)));
        let gap = spectral_gap_estimate(&sys, 1, 5).unwrap();
        assert_eq!(gap.rho, 0.0);
        assert!(gap.tv.iter().all(|&t| t.abs() < 1e-15));
    }

    #[test]
    fn digits_one_four_seven() {
        let sys = system(
            &ShiftSpec::full(10, &[1, 4, 7]).unwrap(),
            GAdditiveFamily::identity(10, 3).unwrap(),
        );
        let mc = markov_condition(&sys);
        assert!(!mc.holds());
        assert_eq!((mc.verdicts[0].irreducible, mc.verdicts[0].period), (true, 3));
        let lim = limit_distribution(&sys, 1).unwrap();
        assert!(!lim.exists);
        assert_eq!(lim.classes.len(), 1);
        assert_eq!(lim.classes[0].period, 3);
        assert_eq!(lim.classes[0].cyclic.len(), 3);
        assert!(spectral_gap_estimate(&sys, 1, 3).unwrap().rho.is_nan());
    }

    #[test]
    fn multiples_of_three_digits() {
        let sys = system(
            &ShiftSpec::full(10, &[0, 3, 6, 9]).unwrap(),
            GAdditiveFamily::identity(10, 3).unwrap(),
        );
        let lim = limit_distribution(&sys, 1).unwrap();
        assert_eq!(lim.support, vec![0]);
        assert_eq!(lim.value, Some(q(1, 1)));
    }

    #[test]
    fn gelfond_decomposition() {
        let cover = chain_cover(&ShiftSpec::full(10, &(0..10).collect::<Vec<_>>()).unwrap()).unwrap();
        let fam = GAdditiveFamily::identity(10, 4).unwrap();
        let sys = ChainSystem::build(
            cover,
            fam,
            ChainOptions {
                period: None,
                ell: Some(1),
            },
        )
        .unwrap();
        let classes = decompose_classes(&sys, 1).unwrap();
        assert_eq!(classes.len(), 2);
        assert!(classes.iter().all(|c| c.weight == q(1, 2)));
        for n in 0..=6 {
            let evolved = sys.evolve(1, n).unwrap().values();
            assert_eq!(recombine(&sys, &classes, n).unwrap(), evolved);
        }
    }

    #[test]
    fn irreducible_single_class() {
        let sys = system(
            &ShiftSpec::full(3, &[0, 1]).unwrap(),
            GAdditiveFamily::identity(3, 2).unwrap(),
        );
        let classes = decompose_classes(&sys, 1).unwrap();
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].weight, q(1, 1));
    }

    #[test]
    fn even_shift_chain() {
        let sys = system(&ShiftSpec::even_shift(), GAdditiveFamily::id_sum(3, 5, 7).unwrap());
        let mc = markov_condition(&sys);
        assert!(mc.holds());
        let i = sys.ell();
        let gap = spectral_gap_estimate(&sys, i, 20).unwrap();
        assert!(gap.rho > 0.0 && gap.rho < 1.0);
        for w in gap.tv.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
        for (n, &t) in gap.tv.iter().enumerate() {
            assert!(t <= gap.tv[0] * gap.rho.powi(n as i32) * 1.1 + 1e-12, "n = {}", n + 1);
        }
    }
}
