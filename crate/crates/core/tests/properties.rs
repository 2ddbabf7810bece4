mod common;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use digitshift::analyze::{
    analyze_general_pair, analyze_missing_digits, analyze_naturals, analyze_sft, chain_direct, LimitValue, Verdict,
};
use digitshift::chain::{ChainOptions, ChainSystem};
use digitshift::dimension::entropy;
use digitshift::numeral::{
    euler_period, eval_family, find_eventual_period, integer_to_word, word_to_integer, GAdditiveFamily, Word,
};
use digitshift::oracle::{enumerate_set, Bound, Oracle};
use digitshift::shift::{
    build_cover, enumerate_words, fischer_cover, language_count, FischerCover, FollowerClass, ShiftSpec,
};

fn digit_set(g: u32, size: usize) -> impl Strategy<Value = Vec<u8>> {
    proptest::sample::subsequence((0..g as u8).collect::<Vec<_>>(), size)
}

fn accepts(fc: &FischerCover, v: usize, w: &Word) -> bool {
    w.digits().iter().try_fold(v, |s, &d| fc.cover().step(s, d)).is_some()
}

proptest! {
    #[test]
    fn integer_round_trip(n in 0u64..1_000_000, g in 2u32..=12) {
        let w = integer_to_word(&BigUint::from(n), g).unwrap();
        prop_assert_eq!(word_to_integer(&w).unwrap(), BigUint::from(n));
    }

    #[test]
    fn g_additivity(
        g in 2u32..=10,
        a in 1u64..=12,
        a_sum in 1u64..=7,
        u in proptest::collection::vec(0u8..10, 0..8),
        v in proptest::collection::vec(0u8..10, 0..8),
    ) {
        let u: Vec<u8> = u.into_iter().map(|d| d % g as u8).collect();
        let v: Vec<u8> = v.into_iter().map(|d| d % g as u8).collect();
        let fam = GAdditiveFamily::id_sum(g, a, a_sum).unwrap();
        let wu = Word::new(g, u.clone()).unwrap();
        let wv = Word::new(g, v).unwrap();
        let whole = eval_family(&fam, &wu.concat(&wv)).unwrap();
        let left = eval_family(&fam, &wu).unwrap();
        let right = fam.eval_at(&wv, u.len() as u64);
        let sum = fam.moduli().add(&left, &right);
        prop_assert_eq!(whole, sum);
    }

    #[test]
    fn eventual_period_sound(g in 2u32..=12, a in 1u64..=60, a_sum in 1u64..=9) {
        let fam = GAdditiveFamily::id_sum(g, a, a_sum).unwrap();
        let per = find_eventual_period(&fam).unwrap();
        for d in 0..g {
            for i in per.ell..per.ell + 3 * per.p {
                prop_assert_eq!(fam.value(d, (i + per.p) as u64), fam.value(d, i as u64));
            }
        }
    }

    #[test]
    fn constant_blocks_vanish(g in 2u32..=10, a in 1u64..=6, a_sum in 1u64..=6, d in 0u8..10, n in 1usize..=3) {
        prop_assume!(u64::from(g).gcd(&a) == 1);
        let d = d % g as u8;
        let p = euler_period(g, a, a_sum).unwrap() as usize;
        let w = Word::new(g, vec![d; n * p]).unwrap();
        let fam = GAdditiveFamily::id_sum(g, a, a_sum).unwrap();
        prop_assert_eq!(eval_family(&fam, &w).unwrap().0, vec![0, 0]);
    }
}

#[test]
fn fischer_covers_right_resolving_and_minimal() {
    let mut covers: Vec<FischerCover> = common::transitive_builtins()
        .into_iter()
        .map(|(_, s)| fischer_cover(&build_cover(&s).unwrap()).unwrap())
        .collect();
    covers.extend(common::random_regular_covers(7, 20).into_iter().map(|(_, fc)| fc));
    for fc in &covers {
        assert!(fc.is_right_resolving());
        for v in 0..fc.node_count() {
            let mut labels: Vec<u8> = fc.cover().out_edges(v).map(|e| e.label).collect();
            let before = labels.len();
            labels.sort_unstable();
            labels.dedup();
            assert_eq!(before, labels.len());
        }
        for u in 0..fc.node_count() {
            for v in u + 1..fc.node_count() {
                let w = fc.distinguishing_word(u, v).expect("distinct nodes are distinguished");
                assert_ne!(accepts(fc, u, w), accepts(fc, v, w));
            }
        }
    }
}

#[test]
fn language_counts_match_enumeration() {
    for (name, spec) in common::all_builtins() {
        let cover = build_cover(&spec).unwrap();
        let n_max = if cover.labels().len() > 3 { 8 } else { 12 };
        for n in 0..=n_max {
            let mut words = enumerate_words(&cover, n).unwrap();
            let count = words.len();
            words.sort_by(|a, b| a.digits().cmp(b.digits()));
            words.dedup();
            assert_eq!(count, words.len(), "{name} n={n}");
            assert_eq!(language_count(&cover, n).unwrap(), BigUint::from(count), "{name} n={n}");
        }
    }
}

#[test]
fn restricted_counts_grow_by_k() {
    let mut covers: Vec<FischerCover> = common::transitive_builtins()
        .into_iter()
        .filter_map(|(_, s)| {
            let fc = fischer_cover(&build_cover(&s).unwrap()).unwrap();
            fc.k().map(|_| fc)
        })
        .collect();
    covers.extend(common::random_regular_covers(11, 20).into_iter().map(|(_, fc)| fc));
    for fc in &covers {
        let k = BigUint::from(fc.k().unwrap());
        let ell = fc.shortest_synchronizing_length().unwrap().max(1);
        let base = fc.restricted_count(ell, ell).unwrap();
        for i in ell..=ell + 6 {
            assert_eq!(fc.restricted_count(ell, i).unwrap(), &base * k.pow((i - ell) as u32));
        }
    }
}

/// The even shift with every node duplicated.
fn doubled_even_shift() -> ShiftSpec {
    ShiftSpec::sofic(
        3,
        &["A1", "A2", "B1", "B2"],
        &[
            ("A1", "A2", 1),
            ("A2", "A1", 1),
            ("A1", "B1", 0),
            ("A2", "B2", 0),
            ("B1", "B2", 2),
            ("B2", "B1", 2),
            ("B1", "A1", 0),
            ("B2", "A2", 0),
        ],
    )
    .unwrap()
}

#[test]
fn redundant_presentation_same_language() {
    let mut specs = vec![doubled_even_shift()];
    specs.extend(common::random_regular_covers(13, 20).into_iter().map(|(s, _)| s));
    for spec in specs {
        let raw = build_cover(&spec).unwrap();
        let fc = fischer_cover(&raw).unwrap();
        for n in 0..=10 {
            assert_eq!(language_count(&raw, n).unwrap(), language_count(fc.cover(), n).unwrap());
        }
    }
    let merged = fischer_cover(&build_cover(&doubled_even_shift()).unwrap()).unwrap();
    assert_eq!(merged.node_count(), 2);
}

/// Chain systems over random regular covers with small random moduli.
fn random_systems(seed: u64, count: usize) -> Vec<ChainSystem> {
    let mut rng = StdRng::seed_from_u64(seed);
    common::random_regular_covers(seed, count)
        .into_iter()
        .map(|(spec, fc)| {
            use rand::Rng;
            let a = rng.gen_range(1..=5u64);
            let s = rng.gen_range(1..=3u64);
            let fam = GAdditiveFamily::id_sum(spec.base, a, s).unwrap();
            ChainSystem::build(fc, fam, ChainOptions::default()).unwrap()
        })
        .collect()
}

#[test]
fn chain_matrix_laws() {
    let mut systems = random_systems(17, 20);
    systems.push(
        ChainSystem::build(
            fischer_cover(&build_cover(&ShiftSpec::even_shift()).unwrap()).unwrap(),
            GAdditiveFamily::id_sum(3, 5, 7).unwrap(),
            ChainOptions::default(),
        )
        .unwrap(),
    );
    for sys in &systems {
        let kp = BigUint::from(sys.k()).pow(sys.p() as u32);
        let size = sys.space().size();
        for i in sys.stored_range() {
            let m = sys.transition_matrix(i).unwrap();
            assert!(m.is_doubly_stochastic());
            // Uniform invariance.
            let u = digitshift::chain::RationalDistribution::from_counts(vec![BigUint::one(); size]).unwrap();
            assert_eq!(u.mul_matrix(&m), u);
            // Partition law and the unnormalized counts.
            let ext = sys.extension_counts(i);
            for f in 0..sys.space().node_count() {
                assert_eq!(ext.out_total(f), kp);
            }
            let counts = sys.count_matrix(i);
            for r in 0..size {
                for c in 0..size {
                    assert_eq!(
                        m.get(r, c) * BigRational::from_integer(kp.clone().into()),
                        BigRational::from_integer(counts.get(r, c).clone().into())
                    );
                }
            }
        }
    }
}

#[test]
fn chain_evolution_laws() {
    for sys in random_systems(19, 20) {
        let p = sys.p();
        for i in [sys.ell(), sys.ell() + 1] {
            for n in 1..=2u64 {
                let t = i + n as usize * p;
                let evolved = sys.evolve(i, n).unwrap();
                assert_eq!(evolved, sys.initial_distribution(t).unwrap());
                if t > 12 {
                    continue;
                }
                // Integer counts by direct enumeration.
                let fc = sys.cover();
                let total = fc.restricted_count(sys.ell(), t).unwrap();
                let mut direct = vec![BigUint::zero(); sys.space().size()];
                for w in fc.restricted_enumerate(sys.ell(), t).unwrap() {
                    let r = eval_family(sys.family(), &w).unwrap();
                    let FollowerClass::Node(v) = fc.follower_class(&w).unwrap() else {
                        panic!("restricted word outside V");
                    };
                    direct[sys.space().index(sys.space().moduli().index_of(&r), v)] += 1u32;
                }
                for (s, d) in direct.iter().enumerate() {
                    let scaled = evolved.get(s) * BigRational::from_integer(total.clone().into());
                    assert!(scaled.is_integer());
                    assert_eq!(scaled.to_integer(), d.clone().into());
                }
            }
        }
    }
}

fn coprime_case() -> impl Strategy<Value = (u32, Vec<u8>, u64, u64)> {
    (3u32..=10, 2usize..=3, 1u64..=6, 1u64..=6)
        .prop_flat_map(|(g, size, a, s)| (Just(g), digit_set(g, size), Just(a), Just(s)))
        .prop_filter("coprime moduli", |(g, _, a, s)| {
            u64::from(*g).gcd(a) == 1 && a.gcd(s) == 1
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trichotomy_complete_and_consistent((g, d, a, s) in coprime_case()) {
        let r = analyze_missing_digits(g, &d, a, s).unwrap();
        prop_assert!(matches!(r.verdict, Verdict::Uniform | Verdict::SubgroupUniform | Verdict::ZeroOrNonexistent));
        let t = r.table.as_ref().unwrap();
        if r.verdict != Verdict::ZeroOrNonexistent {
            prop_assert!(t.total().is_one());
        }
        let spec = ShiftSpec::full(g, &d).unwrap();
        let direct = chain_direct(&spec, &GAdditiveFamily::id_sum(g, a, s).unwrap()).unwrap();
        prop_assert_eq!(direct.verdict, r.verdict);
        prop_assert_eq!(direct.table.as_ref(), r.table.as_ref());
    }

    #[test]
    fn general_pair_witnesses_check((g, d, a, s) in coprime_case()) {
        let r = analyze_general_pair(g, &d, a, s).unwrap();
        let fam = GAdditiveFamily::id_sum(g, a, s).unwrap();
        for w in &r.witnesses {
            if let (Some(word), Some(res)) = (&w.word, &w.residues) {
                prop_assert_eq!(&eval_family(&fam, word).unwrap(), res);
                prop_assert!(word.digits().iter().all(|x| d.contains(x)));
            }
        }
    }

    #[test]
    fn naturals_witnesses_check(g in 2u32..=10, a in 1u64..=8, s in 1u64..=8) {
        let r = analyze_naturals(g, a, s).unwrap();
        let fam = GAdditiveFamily::id_sum(g, a, s).unwrap();
        for w in &r.witnesses {
            let word = w.word.as_ref().unwrap();
            prop_assert_eq!(eval_family(&fam, word).unwrap().0, vec![0, 1 % s]);
        }
        prop_assert_eq!(r.verdict == Verdict::Uniform, !r.witnesses.is_empty());
    }

    #[test]
    fn sft_uniform_confirmed_by_chain(
        g in 3u32..=6,
        a in 1u64..=5,
        s in 1u64..=4,
        mask in proptest::collection::vec(any::<bool>(), 16),
    ) {
        prop_assume!(u64::from(g).gcd(&a) == 1 && a.gcd(&s) == 1);
        let digits: Vec<u8> = (0..g.min(4) as u8).collect();
        let n = digits.len();
        let allowed: Vec<[u8; 2]> = (0..n * n)
            .filter(|&idx| mask[idx] || idx % (n + 1) == 0 || idx % n == (idx / n + 1) % n)
            .map(|idx| [digits[idx / n], digits[idx % n]])
            .collect();
        let spec = ShiftSpec::sft1(g, &digits, &allowed).unwrap();
        let r = analyze_sft(&spec, a, s).unwrap();
        if r.verdict == Verdict::Uniform && r.method == digitshift::analyze::Method::Sft {
            let direct = chain_direct(&spec, &GAdditiveFamily::id_sum(g, a, s).unwrap()).unwrap();
            prop_assert_eq!(direct.verdict, Verdict::Uniform);
        }
    }
}

#[test]
fn oracle_matches_language_counts() {
    for (name, spec) in common::all_builtins() {
        let o = Oracle::new(&spec).unwrap();
        let fam = GAdditiveFamily::identity(spec.base, 3).unwrap();
        let m_max = if spec.base >= 6 { 6 } else { 10 };
        let mut previous: Vec<u128> = Vec::new();
        for m in 1..=m_max {
            let t = o.census(&fam, Bound::Power(m)).unwrap();
            assert_eq!(BigUint::from(t.total), o.count_below_power(m), "{name} m={m}");
            assert_eq!(t, o.census(&fam, Bound::Power(m)).unwrap());
            let set = enumerate_set(&spec, Bound::Power(m)).unwrap();
            assert!(set.starts_with(&previous));
            assert!(set.windows(2).all(|w| w[0] < w[1]));
            previous = set;
        }
    }
}

#[test]
fn full_shift_entropy() {
    for g in 2..=10u32 {
        for size in 1..=g as usize {
            let digits: Vec<u8> = (0..size as u8).collect();
            let h = entropy(&build_cover(&ShiftSpec::full(g, &digits).unwrap()).unwrap()).unwrap();
            assert!((h - (size as f64).ln()).abs() < 1e-12);
        }
    }
}

#[test]
fn zero_or_nonexistent_tables_have_dne() {
    let r = analyze_missing_digits(10, &[1, 4, 7], 3, 1).unwrap();
    assert_eq!(r.verdict, Verdict::ZeroOrNonexistent);
    assert!(r.table.unwrap().cells().iter().all(|c| *c == LimitValue::Dne));
}
