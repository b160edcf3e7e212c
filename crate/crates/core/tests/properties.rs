use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use adt_reduce::ast::{parse, print_script, Script};
use adt_reduce::backend::{solve, SolverConfig, SolverResult};
use adt_reduce::corpus::{random_script, random_signature};
use adt_reduce::models::{check_model, reconstruct};
use adt_reduce::normalize::{is_flat, normalize};
use adt_reduce::oracle::{bounded_search, OracleConfig, OracleVerdict};
use adt_reduce::pipeline::{decide, DecideConfig, Verdict};
use adt_reduce::reduce::{check_utvpi, reduce, simplify, Mode, ReduceOptions};
use adt_reduce::signature::EventuallyPeriodicSet;

const LIMIT: u64 = 60;

fn instance(seed: u64, size: bool) -> Script {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sig = random_signature(&mut rng, 0, 40);
    random_script(&mut rng, &sig, size)
}

fn periodic() -> impl Strategy<Value = EventuallyPeriodicSet> {
    (
        proptest::collection::btree_set(0u64..12, 0..4),
        0u64..12,
        1u64..5,
        proptest::collection::btree_set(0u64..5, 0..3),
    )
        .prop_map(|(e, t, p, r)| EventuallyPeriodicSet::from_parts(e, t, p, r))
}

fn members(s: &EventuallyPeriodicSet) -> BTreeSet<u64> {
    (0..=LIMIT).filter(|&n| s.contains(n)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn periodic_operations_match_explicit_sets(a in periodic(), b in periodic()) {
        let (ma, mb) = (members(&a), members(&b));
        let union: BTreeSet<u64> = ma.union(&mb).copied().collect();
        prop_assert_eq!(members(&a.union(&b)), union);
        let inter: BTreeSet<u64> = ma.intersection(&mb).copied().collect();
        prop_assert_eq!(members(&a.intersection(&b)), inter);
        let sum: BTreeSet<u64> = ma
            .iter()
            .flat_map(|x| mb.iter().map(move |y| x + y))
            .filter(|&n| n <= LIMIT)
            .collect();
        prop_assert_eq!(members(&a.sum(&b)), sum);
    }

    #[test]
    fn printed_scripts_parse_back(seed in any::<u64>(), size in any::<bool>()) {
        let s = instance(seed, size);
        let back = parse(&print_script(&s)).unwrap();
        prop_assert_eq!(back.formula(), s.formula());
        prop_assert_eq!(back.vars, s.vars);
    }

    #[test]
    fn normal_forms_are_flat_and_depth_reducts_utvpi(seed in any::<u64>()) {
        let s = instance(seed, false);
        let flat = normalize(&s.sig, &s.formula());
        prop_assert!(is_flat(&s.sig, &flat).is_ok());
        for opts in [ReduceOptions::default(), ReduceOptions::unoptimized()] {
            let r = reduce(&s.sig, &flat, Mode::Depth, &opts).unwrap();
            prop_assert!(check_utvpi(&r.formula).is_ok());
            let once = simplify(&r);
            prop_assert_eq!(simplify(&once).formula, once.formula);
        }
    }

    #[test]
    fn verdicts_match_the_oracle(seed in any::<u64>(), size in any::<bool>()) {
        let s = instance(seed, size);
        let f = s.formula();
        let verdict = decide(&s.sig, &f, &DecideConfig::default()).unwrap().verdict;
        let plain = DecideConfig { reduce: ReduceOptions::unoptimized(), ..DecideConfig::default() };
        let unopt = decide(&s.sig, &f, &plain).unwrap().verdict;
        prop_assert_eq!(verdict.name(), unopt.name());
        match (&verdict, bounded_search(&s.sig, &s.vars, &f, &OracleConfig::default()).unwrap()) {
            (Verdict::Unsat, OracleVerdict::Model(m)) => prop_assert!(false, "oracle model {m:?}"),
            (Verdict::Sat(m), _) => prop_assert!(check_model(&s.sig, m, &f).unwrap().holds),
            (Verdict::Unknown(why), _) => prop_assert!(false, "unknown: {why}"),
            _ => {}
        }
    }

    #[test]
    fn reconstructed_models_satisfy_the_input(seed in any::<u64>()) {
        let s = instance(seed, false);
        let f = s.formula();
        let flat = normalize(&s.sig, &f);
        let r = reduce(&s.sig, &flat, Mode::Depth, &ReduceOptions::default()).unwrap();
        let simplified = solve(&simplify(&r), &SolverConfig::default()).unwrap();
        let full = solve(&r, &SolverConfig::default()).unwrap();
        prop_assert_eq!(simplified.verdict(), full.verdict());
        if let SolverResult::Sat(m) = full {
            let model = reconstruct(&s.sig, &flat, &r, &m).unwrap();
            prop_assert!(check_model(&s.sig, &model, &f).unwrap().holds);
        }
    }
}
