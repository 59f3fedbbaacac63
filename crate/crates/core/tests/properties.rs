mod common;

use std::collections::BTreeSet;

use common::{random_instances, SEM};
use kxp_core::envs::random::{random_instance, RandomParams};
use kxp_core::explain::{method1, method3_minimal, method4, minimum_hitting_set, CxpCatalog, ExplainOptions, Target};
use kxp_core::model::{MaskRole, StepMask};
use kxp_core::oracle::{oracle_minimum_explanation_size, oracle_query_sat, DEFAULT_CAP};
use kxp_core::queries::explanation_query_multi;
use kxp_core::rational::{parse, to_text, Rational};
use kxp_core::verifier::{check_witness, solve, SolveOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64) -> kxp_core::envs::random::Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(inst) = random_instance(&mut rng, &RandomParams::default()) {
            return inst;
        }
    }
}

fn family() -> impl Strategy<Value = (usize, Vec<BTreeSet<usize>>)> {
    (1usize..=10).prop_flat_map(|n| (Just(n), prop::collection::vec(prop::collection::btree_set(0..n, 1..=3), 0..8)))
}

fn mask(k: usize, m: usize) -> impl Strategy<Value = StepMask> {
    prop::collection::vec(prop::collection::btree_set(0..m, 0..=m), k)
        .prop_map(|steps| StepMask::new(MaskRole::Explanation, steps))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hitting_set_is_optimal((n, fam) in family()) {
        let hit = minimum_hitting_set(&fam).unwrap();
        prop_assert!(fam.iter().all(|s| !s.is_disjoint(&hit)));
        prop_assert_eq!(hit.len(), common::brute_force_mhs(&fam, n));
    }

    #[test]
    fn rational_text_round_trip(p in -10_000i64..10_000, q in 1i64..500) {
        let r = Rational::new(p.into(), q.into());
        prop_assert_eq!(parse(&to_text(&r)).unwrap(), r);
    }

    #[test]
    fn complement_is_an_involution(m in mask(3, 5)) {
        let c = m.complement(5);
        prop_assert_eq!(c.size() + m.size(), 15);
        prop_assert!(!c.intersects(&m));
        prop_assert_eq!(c.complement(5).steps, m.steps);
    }

    #[test]
    fn catalog_stays_an_antichain(masks in prop::collection::vec(mask(2, 4), 0..12)) {
        let mut catalog = CxpCatalog::new();
        for m in masks.into_iter().filter(|m| !m.is_all_empty()) {
            catalog.insert(m);
        }
        for a in &catalog.members {
            prop_assert_eq!(a.role, MaskRole::Contrastive);
            for b in &catalog.members {
                prop_assert!(a == b || !a.is_subset_of(b));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn verifier_matches_enumeration(seed in 0u64..10_000, pins in prop::collection::vec(any::<bool>(), 12)) {
        let inst = instance(seed);
        let (k, m) = (inst.exec.len(), inst.sys.feature_count());
        let pairs = common::all_pairs(k, m).into_iter().zip(pins).filter(|(_, b)| *b).map(|(p, _)| p);
        let e = StepMask::from_pairs(MaskRole::Explanation, k, pairs);
        let u = explanation_query_multi(&inst.sys, &inst.net, &inst.exec, &e, SEM).unwrap();
        let (verdict, _) = solve(&u.query, &SolveOptions::default()).unwrap();
        let expected = oracle_query_sat(&u.query, DEFAULT_CAP).unwrap().is_some();
        prop_assert_eq!(verdict.is_sat(), expected);
        prop_assert_eq!(common::oracle_explains(&inst, &e), !expected);
        if let Some(w) = verdict.witness() {
            prop_assert!(check_witness(&u.query, &w.values).is_ok());
        }
    }

    #[test]
    fn methods_agree_with_oracle(seed in 0u64..10_000) {
        let inst = instance(seed);
        let (sys, net, exec) = (&inst.sys, &inst.net, &inst.exec);
        let opts = ExplainOptions::default();
        let best = oracle_minimum_explanation_size(sys, net, exec, SEM, DEFAULT_CAP).unwrap();
        prop_assert_eq!(method1(sys, net, exec, Target::Minimum, &opts).unwrap().size, best);
        prop_assert_eq!(method4(sys, net, exec, &opts).unwrap().0.size, best);
        let m3 = method3_minimal(sys, net, exec, &opts).unwrap().mask;
        prop_assert!(common::oracle_explains(&inst, &m3));
        for (i, f) in m3.pairs().collect::<Vec<_>>() {
            prop_assert!(!common::oracle_explains(&inst, &m3.without(i, f)));
        }
    }
}

#[test]
fn instance_generator_is_deterministic() {
    let a = random_instances(5, 3);
    let b = random_instances(5, 3);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.exec, y.exec);
        assert_eq!(x.net, y.net);
    }
}
