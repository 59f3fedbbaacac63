mod common;

use common::random_instances;
use kxp_core::oracle::{oracle_minimal_cxps, DEFAULT_CAP};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weakening_a_step_keeps_earlier_actions(seed in 0u64..100_000) {
        let inst = &random_instances(seed, 1)[0];
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        prop_assert_eq!(common::prefix_kept(&mut rng, inst), Ok(()));
    }

    #[test]
    fn with_a_fixed_suffix_the_weakened_step_changes_first(seed in 0u64..100_000) {
        let inst = &random_instances(seed, 1)[0];
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        prop_assert_eq!(common::first_change(&mut rng, inst), Ok(()));
    }

    #[test]
    fn minimal_contrastive_examples_are_contiguous(seed in 0u64..100_000) {
        let inst = &random_instances(seed, 1)[0];
        for c in oracle_minimal_cxps(&inst.sys, &inst.net, &inst.exec, common::SEM, DEFAULT_CAP).unwrap() {
            prop_assert_eq!(common::cxp_shape(inst, &c), Ok(()));
        }
    }
}
