//! Randomised checks of the flag combination function.

mod common;

use common::comp_laws::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn matches_the_table_recurrence((m, markers, inputs) in case()) {
        matches_reference(m, markers, &inputs)?;
    }

    #[test]
    fn counters_pass_through_additively((m, markers, inputs) in case(), extra in prop::collection::vec(0u64..50, 6)) {
        additive(m, markers, &inputs, &extra)?;
    }

    #[test]
    fn flag_free_inputs_only_add_counters(
        m in 0u32..=5,
        bits in any::<u16>(),
        assign in any::<u16>(),
        e in 0u64..20,
        ds in prop::collection::vec(0u64..20, 0..6),
    ) {
        flag_free_rest(m, bits, assign, e, &ds)?;
    }

    #[test]
    fn one_order_up_counters_become_flags((m, markers, inputs) in strict_case(4)) {
        lift(m, markers, &inputs)?;
    }

    #[test]
    fn one_order_down_counters_absorb_top_flags(
        (m, markers, inputs) in strict_case(5),
        slack in prop::collection::vec(0u64..5, 6),
    ) {
        lower(m, markers, &inputs, &slack)?;
    }
}
