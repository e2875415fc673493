//! Algebraic laws of the flag combination function, shared by the property
//! tests and the acceptance run.

use finhors::types::comp;
use finhors::OrderSet;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type Inputs = Vec<(OrderSet, u64)>;

fn subset_below(k: u32) -> impl Strategy<Value = OrderSet> {
    (0u16..(1u16 << k)).prop_map(OrderSet::from_bits)
}

/// An order up to 5, a marker set below it and inputs whose flags lie in `0..=m`.
pub fn case() -> impl Strategy<Value = (u32, OrderSet, Inputs)> {
    (0u32..=5).prop_flat_map(|m| {
        (
            Just(m),
            subset_below(m),
            prop::collection::vec((subset_below(m + 1), 0u64..20), 0..6),
        )
    })
}

/// Like [`case`], with input flags strictly below the order.
pub fn strict_case(max: u32) -> impl Strategy<Value = (u32, OrderSet, Inputs)> {
    (0u32..=max).prop_flat_map(|m| {
        (
            Just(m),
            subset_below(m),
            prop::collection::vec((subset_below(m), 0u64..20), 0..6),
        )
    })
}

/// Straight transcription of the recurrence with explicit per-order tables.
pub fn reference(m: u32, markers: OrderSet, inputs: &[(OrderSet, u64)]) -> (OrderSet, u64) {
    let m = m as usize;
    let mut fresh = vec![0u64; m + 1];
    let mut total = vec![0u64; m + 1];
    for n in 0..=m {
        if n > 0 && markers.contains(n as u32 - 1) {
            fresh[n] = total[n - 1];
        }
        total[n] = fresh[n] + inputs.iter().filter(|(f, _)| f.contains(n as u32)).count() as u64;
    }
    let flags = (0..m as u32)
        .filter(|&n| total[n as usize] > 0 && !markers.contains(n))
        .collect();
    (flags, fresh[m] + inputs.iter().map(|(_, c)| c).sum::<u64>())
}

pub fn matches_reference(m: u32, markers: OrderSet, inputs: &Inputs) -> Result<(), TestCaseError> {
    prop_assert_eq!(comp(m, markers, inputs).unwrap(), reference(m, markers, inputs));
    Ok(())
}

/// Raising input counters raises the result counter by the same total and
/// leaves the flags alone.
pub fn additive(m: u32, markers: OrderSet, inputs: &Inputs, extra: &[u64]) -> Result<(), TestCaseError> {
    let (flags, counter) = comp(m, markers, inputs).unwrap();
    let raised: Inputs = inputs.iter().zip(extra).map(|(&(f, c), &k)| (f, c + k)).collect();
    let added: u64 = extra.iter().take(inputs.len()).sum();
    prop_assert_eq!(comp(m, markers, &raised).unwrap(), (flags, counter + added));
    Ok(())
}

/// One input with flags disjoint from the markers, the others flag-free:
/// the flags survive unchanged and only counters add up. The orders below
/// `m` are split into flags and markers by two bit masks.
pub fn flag_free_rest(m: u32, bits: u16, assign: u16, e: u64, ds: &[u64]) -> Result<(), TestCaseError> {
    let below = OrderSet::below(m).bits();
    let flags = OrderSet::from_bits(bits & assign & below);
    let markers = OrderSet::from_bits(bits & !assign & below);
    let mut inputs = vec![(flags, e)];
    inputs.extend(ds.iter().map(|&d| (OrderSet::EMPTY, d)));
    prop_assert_eq!(comp(m, markers, &inputs).unwrap(), (flags, e + ds.iter().sum::<u64>()));
    Ok(())
}

/// Going one order up, positive counters turn into flags of the old top
/// order and the new counter is zero.
pub fn lift(m: u32, markers: OrderSet, inputs: &Inputs) -> Result<(), TestCaseError> {
    let (flags, counter) = comp(m, markers, inputs).unwrap();
    let up = |f: OrderSet, c: u64| if c > 0 { f.union(OrderSet::singleton(m)) } else { f };
    let lifted: Inputs = inputs.iter().map(|&(f, c)| (up(f, c), 0)).collect();
    prop_assert_eq!(comp(m + 1, markers, &lifted).unwrap(), (up(flags, counter), 0));
    Ok(())
}

/// Going one order down, flags of the dropped top order may be absorbed
/// into counters, and the result counter absorbs at least as many.
pub fn lower(m: u32, markers: OrderSet, inputs: &Inputs, slack: &[u64]) -> Result<(), TestCaseError> {
    if m == 0 {
        return Ok(());
    }
    let (flags, counter) = comp(m, markers, inputs).unwrap();
    let top = m - 1;
    let lowered: Inputs = inputs
        .iter()
        .zip(slack)
        .map(|(&(f, c), &s)| (f.restrict_below(top), c + u64::from(f.contains(top)) + s))
        .collect();
    let (low_flags, low_counter) = comp(top, markers.restrict_below(top), &lowered).unwrap();
    prop_assert_eq!(low_flags, flags.restrict_below(top));
    prop_assert!(low_counter >= counter + u64::from(flags.contains(top)));
    Ok(())
}
