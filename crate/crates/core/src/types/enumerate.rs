use std::collections::BTreeSet;

use super::{FullType, IType, OrderSet, TypeError, MAX_ORDER};
use crate::term::Sort;

/// Disjoint pairs `(F, M)` of subsets of `{0..k-1}`, in a fixed order.
pub(crate) fn disjoint_pairs(k: u32) -> Vec<(OrderSet, OrderSet)> {
    let mut out = Vec::new();
    let total = 3u32.pow(k);
    for code in 0..total {
        let mut rest = code;
        let mut flags = OrderSet::EMPTY;
        let mut markers = OrderSet::EMPTY;
        for n in 0..k {
            match rest % 3 {
                1 => flags.insert(n),
                2 => markers.insert(n),
                _ => {}
            }
            rest /= 3;
        }
        out.push((flags, markers));
    }
    out
}

/// Number of types fitting `sort`, saturating.
fn count_itypes(sort: &Sort) -> u128 {
    match sort {
        Sort::Ground => 1,
        Sort::Arrow(arg, res) => {
            let args = count_full_types(arg, sort.order());
            let subsets = if args >= 127 { u128::MAX } else { 1u128 << args };
            subsets.saturating_mul(count_itypes(res))
        }
    }
}

/// Number of full types of `sort` with order `k`, saturating.
pub fn count_full_types(sort: &Sort, k: u32) -> u128 {
    3u128.saturating_pow(k).saturating_mul(count_itypes(sort))
}

/// Every type fitting `sort`, failing if there are more than `limit`.
pub fn enumerate_itypes(sort: &Sort, limit: usize) -> Result<Vec<IType>, TypeError> {
    let n = count_itypes(sort);
    if n > limit as u128 {
        return Err(TypeError::ResourceLimit(format!(
            "sort {sort} has {} types, more than the limit {limit}",
            if n == u128::MAX { "too many".to_string() } else { n.to_string() }
        )));
    }
    Ok(itypes_unchecked(sort))
}

fn itypes_unchecked(sort: &Sort) -> Vec<IType> {
    match sort {
        Sort::Ground => vec![IType::Ground],
        Sort::Arrow(arg, res) => {
            let args = full_types_unchecked(arg, sort.order());
            let results = itypes_unchecked(res);
            let mut out = Vec::new();
            for mask in 0u64..(1u64 << args.len()) {
                let set: BTreeSet<FullType> = args
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, t)| t.clone())
                    .collect();
                for r in &results {
                    out.push(IType::arrow(set.clone(), r.clone()));
                }
            }
            out
        }
    }
}

fn full_types_unchecked(sort: &Sort, k: u32) -> Vec<FullType> {
    let mut out = Vec::new();
    for itype in itypes_unchecked(sort) {
        for (flags, markers) in disjoint_pairs(k) {
            out.push(FullType {
                order: k,
                flags,
                markers,
                itype: itype.clone(),
            });
        }
    }
    out
}

/// All full types of `sort` with order `k`, each once, in a deterministic
/// order. Fails with a resource error instead of truncating when there are
/// more than `limit`.
pub fn enumerate_full_types(sort: &Sort, k: u32, limit: usize) -> Result<Vec<FullType>, TypeError> {
    if k > MAX_ORDER {
        return Err(TypeError::ResourceLimit(format!("order {k} is too large")));
    }
    if k < sort.order() {
        return Err(TypeError::PreconditionViolation(format!(
            "order {k} is below the order of sort {sort}"
        )));
    }
    let n = count_full_types(sort, k);
    if n > limit as u128 {
        return Err(TypeError::ResourceLimit(format!(
            "sort {sort} at order {k} has more than {limit} full types"
        )));
    }
    Ok(full_types_unchecked(sort, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_counts() {
        let one = enumerate_full_types(&Sort::Ground, 1, 100).unwrap();
        assert_eq!(one.len(), 3);
        let expected: BTreeSet<FullType> = [
            FullType::ground(1),
            FullType::new(1, OrderSet::singleton(0), OrderSet::EMPTY, IType::Ground).unwrap(),
            FullType::new(1, OrderSet::EMPTY, OrderSet::singleton(0), IType::Ground).unwrap(),
        ]
        .into();
        assert_eq!(one.iter().cloned().collect::<BTreeSet<_>>(), expected);
        assert_eq!(enumerate_full_types(&Sort::Ground, 0, 100).unwrap(), vec![FullType::ground(0)]);
        assert_eq!(enumerate_full_types(&Sort::Ground, 2, 100).unwrap().len(), 9);
    }

    #[test]
    fn brute_force_pair_count() {
        for k in 0..5 {
            let mut n = 0;
            for f in 0u16..(1 << k) {
                for m in 0u16..(1 << k) {
                    if f & m == 0 {
                        n += 1;
                    }
                }
            }
            assert_eq!(disjoint_pairs(k).len(), n);
            let distinct: BTreeSet<_> = disjoint_pairs(k).into_iter().collect();
            assert_eq!(distinct.len(), n);
        }
    }

    #[test]
    fn arrow_types_fit_and_are_distinct() {
        let s = Sort::first_order(1);
        // 2^3 subsets of the order-1 ground full types
        let ts = enumerate_itypes(&s, 100).unwrap();
        assert_eq!(ts.len(), 8);
        assert!(ts.iter().all(|t| t.fits(&s)));
        let fts = enumerate_full_types(&s, 2, 1000).unwrap();
        assert_eq!(fts.len(), 72);
        assert_eq!(fts.iter().collect::<BTreeSet<_>>().len(), 72);
    }

    #[test]
    fn limits_are_reported() {
        let s = Sort::arrow(Sort::first_order(1), Sort::Ground);
        assert!(matches!(
            enumerate_full_types(&s, 2, 1000),
            Err(TypeError::ResourceLimit(_))
        ));
        assert!(enumerate_full_types(&Sort::first_order(1), 0, 10).is_err());
    }
}
