use super::{OrderSet, TypeEnv, TypeError};

/// Combines the flag information of a rule's inputs at derivation order `m`
/// with the marker orders `markers` visible at the current node.
///
/// For each order `n` from `0` to `m`, `placed[n]` flags of order `n` are
/// created here: as many as there were order-`n-1` flags when `n-1` is a
/// marker order, none otherwise. Flags of order `n` reported by the inputs
/// add to `total[n]`. The result keeps the non-marker orders below `m`
/// with a positive total, and the counter adds the order-`m` flags placed
/// here to the inputs' counters.
pub fn comp(m: u32, markers: OrderSet, inputs: &[(OrderSet, u64)]) -> Result<(OrderSet, u64), TypeError> {
    if m > super::MAX_ORDER {
        return Err(TypeError::ResourceLimit(format!("order {m} is too large")));
    }
    if !markers.is_subset(OrderSet::below(m)) {
        return Err(TypeError::PreconditionViolation(format!(
            "marker orders {markers} must lie below {m}"
        )));
    }
    let allowed = OrderSet::below(m + 1);
    if let Some((f, _)) = inputs.iter().find(|(f, _)| !f.is_subset(allowed)) {
        return Err(TypeError::PreconditionViolation(format!(
            "flag orders {f} must lie in 0..={m}"
        )));
    }
    let mut flags = OrderSet::EMPTY;
    let mut previous_total = 0u64;
    let mut placed_top = 0u64;
    for n in 0..=m {
        let placed = if n > 0 && markers.contains(n - 1) {
            previous_total
        } else {
            0
        };
        let reported = inputs.iter().filter(|(f, _)| f.contains(n)).count() as u64;
        let total = placed + reported;
        if n < m && total > 0 && !markers.contains(n) {
            flags.insert(n);
        }
        if n == m {
            placed_top = placed;
        }
        previous_total = total;
    }
    let counter = inputs
        .iter()
        .try_fold(placed_top, |acc, (_, c)| acc.checked_add(*c))
        .ok_or_else(|| TypeError::ResourceLimit("flag counter overflow".into()))?;
    Ok((flags, counter))
}

/// Whether `env` may be split into `parts`: each part is contained in
/// `env`, and every full type of `env` that provides markers occurs in some
/// part. Marker-free full types may be dropped or duplicated.
pub fn split(env: &TypeEnv, parts: &[&TypeEnv]) -> bool {
    if !parts.iter().all(|p| p.is_subset(env)) {
        return false;
    }
    env.iter().all(|(v, set)| {
        set.iter()
            .filter(|t| !t.markers.is_empty())
            .all(|t| parts.iter().any(|p| p.get(v).is_some_and(|s| s.contains(t))))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{FullType, IType};

    fn set(xs: &[u32]) -> OrderSet {
        xs.iter().copied().collect()
    }

    #[test]
    fn constant_under_order_zero_marker() {
        assert_eq!(
            comp(2, set(&[0]), &[(set(&[0]), 0), (set(&[]), 0)]).unwrap(),
            (set(&[1]), 0)
        );
    }

    #[test]
    fn constant_under_both_markers() {
        assert_eq!(
            comp(2, set(&[0, 1]), &[(set(&[0]), 0), (set(&[]), 0)]).unwrap(),
            (set(&[]), 1)
        );
    }

    #[test]
    fn application_meeting_flag_and_marker() {
        assert_eq!(
            comp(2, set(&[0, 1]), &[(set(&[]), 0), (set(&[1]), 0)]).unwrap(),
            (set(&[]), 1)
        );
    }

    #[test]
    fn order_zero_adds_counters() {
        for (c1, c2) in [(0, 0), (3, 4), (10, 1)] {
            assert_eq!(
                comp(0, set(&[]), &[(set(&[]), 1), (set(&[]), c1), (set(&[]), c2)]).unwrap(),
                (set(&[]), 1 + c1 + c2)
            );
        }
    }

    #[test]
    fn nothing_in_nothing_out() {
        for m in 0..5 {
            assert_eq!(comp(m, set(&[]), &[(set(&[]), 0)]).unwrap(), (set(&[]), 0));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(comp(1, set(&[1]), &[]).is_err());
        assert!(comp(1, set(&[]), &[(set(&[2]), 0)]).is_err());
        // F_i may mention m itself
        assert!(comp(1, set(&[]), &[(set(&[1]), 0)]).is_ok());
    }

    fn ft(k: u32, f: &[u32], m: &[u32]) -> FullType {
        FullType::new(k, set(f), set(m), IType::Ground).unwrap()
    }

    #[test]
    fn split_examples() {
        let with_markers = ft(1, &[], &[0]);
        let marker_free = ft(1, &[0], &[]);
        let env = TypeEnv::singleton(0, with_markers.clone());
        assert!(split(&env, &[&env]));
        assert!(!split(&env, &[&TypeEnv::empty()]));
        let free = TypeEnv::singleton(0, marker_free.clone());
        assert!(split(&free, &[&TypeEnv::empty()]));
        // duplicating a marker-free type is fine
        assert!(split(&free, &[&free, &free]));
        // parts must be contained in the whole
        assert!(!split(&TypeEnv::empty(), &[&free]));
        let mut both = env.clone();
        both.insert(0, marker_free);
        assert!(split(&both, &[&env]));
    }
}
