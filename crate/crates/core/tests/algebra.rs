//! Exhaustive operator laws over every universe of up to six values and
//! every pair of subsets within it.

use std::collections::BTreeSet;

use relmat::{apply_operator, Operator, OperatorKind, TraitId, ValueSet};

const T: TraitId = TraitId(0);

fn subsets(of: u128) -> Vec<u128> {
    // Enumerates submasks of `of`, including 0 and `of`.
    let mut out = vec![0];
    let mut s = of;
    while s != 0 {
        out.push(s);
        s = (s - 1) & of;
    }
    out
}

fn set(bits: u128) -> ValueSet {
    ValueSet::from_bits(T, bits)
}

fn apply(kind: OperatorKind, a: u128, b: u128, u: u128) -> u128 {
    apply_operator(Operator::set(kind), &set(a), &set(b), &set(u)).expect("total on subsets").bits()
}

fn members(bits: u128) -> BTreeSet<u32> {
    (0..128).filter(|i| bits >> i & 1 == 1).collect()
}

/// Visits every (universe, a, b) with |universe| <= 6 inside a domain of 6.
fn for_all(mut f: impl FnMut(u128, u128, u128)) {
    for u in 0..(1u128 << 6) {
        let subs = subsets(u);
        for &a in &subs {
            for &b in &subs {
                f(u, a, b);
            }
        }
    }
}

#[test]
fn set_operators_are_total_and_stay_in_universe() {
    let mut visited = 0usize;
    for_all(|u, a, b| {
        for k in OperatorKind::SET_KINDS {
            let r = apply(k, a, b, u);
            assert_eq!(r & !u, 0, "{k:?} left the universe");
        }
        visited += 1;
    });
    // Sum over universes U of 4^|U| is 5^6.
    assert_eq!(visited, 15625);
}

#[test]
fn commutativity() {
    for_all(|u, a, b| {
        for k in OperatorKind::SET_KINDS {
            assert_eq!(apply(k, a, b, u), apply(k, b, a, u), "{k:?}");
        }
    });
}

#[test]
fn symdiff_is_an_involution() {
    for_all(|u, a, b| {
        let once = apply(OperatorKind::SymDiff, a, b, u);
        assert_eq!(apply(OperatorKind::SymDiff, once, b, u), a);
    });
}

#[test]
fn not_kinds_complement_their_base() {
    let pairs = [
        (OperatorKind::NotUnion, OperatorKind::Union),
        (OperatorKind::NotIntersection, OperatorKind::Intersection),
        (OperatorKind::NotSymDiff, OperatorKind::SymDiff),
    ];
    for_all(|u, a, b| {
        for (not, base) in pairs {
            assert_eq!(apply(not, a, b, u), u & !apply(base, a, b, u), "{not:?}");
        }
    });
}

#[test]
fn agrees_with_btreeset_definitions() {
    for_all(|u, a, b| {
        let (su, sa, sb) = (members(u), members(a), members(b));
        let comp = |s: BTreeSet<u32>| -> BTreeSet<u32> { su.difference(&s).copied().collect() };
        let union: BTreeSet<u32> = sa.union(&sb).copied().collect();
        let inter: BTreeSet<u32> = sa.intersection(&sb).copied().collect();
        let sym: BTreeSet<u32> = sa.symmetric_difference(&sb).copied().collect();
        assert_eq!(members(apply(OperatorKind::Union, a, b, u)), union);
        assert_eq!(members(apply(OperatorKind::Intersection, a, b, u)), inter);
        assert_eq!(members(apply(OperatorKind::SymDiff, a, b, u)), sym);
        assert_eq!(members(apply(OperatorKind::NotUnion, a, b, u)), comp(union));
        assert_eq!(members(apply(OperatorKind::NotIntersection, a, b, u)), comp(inter));
        assert_eq!(members(apply(OperatorKind::NotSymDiff, a, b, u)), comp(sym));
    });
}

#[test]
fn operands_outside_universe_are_rejected() {
    for u in 0..(1u128 << 5) {
        let outside = 1u128 << 5;
        for k in OperatorKind::SET_KINDS {
            assert!(apply_operator(Operator::set(k), &set(outside), &set(0), &set(u)).is_err());
        }
    }
}
