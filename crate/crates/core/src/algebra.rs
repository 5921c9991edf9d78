//! The operator algebra: six set operators over value sets plus the
//! linear progression `y = a * x` over numeric traits.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vocab::{TraitId, TraitKind, Vocabulary, MAX_DOMAIN};

/// A set of value codes of one trait, stored as a bitmask.
///
/// For [`TraitId::PRESENCE`] the members are object identity keys.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ValueSet {
    pub trait_id: TraitId,
    bits: u128,
}

impl ValueSet {
    pub fn empty(trait_id: TraitId) -> Self {
        ValueSet { trait_id, bits: 0 }
    }

    pub fn from_bits(trait_id: TraitId, bits: u128) -> Self {
        ValueSet { trait_id, bits }
    }

    pub fn from_codes<I: IntoIterator<Item = u8>>(trait_id: TraitId, codes: I) -> Self {
        let mut s = Self::empty(trait_id);
        for c in codes {
            s.insert(c);
        }
        s
    }

    /// Every code of a domain of `size` values.
    pub fn full(trait_id: TraitId, size: usize) -> Self {
        let bits = if size >= MAX_DOMAIN { u128::MAX } else { (1u128 << size) - 1 };
        ValueSet { trait_id, bits }
    }

    pub fn bits(&self) -> u128 {
        self.bits
    }

    pub fn insert(&mut self, code: u8) {
        debug_assert!((code as usize) < MAX_DOMAIN);
        self.bits |= 1u128 << code;
    }

    pub fn contains(&self, code: u8) -> bool {
        (code as usize) < MAX_DOMAIN && self.bits & (1u128 << code) != 0
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_subset(&self, other: &ValueSet) -> bool {
        self.bits & !other.bits == 0
    }

    /// The single member, if there is exactly one.
    pub fn singleton(&self) -> Option<u8> {
        (self.len() == 1).then(|| self.bits.trailing_zeros() as u8)
    }

    pub fn codes(&self) -> impl Iterator<Item = u8> + '_ {
        let bits = self.bits;
        (0..MAX_DOMAIN as u32).filter(move |i| bits & (1u128 << i) != 0).map(|i| i as u8)
    }

    pub fn union(&self, other: &ValueSet) -> ValueSet {
        ValueSet { trait_id: self.trait_id, bits: self.bits | other.bits }
    }
}

impl fmt::Debug for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.trait_id)?;
        f.debug_set().entries(self.codes()).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorKind {
    Union,
    Intersection,
    SymDiff,
    NotUnion,
    NotIntersection,
    NotSymDiff,
    Progression,
}

impl OperatorKind {
    pub const SET_KINDS: [OperatorKind; 6] = [
        OperatorKind::Union,
        OperatorKind::Intersection,
        OperatorKind::SymDiff,
        OperatorKind::NotUnion,
        OperatorKind::NotIntersection,
        OperatorKind::NotSymDiff,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            OperatorKind::Union => "union",
            OperatorKind::Intersection => "intersection",
            OperatorKind::SymDiff => "symdiff",
            OperatorKind::NotUnion => "notunion",
            OperatorKind::NotIntersection => "notintersection",
            OperatorKind::NotSymDiff => "notsymdiff",
            OperatorKind::Progression => "progression",
        }
    }
}

/// An operator. `param` is the slope `a` of a progression and zero for
/// the set operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Operator {
    pub kind: OperatorKind,
    pub param: u8,
}

impl Operator {
    pub const fn set(kind: OperatorKind) -> Self {
        Operator { kind, param: 0 }
    }

    pub const fn progression(a: u8) -> Self {
        Operator { kind: OperatorKind::Progression, param: a }
    }

    pub fn is_progression(&self) -> bool {
        self.kind == OperatorKind::Progression
    }

    pub fn parse(s: &str) -> Option<Operator> {
        if let Some(rest) = s.strip_prefix("progression(") {
            let a: u8 = rest.strip_suffix(')')?.trim().parse().ok()?;
            return (a >= 1).then_some(Operator::progression(a));
        }
        OperatorKind::SET_KINDS
            .iter()
            .find(|k| k.keyword() == s)
            .map(|&k| Operator::set(k))
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            OperatorKind::Progression => write!(f, "progression({})", self.param),
            k => f.write_str(k.keyword()),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("operands belong to different traits ({left} vs {right})")]
    TraitMismatch { left: TraitId, right: TraitId },
    #[error("operand is not contained in the universe")]
    OutsideUniverse,
    #[error("progression is not a set operator")]
    WrongOperator,
    #[error("trait {0} is not numeric")]
    NotNumeric(TraitId),
    #[error("progression slope must be at least 1")]
    ZeroSlope,
    #[error("line position {0} is outside 1..=3")]
    BadPosition(u8),
}

/// Applies a set operator. `Not-` kinds complement within `universe`.
pub fn apply_operator(
    op: Operator,
    s1: &ValueSet,
    s2: &ValueSet,
    universe: &ValueSet,
) -> Result<ValueSet, AlgebraError> {
    for s in [s2, universe] {
        if s.trait_id != s1.trait_id {
            return Err(AlgebraError::TraitMismatch { left: s1.trait_id, right: s.trait_id });
        }
    }
    if !s1.is_subset(universe) || !s2.is_subset(universe) {
        return Err(AlgebraError::OutsideUniverse);
    }
    apply_unchecked(op.kind, s1.bits, s2.bits, universe.bits)
        .map(|bits| ValueSet { trait_id: s1.trait_id, bits })
        .ok_or(AlgebraError::WrongOperator)
}

/// Bit-level operator application used on the solver's hot path. Operands
/// are not required to lie inside the universe.
#[inline]
pub(crate) fn apply_unchecked(kind: OperatorKind, a: u128, b: u128, universe: u128) -> Option<u128> {
    Some(match kind {
        OperatorKind::Union => a | b,
        OperatorKind::Intersection => a & b,
        OperatorKind::SymDiff => a ^ b,
        OperatorKind::NotUnion => universe & !(a | b),
        OperatorKind::NotIntersection => universe & !(a & b),
        OperatorKind::NotSymDiff => universe & !(a ^ b),
        OperatorKind::Progression => return None,
    })
}

/// The code expected at 1-based line position `x` under `y = a * x`, or
/// `None` when the value leaves a non-cyclic domain (the rule does not
/// apply).
pub fn progression_value(
    vocab: &Vocabulary,
    a: u8,
    x: u8,
    trait_id: TraitId,
) -> Result<Option<u8>, AlgebraError> {
    let def = vocab.def(trait_id).ok_or(AlgebraError::NotNumeric(trait_id))?;
    if !def.kind.is_numeric() {
        return Err(AlgebraError::NotNumeric(trait_id));
    }
    if a == 0 {
        return Err(AlgebraError::ZeroSlope);
    }
    if !(1..=3).contains(&x) {
        return Err(AlgebraError::BadPosition(x));
    }
    Ok(progression_code(def.kind, def.domain_size(), a, x))
}

#[inline]
pub(crate) fn progression_code(kind: TraitKind, domain: usize, a: u8, x: u8) -> Option<u8> {
    let y = a as usize * x as usize;
    match kind {
        TraitKind::Cyclic => Some((y % domain) as u8),
        TraitKind::Ordinal if y < domain => Some(y as u8),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::TraitDef;

    const T: TraitId = TraitId(0);

    fn set(codes: &[u8]) -> ValueSet {
        ValueSet::from_codes(T, codes.iter().copied())
    }

    #[test]
    fn union_of_two_shapes() {
        // circle=0, square=1, triangle=2
        let r = apply_operator(Operator::set(OperatorKind::Union), &set(&[0]), &set(&[1]), &set(&[0, 1, 2]));
        assert_eq!(r.unwrap(), set(&[0, 1]));
    }

    #[test]
    fn symdiff_definition() {
        let r = apply_operator(Operator::set(OperatorKind::SymDiff), &set(&[0, 1]), &set(&[1, 2]), &set(&[0, 1, 2]));
        assert_eq!(r.unwrap(), set(&[0, 2]));
    }

    #[test]
    fn not_symdiff_gives_latin_third_value() {
        let r = apply_operator(
            Operator::set(OperatorKind::NotSymDiff),
            &set(&[0]),
            &set(&[1]),
            &set(&[0, 1, 2]),
        );
        assert_eq!(r.unwrap(), set(&[2]));
    }

    #[test]
    fn errors() {
        let other = ValueSet::from_codes(TraitId(1), [0]);
        let u = set(&[0, 1]);
        assert!(matches!(
            apply_operator(Operator::set(OperatorKind::Union), &set(&[0]), &other, &u),
            Err(AlgebraError::TraitMismatch { .. })
        ));
        assert_eq!(
            apply_operator(Operator::progression(1), &set(&[0]), &set(&[1]), &u),
            Err(AlgebraError::WrongOperator)
        );
        assert_eq!(
            apply_operator(Operator::set(OperatorKind::Union), &set(&[0, 5]), &set(&[1]), &u),
            Err(AlgebraError::OutsideUniverse)
        );
    }

    fn count_vocab() -> Vocabulary {
        Vocabulary::new(vec![TraitDef {
            name: "count".into(),
            kind: TraitKind::Ordinal,
            values: (0..=6).map(|i| format!("n{i}")).collect(),
        }])
        .unwrap()
    }

    #[test]
    fn progression_on_count() {
        let v = count_vocab();
        assert_eq!(progression_value(&v, 1, 2, TraitId(0)), Ok(Some(2)));
    }

    #[test]
    fn progression_on_rotation_wraps() {
        // Hand table for a = 2 over eight 45-degree steps: 2, 4, 6.
        let v = Vocabulary::standard();
        let rot = v.lookup("rotation").unwrap();
        let expected = [2u8, 4, 6];
        for (x, want) in (1..=3).zip(expected) {
            assert_eq!(progression_value(&v, 2, x, rot), Ok(Some(want)));
        }
        assert_eq!(v.label(rot, 6), "r270");
        // a = 3: 3, 6, 9 -> 1
        assert_eq!(progression_value(&v, 3, 3, rot), Ok(Some(1)));
    }

    #[test]
    fn progression_out_of_ordinal_range() {
        let v = Vocabulary::standard();
        let size = v.lookup("size").unwrap();
        // Brute force over a, x in 1..=3: only a*x < 3 lands in range.
        let mut inapplicable = vec![];
        for a in 1..=3u8 {
            for x in 1..=3u8 {
                if progression_value(&v, a, x, size).unwrap().is_none() {
                    inapplicable.push((a, x));
                }
            }
        }
        assert_eq!(
            inapplicable,
            vec![(1, 3), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3)]
        );
        assert_eq!(progression_value(&v, 3, 3, size), Ok(None));
    }

    #[test]
    fn progression_preconditions() {
        let v = Vocabulary::standard();
        let shape = v.lookup("shape").unwrap();
        let rot = v.lookup("rotation").unwrap();
        assert_eq!(progression_value(&v, 1, 1, shape), Err(AlgebraError::NotNumeric(shape)));
        assert_eq!(progression_value(&v, 0, 1, rot), Err(AlgebraError::ZeroSlope));
        assert_eq!(progression_value(&v, 1, 4, rot), Err(AlgebraError::BadPosition(4)));
    }

    #[test]
    fn operator_parse_display() {
        for k in OperatorKind::SET_KINDS {
            let op = Operator::set(k);
            assert_eq!(Operator::parse(&op.to_string()), Some(op));
        }
        assert_eq!(Operator::parse("progression(3)"), Some(Operator::progression(3)));
        assert_eq!(Operator::parse("progression(0)"), None);
        assert_eq!(Operator::parse("xor"), None);
    }
}
