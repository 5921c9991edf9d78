//! Trait vocabularies: the registered traits and their finite, ordered
//! value domains.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest value domain a trait may register. Value sets are stored as
/// 128-bit masks.
pub const MAX_DOMAIN: usize = 128;

/// Index of a registered trait inside its [`Vocabulary`].
///
/// [`TraitId::PRESENCE`] is reserved for the presence pseudo-trait whose
/// values are object identity keys rather than registered labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TraitId(pub u8);

impl TraitId {
    pub const PRESENCE: TraitId = TraitId(u8::MAX);

    pub fn is_presence(self) -> bool {
        self == Self::PRESENCE
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// How the value codes of a trait may be read numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TraitKind {
    /// Purely categorical; no progression.
    Nominal,
    /// Numeric, wraps modulo the domain size (rotation).
    Cyclic,
    /// Numeric, values past the last code are out of range (size, count).
    Ordinal,
}

impl TraitKind {
    pub fn is_numeric(self) -> bool {
        !matches!(self, TraitKind::Nominal)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            TraitKind::Nominal => "nominal",
            TraitKind::Cyclic => "cyclic",
            TraitKind::Ordinal => "ordinal",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "nominal" => Some(TraitKind::Nominal),
            "cyclic" => Some(TraitKind::Cyclic),
            "ordinal" => Some(TraitKind::Ordinal),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraitDef {
    pub name: String,
    pub kind: TraitKind,
    pub values: Vec<String>,
}

impl TraitDef {
    pub fn domain_size(&self) -> usize {
        self.values.len()
    }
}

/// A resolved value of a registered trait.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Value<'v> {
    pub trait_id: TraitId,
    pub code: u8,
    pub label: &'v str,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VocabError {
    #[error("trait `{0}` is registered twice")]
    DuplicateTrait(String),
    #[error("trait `{name}` needs at least 2 values, got {got}")]
    DomainTooSmall { name: String, got: usize },
    #[error("trait `{name}` has {got} values, the limit is {MAX_DOMAIN}")]
    DomainTooLarge { name: String, got: usize },
    #[error("trait `{trait_name}` lists value `{label}` twice")]
    DuplicateValue { trait_name: String, label: String },
    #[error("`{0}` is not a valid identifier (lowercase letter followed by [a-z0-9_])")]
    BadIdentifier(String),
    #[error("`{0}` is reserved")]
    Reserved(String),
    #[error("too many traits: {0}")]
    TooManyTraits(usize),
}

/// The registered traits. Order is significant: objects store one value
/// code per trait in this order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vocabulary {
    traits: Vec<TraitDef>,
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl Vocabulary {
    pub fn new(traits: Vec<TraitDef>) -> Result<Self, VocabError> {
        if traits.len() >= u8::MAX as usize {
            return Err(VocabError::TooManyTraits(traits.len()));
        }
        for (i, t) in traits.iter().enumerate() {
            if !is_identifier(&t.name) {
                return Err(VocabError::BadIdentifier(t.name.clone()));
            }
            if t.name == "presence" {
                return Err(VocabError::Reserved(t.name.clone()));
            }
            if traits[..i].iter().any(|o| o.name == t.name) {
                return Err(VocabError::DuplicateTrait(t.name.clone()));
            }
            if t.values.len() < 2 {
                return Err(VocabError::DomainTooSmall { name: t.name.clone(), got: t.values.len() });
            }
            if t.values.len() > MAX_DOMAIN {
                return Err(VocabError::DomainTooLarge { name: t.name.clone(), got: t.values.len() });
            }
            for (j, v) in t.values.iter().enumerate() {
                if !is_identifier(v) {
                    return Err(VocabError::BadIdentifier(v.clone()));
                }
                if t.values[..j].contains(v) {
                    return Err(VocabError::DuplicateValue {
                        trait_name: t.name.clone(),
                        label: v.clone(),
                    });
                }
            }
        }
        Ok(Vocabulary { traits })
    }

    /// Six shapes, six colors (gray and black included), three fills,
    /// eight 45-degree rotations, three sizes.
    pub fn standard() -> Self {
        fn def(name: &str, kind: TraitKind, values: &[&str]) -> TraitDef {
            TraitDef {
                name: name.to_string(),
                kind,
                values: values.iter().map(|s| s.to_string()).collect(),
            }
        }
        Vocabulary::new(vec![
            def(
                "shape",
                TraitKind::Nominal,
                &["circle", "square", "triangle", "diamond", "star", "cross"],
            ),
            def(
                "color",
                TraitKind::Nominal,
                &["red", "green", "blue", "yellow", "gray", "black"],
            ),
            def("fill", TraitKind::Nominal, &["solid", "hollow", "hatched"]),
            def(
                "rotation",
                TraitKind::Cyclic,
                &["r0", "r45", "r90", "r135", "r180", "r225", "r270", "r315"],
            ),
            def("size", TraitKind::Ordinal, &["small", "medium", "large"]),
        ])
        .expect("standard vocabulary is valid")
    }

    pub fn len(&self) -> usize {
        self.traits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traits.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = TraitId> + '_ {
        (0..self.traits.len()).map(|i| TraitId(i as u8))
    }

    pub fn traits(&self) -> &[TraitDef] {
        &self.traits
    }

    pub fn def(&self, id: TraitId) -> Option<&TraitDef> {
        self.traits.get(id.index())
    }

    pub fn lookup(&self, name: &str) -> Option<TraitId> {
        self.traits.iter().position(|t| t.name == name).map(|i| TraitId(i as u8))
    }

    pub fn trait_name(&self, id: TraitId) -> &str {
        if id.is_presence() {
            return "presence";
        }
        self.def(id).map(|d| d.name.as_str()).unwrap_or("?")
    }

    pub fn domain_size(&self, id: TraitId) -> usize {
        self.def(id).map_or(0, TraitDef::domain_size)
    }

    pub fn value(&self, id: TraitId, code: u8) -> Option<Value<'_>> {
        let label = self.def(id)?.values.get(code as usize)?;
        Some(Value { trait_id: id, code, label })
    }

    pub fn label(&self, id: TraitId, code: u8) -> &str {
        self.value(id, code).map(|v| v.label).unwrap_or("?")
    }

    pub fn code_of(&self, id: TraitId, label: &str) -> Option<u8> {
        self.def(id)?.values.iter().position(|v| v == label).map(|i| i as u8)
    }
}

impl fmt::Display for TraitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_presence() {
            write!(f, "presence")
        } else {
            write!(f, "trait#{}", self.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_vocabulary_shape() {
        let v = Vocabulary::standard();
        assert_eq!(v.len(), 5);
        let rot = v.lookup("rotation").unwrap();
        assert_eq!(v.domain_size(rot), 8);
        assert_eq!(v.def(rot).unwrap().kind, TraitKind::Cyclic);
        assert_eq!(v.code_of(v.lookup("color").unwrap(), "gray"), Some(4));
        assert_eq!(v.label(rot, 6), "r270");
    }

    #[test]
    fn label_code_bijection() {
        let v = Vocabulary::standard();
        for id in v.ids() {
            for code in 0..v.domain_size(id) as u8 {
                let label = v.label(id, code);
                assert_eq!(v.code_of(id, label), Some(code));
            }
        }
    }

    #[test]
    fn rejects_bad_vocabularies() {
        let one = TraitDef { name: "x".into(), kind: TraitKind::Nominal, values: vec!["a".into()] };
        assert!(matches!(Vocabulary::new(vec![one]), Err(VocabError::DomainTooSmall { .. })));
        let dup = TraitDef {
            name: "x".into(),
            kind: TraitKind::Nominal,
            values: vec!["a".into(), "a".into()],
        };
        assert!(matches!(Vocabulary::new(vec![dup]), Err(VocabError::DuplicateValue { .. })));
        let reserved = TraitDef {
            name: "presence".into(),
            kind: TraitKind::Nominal,
            values: vec!["a".into(), "b".into()],
        };
        assert!(matches!(Vocabulary::new(vec![reserved]), Err(VocabError::Reserved(_))));
        let upper = TraitDef {
            name: "Shape".into(),
            kind: TraitKind::Nominal,
            values: vec!["a".into(), "b".into()],
        };
        assert!(matches!(Vocabulary::new(vec![upper]), Err(VocabError::BadIdentifier(_))));
    }
}
