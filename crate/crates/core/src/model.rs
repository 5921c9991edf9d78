//! Objects, cells, grids and problems, plus categories and the projection
//! of a category onto a trait.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{Operator, ValueSet};
use crate::vocab::{TraitId, Vocabulary, MAX_DOMAIN};

/// Objects per cell, one per observation head.
pub const MAX_OBJECTS: usize = 6;
/// Slot positions on a cell's anchor grid.
pub const SLOTS: u8 = 6;
/// Layer tags (0 is the front).
pub const LAYERS: u8 = 3;
/// Given cells in a grid; position 9 is the hole.
pub const GIVEN_CELLS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("cell holds {0} objects, at most {MAX_OBJECTS} are allowed")]
    TooManyObjects(usize),
    #[error("two objects share layer {layer} slot {slot}")]
    DuplicateIdentity { layer: u8, slot: u8 },
    #[error("layer {0} is outside 0..{LAYERS}")]
    BadLayer(u8),
    #[error("slot {0} is outside 0..{SLOTS}")]
    BadSlot(u8),
    #[error("object has {got} trait values, vocabulary has {want} traits")]
    WrongArity { got: usize, want: usize },
    #[error("value code {code} is outside the domain of `{trait_name}`")]
    ValueOutOfRange { trait_name: String, code: u8 },
    #[error("grid needs {GIVEN_CELLS} cells, got {0}")]
    GridSize(usize),
    #[error("problem has no candidates")]
    NoCandidates,
    #[error("ground truth {truth} is out of range for {count} candidates")]
    TruthOutOfRange { truth: usize, count: usize },
}

/// Stable key of an object inside its cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Identity {
    pub layer: u8,
    pub slot: u8,
}

/// A trait/value pair attached to an object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct State {
    pub trait_id: TraitId,
    pub code: u8,
}

/// One object: its identity plus one value code per registered trait.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub identity: Identity,
    pub values: Vec<u8>,
}

impl ObjectSpec {
    pub fn new(layer: u8, slot: u8, values: Vec<u8>) -> Self {
        ObjectSpec { identity: Identity { layer, slot }, values }
    }

    pub fn value(&self, t: TraitId) -> u8 {
        self.values[t.index()]
    }

    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &code)| State { trait_id: TraitId(i as u8), code })
    }

    fn validate(&self, vocab: &Vocabulary) -> Result<(), ModelError> {
        if self.identity.layer >= LAYERS {
            return Err(ModelError::BadLayer(self.identity.layer));
        }
        if self.identity.slot >= SLOTS {
            return Err(ModelError::BadSlot(self.identity.slot));
        }
        if self.values.len() != vocab.len() {
            return Err(ModelError::WrongArity { got: self.values.len(), want: vocab.len() });
        }
        for (t, &code) in vocab.ids().zip(&self.values) {
            if code as usize >= vocab.domain_size(t) {
                return Err(ModelError::ValueOutOfRange {
                    trait_name: vocab.trait_name(t).to_string(),
                    code,
                });
            }
        }
        Ok(())
    }
}

/// The objects of one matrix cell, kept sorted by identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    objects: Vec<ObjectSpec>,
}

impl Cell {
    pub fn new(mut objects: Vec<ObjectSpec>) -> Result<Self, ModelError> {
        if objects.len() > MAX_OBJECTS {
            return Err(ModelError::TooManyObjects(objects.len()));
        }
        objects.sort_by_key(|o| o.identity);
        for w in objects.windows(2) {
            if w[0].identity == w[1].identity {
                let Identity { layer, slot } = w[0].identity;
                return Err(ModelError::DuplicateIdentity { layer, slot });
            }
        }
        Ok(Cell { objects })
    }

    pub fn empty() -> Self {
        Cell::default()
    }

    pub fn objects(&self) -> &[ObjectSpec] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn get(&self, id: Identity) -> Option<&ObjectSpec> {
        self.objects.iter().find(|o| o.identity == id)
    }

    pub fn validate(&self, vocab: &Vocabulary) -> Result<(), ModelError> {
        self.objects.iter().try_for_each(|o| o.validate(vocab))
    }

    pub(crate) fn objects_mut(&mut self) -> &mut Vec<ObjectSpec> {
        &mut self.objects
    }

    pub(crate) fn resort(&mut self) {
        self.objects.sort_by_key(|o| o.identity);
    }
}

/// The eight given cells in row-major order; the ninth position is the
/// hole.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    cells: Vec<Cell>,
}

impl Grid {
    pub fn new(cells: Vec<Cell>) -> Result<Self, ModelError> {
        if cells.len() != GIVEN_CELLS {
            return Err(ModelError::GridSize(cells.len()));
        }
        Ok(Grid { cells })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Cell at 0-based `(row, col)`; `None` for the hole.
    pub fn at(&self, row: usize, col: usize) -> Option<&Cell> {
        let pos = row * 3 + col;
        self.cells.get(pos)
    }
}

/// Generator provenance carried by a problem.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub index: u64,
    pub spec_hash: String,
    pub rejections: u32,
    pub planted: Vec<Rule>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Problem {
    pub vocab: Arc<Vocabulary>,
    pub grid: Grid,
    pub candidates: Vec<Cell>,
    pub truth: Option<usize>,
    pub provenance: Option<Provenance>,
}

impl Problem {
    pub fn new(
        vocab: Arc<Vocabulary>,
        grid: Grid,
        candidates: Vec<Cell>,
        truth: Option<usize>,
    ) -> Result<Self, ModelError> {
        let p = Problem { vocab, grid, candidates, truth, provenance: None };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.candidates.is_empty() {
            return Err(ModelError::NoCandidates);
        }
        if let Some(t) = self.truth {
            if t >= self.candidates.len() {
                return Err(ModelError::TruthOutOfRange { truth: t, count: self.candidates.len() });
            }
        }
        for c in self.grid.cells().iter().chain(&self.candidates) {
            if c.len() > MAX_OBJECTS {
                return Err(ModelError::TooManyObjects(c.len()));
            }
            c.validate(&self.vocab)?;
        }
        Ok(())
    }

    pub fn truth_cell(&self) -> Option<&Cell> {
        self.truth.and_then(|t| self.candidates.get(t))
    }
}

/// Declarative selector over a cell's objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    All,
    Layer(u8),
    Is(TraitId, u8),
    Slot(u8),
}

impl Category {
    pub fn selects(&self, o: &ObjectSpec) -> bool {
        match *self {
            Category::All => true,
            Category::Layer(l) => o.identity.layer == l,
            Category::Is(t, v) => o.values.get(t.index()) == Some(&v),
            Category::Slot(s) => o.identity.slot == s,
        }
    }

    pub fn display<'a>(&'a self, vocab: &'a Vocabulary) -> impl fmt::Display + 'a {
        CategoryDisplay { cat: self, vocab }
    }

    /// Parses `all`, `layer(L)`, `slot(P)` or `is(trait,value)`.
    pub fn parse(s: &str, vocab: &Vocabulary) -> Option<Category> {
        let s = s.trim();
        if s == "all" {
            return Some(Category::All);
        }
        let (head, rest) = s.split_once('(')?;
        let inner = rest.strip_suffix(')')?;
        match head.trim() {
            "layer" => inner.trim().parse().ok().filter(|&l| l < LAYERS).map(Category::Layer),
            "slot" => inner.trim().parse().ok().filter(|&p| p < SLOTS).map(Category::Slot),
            "is" => {
                let (t, v) = inner.split_once(',')?;
                let t = vocab.lookup(t.trim())?;
                let v = vocab.code_of(t, v.trim())?;
                Some(Category::Is(t, v))
            }
            _ => None,
        }
    }
}

struct CategoryDisplay<'a> {
    cat: &'a Category,
    vocab: &'a Vocabulary,
}

impl fmt::Display for CategoryDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self.cat {
            Category::All => write!(f, "all"),
            Category::Layer(l) => write!(f, "layer({l})"),
            Category::Slot(s) => write!(f, "slot({s})"),
            Category::Is(t, v) => {
                write!(f, "is({},{})", self.vocab.trait_name(t), self.vocab.label(t, v))
            }
        }
    }
}

/// An object's membership in a category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Membership {
    pub object: Identity,
    pub category: Category,
}

/// Which lines a rule constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scope {
    Row,
    Column,
}

impl Scope {
    pub fn keyword(self) -> &'static str {
        match self {
            Scope::Row => "row",
            Scope::Column => "column",
        }
    }

    pub fn parse(s: &str) -> Option<Scope> {
        match s {
            "row" => Some(Scope::Row),
            "column" => Some(Scope::Column),
            _ => None,
        }
    }
}

/// A category/trait pair bound to an operator along rows or columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub category: Category,
    pub trait_id: TraitId,
    pub operator: Operator,
    pub scope: Scope,
}

impl Rule {
    pub fn display<'a>(&'a self, vocab: &'a Vocabulary) -> impl fmt::Display + 'a {
        RuleDisplay { rule: self, vocab }
    }
}

struct RuleDisplay<'a> {
    rule: &'a Rule,
    vocab: &'a Vocabulary,
}

impl fmt::Display for RuleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.rule;
        write!(
            f,
            "{} {} {} {}",
            r.category.display(self.vocab),
            self.vocab.trait_name(r.trait_id),
            r.operator,
            r.scope.keyword()
        )
    }
}

/// How objects are matched across cells for the presence pseudo-trait.
///
/// The key is `(layer, shape)`, optionally extended with the slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityKey {
    shape: Option<TraitId>,
    shape_domain: usize,
    with_slot: bool,
}

impl IdentityKey {
    pub fn new(vocab: &Vocabulary, with_slot: bool) -> Self {
        let shape = vocab.lookup("shape");
        let shape_domain = shape.map_or(1, |t| vocab.domain_size(t));
        IdentityKey { shape, shape_domain, with_slot }
    }

    /// Drops the shape component, as when shape observations are withheld.
    pub fn without_shape(mut self) -> Self {
        self.shape = None;
        self.shape_domain = 1;
        self
    }

    pub fn shape_trait(&self) -> Option<TraitId> {
        self.shape
    }

    pub fn with_slot(&self) -> bool {
        self.with_slot
    }

    /// Number of distinct keys.
    pub fn key_space(&self) -> usize {
        let slots = if self.with_slot { SLOTS as usize } else { 1 };
        LAYERS as usize * slots * self.shape_domain
    }

    pub fn fits(&self) -> bool {
        self.key_space() <= MAX_DOMAIN
    }

    pub fn code(&self, o: &ObjectSpec) -> u8 {
        let slots = if self.with_slot { SLOTS as usize } else { 1 };
        let slot = if self.with_slot { o.identity.slot as usize } else { 0 };
        let shape = self.shape.map_or(0, |t| o.value(t) as usize);
        ((o.identity.layer as usize * slots + slot) * self.shape_domain + shape) as u8
    }
}

/// Identities of the objects in `cell` selected by `category`.
pub fn category_members(category: &Category, cell: &Cell) -> Vec<Identity> {
    cell.objects().iter().filter(|o| category.selects(o)).map(|o| o.identity).collect()
}

/// The values of `trait_id` over the category's members. For the presence
/// pseudo-trait the result holds identity keys.
pub fn project_argument(
    cell: &Cell,
    category: &Category,
    trait_id: TraitId,
    key: &IdentityKey,
) -> ValueSet {
    let mut out = ValueSet::empty(trait_id);
    for o in cell.objects().iter().filter(|o| category.selects(o)) {
        if trait_id.is_presence() {
            out.insert(key.code(o));
        } else {
            out.insert(o.value(trait_id));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocabulary {
        Vocabulary::standard()
    }

    // shape, color, fill, rotation, size
    fn obj(layer: u8, slot: u8, shape: u8, color: u8) -> ObjectSpec {
        ObjectSpec::new(layer, slot, vec![shape, color, 0, 0, 1])
    }

    #[test]
    fn all_selects_everything() {
        let cell = Cell::new(vec![obj(0, 0, 0, 0), obj(0, 1, 1, 0), obj(1, 2, 2, 4)]).unwrap();
        assert_eq!(category_members(&Category::All, &cell).len(), 3);
    }

    #[test]
    fn gray_category() {
        let v = vocab();
        let color = v.lookup("color").unwrap();
        let gray = v.code_of(color, "gray").unwrap();
        let black = v.code_of(color, "black").unwrap();
        let cell = Cell::new(vec![obj(0, 1, 0, black), obj(1, 0, 1, gray)]).unwrap();
        let members = category_members(&Category::Is(color, gray), &cell);
        assert_eq!(members, vec![Identity { layer: 1, slot: 0 }]);
    }

    #[test]
    fn empty_slot_selection() {
        let cell = Cell::new(vec![obj(0, 0, 0, 0), obj(0, 1, 1, 0)]).unwrap();
        assert!(category_members(&Category::Slot(2), &cell).is_empty());
    }

    #[test]
    fn projection_collapses_duplicates() {
        let v = vocab();
        let key = IdentityKey::new(&v, false);
        let color = v.lookup("color").unwrap();
        let shape = v.lookup("shape").unwrap();
        let cell = Cell::new(vec![obj(0, 0, 0, 0), obj(0, 1, 1, 0)]).unwrap();
        assert_eq!(project_argument(&cell, &Category::All, color, &key), ValueSet::from_codes(color, [0]));
        assert_eq!(
            project_argument(&cell, &Category::All, shape, &key),
            ValueSet::from_codes(shape, [0, 1])
        );
    }

    #[test]
    fn presence_keys_by_layer_and_shape() {
        let v = vocab();
        let key = IdentityKey::new(&v, false);
        // Same layer and shape in different slots share a key.
        let a = obj(0, 0, 2, 0);
        let b = obj(0, 3, 2, 1);
        assert_eq!(key.code(&a), key.code(&b));
        let slot_key = IdentityKey::new(&v, true);
        assert_ne!(slot_key.code(&a), slot_key.code(&b));
        assert!(slot_key.fits());
        assert_ne!(key.code(&obj(1, 0, 2, 0)), key.code(&a));
    }

    #[test]
    fn cell_rejects_overflow_and_duplicates() {
        let many: Vec<_> = (0..7).map(|i| obj(i / 6, i % 6, 0, 0)).collect();
        assert_eq!(Cell::new(many), Err(ModelError::TooManyObjects(7)));
        assert!(matches!(
            Cell::new(vec![obj(0, 1, 0, 0), obj(0, 1, 2, 0)]),
            Err(ModelError::DuplicateIdentity { layer: 0, slot: 1 })
        ));
    }

    #[test]
    fn category_parse_roundtrip() {
        let v = vocab();
        let color = v.lookup("color").unwrap();
        for c in [Category::All, Category::Layer(2), Category::Slot(5), Category::Is(color, 4)] {
            let s = c.display(&v).to_string();
            assert_eq!(Category::parse(&s, &v), Some(c), "{s}");
        }
        assert_eq!(Category::parse("layer(9)", &v), None);
        assert_eq!(Category::parse("is(mood,happy)", &v), None);
    }
}
