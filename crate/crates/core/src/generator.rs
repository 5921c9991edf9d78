//! Seeded problem generation.
//!
//! A problem is built from up to two components:
//!
//! * an *attribute* component: one object per cell at the centre slot whose
//!   traits follow a Latin arrangement (`notsymdiff`), a per-row constant
//!   (`union`) or a progression;
//! * a *presence* component: a pool of objects keyed by shape, each row
//!   picking two random subsets and deriving the third with `union`,
//!   `symdiff` or `intersection`.
//!
//! Every emitted problem is verified with the strict solver and resampled
//! until the ground truth is the unique answer.

use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::{apply_unchecked, Operator, OperatorKind};
use crate::model::{Category, Cell, Grid, ObjectSpec, Problem, Provenance, Rule, Scope, MAX_OBJECTS, SLOTS};
use crate::par::{self, Execution};
use crate::reasoner::{Mode, Outcome, RuleSet, Solver, SolverConfig};
use crate::vocab::{TraitId, TraitKind, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub seed: u64,
    /// Trait names, `presence` for the presence component.
    pub traits_in_play: Vec<String>,
    /// Category selectors in textual form (`all`, `layer(1)`, `is(color,gray)`).
    pub categories_in_play: Vec<String>,
    pub rules_per_problem: (usize, usize),
    pub objects_per_cell: (usize, usize),
    pub candidate_count: usize,
    pub distractor_mutations: (usize, usize),
    pub max_retries: u32,
    /// Also resample until the strict solver returns exactly the truth.
    /// Without it, problems can hold coincidental rules that the truth breaks.
    #[serde(default = "yes")]
    pub solver_check: bool,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            seed: 0,
            traits_in_play: ["shape", "color", "fill", "rotation", "size", "presence"]
                .map(String::from)
                .to_vec(),
            categories_in_play: ["all", "layer(0)", "layer(1)"].map(String::from).to_vec(),
            rules_per_problem: (2, 4),
            objects_per_cell: (1, 6),
            candidate_count: 8,
            distractor_mutations: (1, 3),
            max_retries: 1000,
            solver_check: true,
        }
    }
}

fn yes() -> bool {
    true
}

impl GeneratorSpec {
    pub fn with_seed(seed: u64) -> Self {
        GeneratorSpec { seed, ..Default::default() }
    }

    /// First 16 hex digits of the SHA-256 of the spec's JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("spec {spec}: problem {index} not uniquely solvable after {retries} attempts")]
    RetriesExhausted { spec: String, index: u64, retries: u32 },
    #[error("could not produce {wanted} distinct distractors")]
    Distractors { wanted: usize },
}

/// Independent random stream for `(seed, index, stream)`.
pub fn stream_rng(seed: u64, index: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    key[16..24].copy_from_slice(&stream.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

pub const PROBLEM_STREAM: u64 = 0;
pub const SCALING_STREAM: u64 = 1;

const DISTRACTOR_TRIES: usize = 400;

/// A grid, its hole and the rules planted to build them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Core {
    pub grid: Grid,
    pub truth: Cell,
    pub planted: Vec<Rule>,
}

#[derive(Debug, Clone, Copy)]
enum AttrRule {
    Latin,
    Constant,
    Progression(u8),
}

pub struct Generator {
    vocab: Arc<Vocabulary>,
    spec: GeneratorSpec,
    spec_hash: String,
    attr_traits: Vec<TraitId>,
    presence: bool,
    categories: Vec<Category>,
    solver_config: SolverConfig,
}

impl Generator {
    pub fn new(vocab: Arc<Vocabulary>, spec: GeneratorSpec) -> Result<Self, GenerateError> {
        let bad = |m: String| Err(GenerateError::InvalidSpec(m));
        if spec.candidate_count < 2 {
            return bad(format!("candidate_count {} < 2", spec.candidate_count));
        }
        for (name, (lo, hi)) in [
            ("rules_per_problem", spec.rules_per_problem),
            ("objects_per_cell", spec.objects_per_cell),
            ("distractor_mutations", spec.distractor_mutations),
        ] {
            if lo > hi || hi == 0 {
                return bad(format!("{name} range {lo}..={hi} is empty"));
            }
        }
        if spec.objects_per_cell.1 > MAX_OBJECTS {
            return bad(format!("objects_per_cell max {} > {MAX_OBJECTS}", spec.objects_per_cell.1));
        }
        let mut attr_traits = Vec::new();
        let mut presence = false;
        for name in &spec.traits_in_play {
            if name == "presence" {
                presence = vocab.lookup("shape").is_some();
                if !presence {
                    return bad("presence needs a `shape` trait".into());
                }
            } else {
                match vocab.lookup(name) {
                    Some(t) => attr_traits.push(t),
                    None => return bad(format!("unknown trait `{name}`")),
                }
            }
        }
        if attr_traits.is_empty() && !presence {
            return bad("no traits in play".into());
        }
        let mut categories = Vec::new();
        for s in &spec.categories_in_play {
            match Category::parse(s, &vocab) {
                Some(Category::Slot(_)) => return bad(format!("slot categories cannot be planted: `{s}`")),
                Some(c) => categories.push(c),
                None => return bad(format!("unknown category `{s}`")),
            }
        }
        if categories.is_empty() {
            return bad("no categories in play".into());
        }
        let spec_hash = spec.hash();
        Ok(Generator { vocab, spec, spec_hash, attr_traits, presence, categories, solver_config: SolverConfig::default() })
    }

    pub fn vocab(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    /// Builds problem `index`. Every distractor violates a planted rule;
    /// with `solver_check` the problem is also resampled until the strict
    /// solver singles out the ground truth.
    pub fn sample_problem(&self, index: u64) -> Result<Problem, GenerateError> {
        let mut rng = stream_rng(self.spec.seed, index, PROBLEM_STREAM);
        let solver = Solver::new(&self.vocab, self.solver_config.clone());
        let k = self.spec.candidate_count - 1;
        for attempt in 0..self.spec.max_retries {
            let Some(core) = self.sample_core(&mut rng) else { continue };
            let planted = RuleSet { rules: core.planted.clone(), dropped_pairs: vec![] };
            let Ok(mut candidates) = self.make_distractors(&core.truth, &core.grid, &planted, k, &mut rng)
            else {
                continue;
            };
            let truth_at = rng.random_range(0..=k);
            candidates.insert(truth_at, core.truth.clone());
            let mut problem = Problem {
                vocab: self.vocab.clone(),
                grid: core.grid,
                candidates,
                truth: Some(truth_at),
                provenance: None,
            };
            if self.spec.solver_check && solver.solve(&problem, Mode::Strict).outcome != Outcome::Unique(truth_at) {
                continue;
            }
            problem.provenance = Some(Provenance {
                seed: self.spec.seed,
                index,
                spec_hash: self.spec_hash.clone(),
                rejections: attempt,
                planted: core.planted,
            });
            return Ok(problem);
        }
        Err(GenerateError::RetriesExhausted {
            spec: self.spec_hash.clone(),
            index,
            retries: self.spec.max_retries,
        })
    }

    /// Problems `0..count`, in index order.
    pub fn generate_corpus(&self, count: u64, exec: Execution) -> Result<Vec<Problem>, GenerateError> {
        par::map_range(exec, count, |i| self.sample_problem(i)).into_iter().collect()
    }

    fn rand_value<R: Rng>(&self, t: TraitId, rng: &mut R) -> u8 {
        rng.random_range(0..self.vocab.domain_size(t) as u8)
    }

    fn pick_category(&self, layer: u8, alone: bool, pinned: Option<Category>) -> Category {
        if let Some(c) = pinned {
            return c;
        }
        if alone && self.categories.contains(&Category::All) {
            return Category::All;
        }
        Category::Layer(layer)
    }

    /// One grid plus its hole, or `None` when the draw breaks the
    /// objects-per-cell bounds.
    pub fn sample_core<R: Rng>(&self, rng: &mut R) -> Option<Core> {
        let vocab = &*self.vocab;
        let (rlo, rhi) = self.spec.rules_per_problem;
        let n_rules = rng.random_range(rlo..=rhi);
        let use_presence = self.presence
            && (self.attr_traits.is_empty() || n_rules > self.attr_traits.len() || rng.random_bool(0.5));
        let n_attr = n_rules.saturating_sub(use_presence as usize).min(self.attr_traits.len());
        let use_attr = n_attr > 0 || !use_presence;
        let attr_budget = use_attr as usize;
        let max_keys = self.spec.objects_per_cell.1.saturating_sub(attr_budget).min(5);
        if use_presence && max_keys < 2 {
            return None;
        }

        let attr_layer = if use_presence { 1 } else { 0 };
        let pinned = self
            .categories
            .iter()
            .find(|c| use_attr && matches!(c, Category::Is(..)))
            .copied();

        let mut planted = Vec::new();
        let mut cells: Vec<Vec<ObjectSpec>> = vec![Vec::new(); 9];

        if use_attr {
            let category = self.pick_category(attr_layer, !use_presence, pinned);
            let mut base: Vec<u8> = vocab.ids().map(|t| self.rand_value(t, rng)).collect();
            if let Some(Category::Is(t, v)) = pinned {
                base[t.index()] = v;
            }
            let mut candidates: Vec<TraitId> = self
                .attr_traits
                .iter()
                .copied()
                .filter(|t| !matches!(pinned, Some(Category::Is(p, _)) if p == *t))
                .collect();
            candidates.shuffle(rng);
            let mut grid_values: Vec<Vec<u8>> = vec![base.clone(); 9];
            for &t in candidates.iter().take(n_attr.max(1)) {
                let rule = self.choose_attr_rule(t, rng);
                let per_cell = self.attr_values(t, rule, rng);
                for (cell, v) in grid_values.iter_mut().zip(per_cell) {
                    cell[t.index()] = v;
                }
                let operator = match rule {
                    AttrRule::Latin => Operator::set(OperatorKind::NotSymDiff),
                    AttrRule::Constant => Operator::set(OperatorKind::Union),
                    AttrRule::Progression(a) => Operator::progression(a),
                };
                planted.push(Rule { category, trait_id: t, operator, scope: Scope::Row });
            }
            for (cell, values) in cells.iter_mut().zip(grid_values) {
                cell.push(ObjectSpec::new(attr_layer, 0, values));
            }
        }

        if use_presence {
            let shape = vocab.lookup("shape")?;
            let n_keys = rng.random_range(2..=max_keys.min(vocab.domain_size(shape)));
            let mut shapes: Vec<u8> = (0..vocab.domain_size(shape) as u8).collect();
            shapes.shuffle(rng);
            let first_slot = if use_attr { 1 } else { 0 };
            let mut slots: Vec<u8> = (first_slot..SLOTS).collect();
            slots.shuffle(rng);
            let base: Vec<u8> = vocab.ids().map(|t| self.rand_value(t, rng)).collect();
            let pool: Vec<ObjectSpec> = (0..n_keys)
                .map(|i| {
                    let mut values = base.clone();
                    values[shape.index()] = shapes[i];
                    ObjectSpec::new(0, slots[i], values)
                })
                .collect();
            let kind = *[OperatorKind::Union, OperatorKind::SymDiff, OperatorKind::Intersection]
                .choose(rng)
                .expect("non-empty");
            let p_in = if kind == OperatorKind::Intersection { 0.7 } else { 0.5 };
            let full = (1u128 << n_keys) - 1;
            for row in 0..3 {
                let mut pick = || (0..n_keys).filter(|_| rng.random_bool(p_in)).fold(0u128, |m, i| m | 1 << i);
                let a = pick();
                let b = pick();
                let c = apply_unchecked(kind, a, b, full).expect("set operator");
                for (col, mask) in [a, b, c].into_iter().enumerate() {
                    for (i, o) in pool.iter().enumerate() {
                        if mask & (1 << i) != 0 {
                            cells[row * 3 + col].push(o.clone());
                        }
                    }
                }
            }
            let category = self.pick_category(0, !use_attr, None);
            planted.push(Rule {
                category,
                trait_id: TraitId::PRESENCE,
                operator: Operator::set(kind),
                scope: Scope::Row,
            });
        }

        let (lo, hi) = self.spec.objects_per_cell;
        if cells.iter().any(|c| c.len() < lo || c.len() > hi) {
            return None;
        }
        let mut cells: Vec<Cell> = cells.into_iter().map(|c| Cell::new(c).expect("valid cell")).collect();
        let truth = cells.pop().expect("nine cells");
        let grid = Grid::new(cells).expect("eight cells");
        planted.sort();
        Some(Core { grid, truth, planted })
    }

    fn choose_attr_rule<R: Rng>(&self, t: TraitId, rng: &mut R) -> AttrRule {
        let def = self.vocab.def(t).expect("registered trait");
        let n = def.domain_size();
        let mut options = vec![AttrRule::Constant];
        if n >= 3 {
            options.push(AttrRule::Latin);
        }
        match def.kind {
            TraitKind::Cyclic => options.extend((1..n as u8).map(AttrRule::Progression)),
            TraitKind::Ordinal => options.extend((1..n as u8).filter(|a| 3 * (*a as usize) < n).map(AttrRule::Progression)),
            TraitKind::Nominal => {}
        }
        // Progressions share one weight with the other two rule shapes.
        let progressions: Vec<_> = options.iter().filter(|o| matches!(o, AttrRule::Progression(_))).copied().collect();
        let mut shapes: Vec<AttrRule> = options.iter().filter(|o| !matches!(o, AttrRule::Progression(_))).copied().collect();
        if let Some(p) = progressions.choose(rng) {
            shapes.push(*p);
        }
        *shapes.choose(rng).expect("constant is always available")
    }

    /// Values for the nine cells in row-major order.
    fn attr_values<R: Rng>(&self, t: TraitId, rule: AttrRule, rng: &mut R) -> Vec<u8> {
        let n = self.vocab.domain_size(t) as u8;
        let def = self.vocab.def(t).expect("registered trait");
        match rule {
            AttrRule::Latin => {
                let mut vals: Vec<u8> = (0..n).collect();
                vals.shuffle(rng);
                let shift = rng.random_range(1..=2usize);
                (0..9).map(|p| vals[(p % 3 + shift * (p / 3)) % 3]).collect()
            }
            AttrRule::Constant => {
                let rows: Vec<u8> = (0..3).map(|_| rng.random_range(0..n)).collect();
                (0..9).map(|p| rows[p / 3]).collect()
            }
            AttrRule::Progression(a) => (0..9)
                .map(|p| {
                    crate::algebra::progression_code(def.kind, n as usize, a, (p % 3) as u8 + 1)
                        .expect("slope chosen in range")
                })
                .collect(),
        }
    }

    /// `k` distinct cells, each 1..=m mutations away from `correct` and each
    /// violating at least one planted rule.
    pub fn make_distractors<R: Rng>(
        &self,
        correct: &Cell,
        grid: &Grid,
        planted: &RuleSet,
        k: usize,
        rng: &mut R,
    ) -> Result<Vec<Cell>, GenerateError> {
        let solver = Solver::new(&self.vocab, self.solver_config.clone());
        let mut out: Vec<Cell> = Vec::with_capacity(k);
        let mut tries = 0;
        while out.len() < k {
            tries += 1;
            if tries > DISTRACTOR_TRIES * k.max(1) {
                return Err(GenerateError::Distractors { wanted: k });
            }
            let cell = self.mutate(correct, rng);
            if cell == *correct || out.contains(&cell) {
                continue;
            }
            if solver.check_answer(grid, planted, &cell, 0).fully_satisfying {
                continue;
            }
            out.push(cell);
        }
        Ok(out)
    }

    /// `k` distinct mutations of `correct` with no rule check, drawn in a
    /// fixed order so that a shorter list is a prefix of a longer one.
    pub fn raw_distractors<R: Rng>(&self, correct: &Cell, k: usize, rng: &mut R) -> Result<Vec<Cell>, GenerateError> {
        let mut out: Vec<Cell> = Vec::with_capacity(k);
        let mut tries = 0;
        while out.len() < k {
            tries += 1;
            if tries > DISTRACTOR_TRIES * k.max(1) {
                return Err(GenerateError::Distractors { wanted: k });
            }
            let cell = self.mutate(correct, rng);
            if cell != *correct && !out.contains(&cell) {
                out.push(cell);
            }
        }
        Ok(out)
    }

    /// Applies 1..=m random edits: flip a trait value, add, remove or move
    /// an object.
    pub fn mutate<R: Rng>(&self, cell: &Cell, rng: &mut R) -> Cell {
        let (lo, hi) = self.spec.distractor_mutations;
        let n = rng.random_range(lo..=hi);
        let mut out = cell.clone();
        for _ in 0..n {
            mutate_once(&self.vocab, &mut out, rng);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutation {
    Flip,
    Add,
    Remove,
    Move,
}

/// Relative weights of flip / add / remove / move edits.
pub const MUTATION_WEIGHTS: [(Mutation, u32); 4] =
    [(Mutation::Flip, 62), (Mutation::Add, 18), (Mutation::Remove, 18), (Mutation::Move, 2)];

fn pick_mutation<R: Rng>(rng: &mut R) -> Mutation {
    let total: u32 = MUTATION_WEIGHTS.iter().map(|(_, w)| w).sum();
    let mut x = rng.random_range(0..total);
    for (m, w) in MUTATION_WEIGHTS {
        if x < w {
            return m;
        }
        x -= w;
    }
    unreachable!()
}

fn free_slots(cell: &Cell, layer: u8) -> Vec<u8> {
    (0..SLOTS)
        .filter(|&s| !cell.objects().iter().any(|o| o.identity.layer == layer && o.identity.slot == s))
        .collect()
}

fn mutate_once<R: Rng>(vocab: &Vocabulary, cell: &mut Cell, rng: &mut R) {
    let mut m = pick_mutation(rng);
    if cell.is_empty() {
        m = Mutation::Add;
    } else if m == Mutation::Add && cell.len() >= MAX_OBJECTS {
        m = Mutation::Flip;
    }
    match m {
        Mutation::Flip => {
            let i = rng.random_range(0..cell.len());
            let t = TraitId(rng.random_range(0..vocab.len() as u8));
            let n = vocab.domain_size(t) as u8;
            let obj = &mut cell.objects_mut()[i];
            let old = obj.values[t.index()];
            obj.values[t.index()] = (old + rng.random_range(1..n)) % n;
        }
        Mutation::Add => {
            let layers: Vec<u8> = {
                let mut ls: Vec<u8> = cell.objects().iter().map(|o| o.identity.layer).collect();
                ls.dedup();
                if ls.is_empty() {
                    vec![0]
                } else {
                    ls
                }
            };
            let layer = *layers.choose(rng).expect("non-empty");
            let slots = free_slots(cell, layer);
            if let Some(&slot) = slots.choose(rng) {
                let values = vocab.ids().map(|t| rng.random_range(0..vocab.domain_size(t) as u8)).collect();
                cell.objects_mut().push(ObjectSpec::new(layer, slot, values));
                cell.resort();
            }
        }
        Mutation::Remove => {
            let i = rng.random_range(0..cell.len());
            cell.objects_mut().remove(i);
        }
        Mutation::Move => {
            let i = rng.random_range(0..cell.len());
            let layer = cell.objects()[i].identity.layer;
            if let Some(&slot) = free_slots(cell, layer).choose(rng) {
                cell.objects_mut()[i].identity.slot = slot;
                cell.resort();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generator(spec: GeneratorSpec) -> Generator {
        Generator::new(Arc::new(Vocabulary::standard()), spec).unwrap()
    }

    #[test]
    fn determinism() {
        let g = generator(GeneratorSpec::with_seed(9));
        assert_eq!(g.sample_problem(3).unwrap(), g.sample_problem(3).unwrap());
        assert_ne!(g.sample_problem(3).unwrap(), g.sample_problem(4).unwrap());
    }

    #[test]
    fn emitted_problems_are_unique() {
        let g = generator(GeneratorSpec::with_seed(1));
        for i in 0..50 {
            let p = g.sample_problem(i).unwrap();
            let v = crate::reasoner::solve(&p, Mode::Strict);
            assert_eq!(v.outcome, Outcome::Unique(p.truth.unwrap()));
            assert_eq!(p.candidates.len(), 8);
            p.validate().unwrap();
        }
    }

    #[test]
    fn presence_union_planting() {
        let spec = GeneratorSpec {
            traits_in_play: vec!["presence".into()],
            categories_in_play: vec!["all".into()],
            rules_per_problem: (1, 1),
            ..GeneratorSpec::with_seed(5)
        };
        let g = generator(spec);
        let mut seen_union = false;
        for i in 0..30 {
            let p = g.sample_problem(i).unwrap();
            let planted = &p.provenance.as_ref().unwrap().planted;
            assert_eq!(planted.len(), 1);
            assert_eq!(planted[0].trait_id, TraitId::PRESENCE);
            assert_eq!(planted[0].category, Category::All);
            let v = crate::reasoner::solve(&p, Mode::Strict);
            assert_eq!(v.outcome, Outcome::Unique(p.truth.unwrap()));
            if planted[0].operator == Operator::set(OperatorKind::Union) {
                seen_union = true;
                assert!(v.rules.contains(Category::All, TraitId::PRESENCE, planted[0].operator, Scope::Row));
            }
        }
        assert!(seen_union);
    }

    #[test]
    fn distractors_violate_planted_rules() {
        let g = generator(GeneratorSpec::with_seed(2));
        let mut rng = stream_rng(2, 0, 9);
        let core = (0..).find_map(|_| g.sample_core(&mut rng)).unwrap();
        let planted = RuleSet { rules: core.planted.clone(), dropped_pairs: vec![] };
        let ds = g.make_distractors(&core.truth, &core.grid, &planted, 7, &mut rng).unwrap();
        assert_eq!(ds.len(), 7);
        let solver = Solver::new(g.vocab(), SolverConfig::default());
        for (i, d) in ds.iter().enumerate() {
            assert_ne!(d, &core.truth);
            assert!(!ds[..i].contains(d));
            assert!(!solver.check_answer(&core.grid, &planted, d, 0).fully_satisfying);
        }
    }

    #[test]
    fn raw_distractors_are_prefix_stable() {
        let g = generator(GeneratorSpec::with_seed(4));
        let p = g.sample_problem(0).unwrap();
        let truth = p.truth_cell().unwrap();
        let long = g.raw_distractors(truth, 15, &mut stream_rng(4, 0, SCALING_STREAM)).unwrap();
        let short = g.raw_distractors(truth, 3, &mut stream_rng(4, 0, SCALING_STREAM)).unwrap();
        assert_eq!(&long[..3], &short[..]);
    }

    #[test]
    fn two_candidates_never_duplicate_truth() {
        let spec = GeneratorSpec { candidate_count: 2, ..GeneratorSpec::with_seed(8) };
        let g = generator(spec);
        for i in 0..20 {
            let p = g.sample_problem(i).unwrap();
            assert_ne!(p.candidates[0], p.candidates[1]);
        }
    }

    #[test]
    fn invalid_specs() {
        let v = Arc::new(Vocabulary::standard());
        let bad = |spec| Generator::new(v.clone(), spec).is_err();
        assert!(bad(GeneratorSpec { candidate_count: 1, ..Default::default() }));
        assert!(bad(GeneratorSpec { objects_per_cell: (1, 7), ..Default::default() }));
        assert!(bad(GeneratorSpec { rules_per_problem: (3, 2), ..Default::default() }));
        assert!(bad(GeneratorSpec { traits_in_play: vec!["mood".into()], ..Default::default() }));
        assert!(bad(GeneratorSpec { categories_in_play: vec!["slot(1)".into()], ..Default::default() }));
    }

    #[test]
    fn exhausted_budget_is_an_error() {
        // A single object per cell cannot host a presence pool.
        let spec = GeneratorSpec {
            traits_in_play: vec!["presence".into()],
            objects_per_cell: (1, 1),
            max_retries: 5,
            ..GeneratorSpec::with_seed(0)
        };
        let g = generator(spec);
        assert!(matches!(g.sample_problem(0), Err(GenerateError::RetriesExhausted { .. })));
    }
}
