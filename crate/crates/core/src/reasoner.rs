//! Rule induction over complete lines and stable-model-style filtering of
//! candidate answers.
//!
//! For every (category, trait) pair the solver tries each operator on the
//! two complete rows (and, when enabled, the two complete columns). An
//! operator that holds on both lines of a scope survives as a [`Rule`] for
//! that scope. A candidate answer is a solution when, placed in the hole,
//! it violates none of the surviving rules on the third line.
//!
//! Categories are derived from the given cells alone: the universal
//! category, one per layer, and one per trait value carried by some object
//! in all eight given cells.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::algebra::{apply_unchecked, progression_code, Operator, OperatorKind};
use crate::model::{
    project_argument, Category, Cell, Grid, IdentityKey, Problem, Rule, Scope, GIVEN_CELLS, LAYERS,
    SLOTS,
};
use crate::vocab::{TraitId, TraitKind, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Induce column-scoped rules alongside row-scoped ones.
    pub columns: bool,
    /// Include the slot in presence identity keys.
    pub slot_identity: bool,
    /// Derive one category per occupied slot position.
    pub slot_categories: bool,
    /// Traits whose values may define categories. `None` means all.
    pub category_traits: Option<Vec<TraitId>>,
    /// Traits whose observations are withheld from the solver.
    pub suppressed: Vec<TraitId>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            columns: true,
            slot_identity: false,
            slot_categories: false,
            category_traits: None,
            suppressed: Vec::new(),
        }
    }
}

impl SolverConfig {
    fn is_suppressed(&self, t: TraitId) -> bool {
        self.suppressed.contains(&t)
    }

    pub fn identity_key(&self, vocab: &Vocabulary) -> IdentityKey {
        let key = IdentityKey::new(vocab, self.slot_identity);
        match key.shape_trait() {
            Some(s) if self.is_suppressed(s) => key.without_shape(),
            _ => key,
        }
    }

    /// Traits the solver reasons about, presence last.
    pub fn active_traits(&self, vocab: &Vocabulary) -> Vec<TraitId> {
        let mut out: Vec<_> = vocab.ids().filter(|&t| !self.is_suppressed(t)).collect();
        if self.identity_key(vocab).fits() {
            out.push(TraitId::PRESENCE);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Mode {
    #[default]
    Strict,
    Ranked,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    pub dropped_pairs: Vec<(Category, TraitId)>,
}

impl RuleSet {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn contains(&self, category: Category, trait_id: TraitId, op: Operator, scope: Scope) -> bool {
        self.rules.contains(&Rule { category, trait_id, operator: op, scope })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatisfactionReport {
    pub candidate_index: usize,
    pub satisfied: usize,
    pub violated: usize,
    pub fully_satisfying: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Unique(usize),
    /// Candidate indices by descending satisfied count; ties keep index
    /// order and are not broken.
    Ambiguous(Vec<usize>),
    Unsat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub reports: Vec<SatisfactionReport>,
    pub rules: RuleSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorClass {
    Accurate,
    FalsePositive,
    FalseNegative,
    Both,
}

impl ErrorClass {
    pub fn has_false_negative(self) -> bool {
        matches!(self, ErrorClass::FalseNegative | ErrorClass::Both)
    }

    pub fn has_false_positive(self) -> bool {
        matches!(self, ErrorClass::FalsePositive | ErrorClass::Both)
    }
}

/// Grid cell indices of the three lines of a scope. Index 8 is the hole.
fn lines(scope: Scope) -> [[usize; 3]; 3] {
    match scope {
        Scope::Row => [[0, 1, 2], [3, 4, 5], [6, 7, 8]],
        Scope::Column => [[0, 3, 6], [1, 4, 7], [2, 5, 8]],
    }
}

/// Projections of one (category, trait) pair over the given cells.
#[derive(Clone, Copy)]
struct PairView {
    cells: [u128; GIVEN_CELLS],
    universe: u128,
}

/// Tests one operator on one line `(a, b, c)`.
#[inline]
fn holds(op: Operator, kind: TraitKind, domain: usize, line: [u128; 3], universe: u128) -> bool {
    match op.kind {
        OperatorKind::Progression => line.iter().enumerate().all(|(i, &bits)| {
            bits.count_ones() == 1
                && progression_code(kind, domain, op.param, i as u8 + 1)
                    == Some(bits.trailing_zeros() as u8)
        }),
        k => apply_unchecked(k, line[0], line[1], universe) == Some(line[2]),
    }
}

/// Stateless solver bound to a vocabulary and configuration.
#[derive(Debug, Clone)]
pub struct Solver<'v> {
    vocab: &'v Vocabulary,
    config: SolverConfig,
    key: IdentityKey,
}

impl<'v> Solver<'v> {
    pub fn new(vocab: &'v Vocabulary, config: SolverConfig) -> Self {
        let key = config.identity_key(vocab);
        Solver { vocab, config, key }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    fn scopes(&self) -> &'static [Scope] {
        if self.config.columns {
            &[Scope::Row, Scope::Column]
        } else {
            &[Scope::Row]
        }
    }

    fn trait_shape(&self, t: TraitId) -> (TraitKind, usize) {
        match self.vocab.def(t) {
            Some(d) if !t.is_presence() => (d.kind, d.domain_size()),
            _ => (TraitKind::Nominal, self.key.key_space()),
        }
    }

    /// Candidate operators for a trait: the six set operators, then one
    /// progression per slope for numeric traits.
    pub fn operators(&self, t: TraitId) -> Vec<Operator> {
        let mut ops: Vec<_> = OperatorKind::SET_KINDS.iter().map(|&k| Operator::set(k)).collect();
        let (kind, domain) = self.trait_shape(t);
        if !t.is_presence() && kind.is_numeric() {
            ops.extend((1..=domain as u8).map(Operator::progression));
        }
        ops
    }

    fn project(&self, cell: &Cell, c: &Category, t: TraitId) -> u128 {
        project_argument(cell, c, t, &self.key).bits()
    }

    fn view(&self, grid: &Grid, c: &Category, t: TraitId) -> PairView {
        let mut cells = [0u128; GIVEN_CELLS];
        for (slot, cell) in cells.iter_mut().zip(grid.cells()) {
            *slot = self.project(cell, c, t);
        }
        let universe = cells.iter().fold(0, |acc, b| acc | b);
        PairView { cells, universe }
    }

    /// Categories observable in the given cells.
    pub fn derive_categories(&self, grid: &Grid) -> Vec<Category> {
        let mut out = BTreeSet::new();
        out.insert(Category::All);
        let objects = grid.cells().iter().flat_map(|c| c.objects());
        for o in objects.clone() {
            if o.identity.layer < LAYERS {
                out.insert(Category::Layer(o.identity.layer));
            }
            if self.config.slot_categories && o.identity.slot < SLOTS {
                out.insert(Category::Slot(o.identity.slot));
            }
        }
        let traits: Vec<TraitId> = match &self.config.category_traits {
            Some(ts) => ts.clone(),
            None => self.vocab.ids().collect(),
        };
        for t in traits.into_iter().filter(|&t| !self.config.is_suppressed(t)) {
            for code in 0..self.vocab.domain_size(t) as u8 {
                let everywhere = grid
                    .cells()
                    .iter()
                    .all(|cell| cell.objects().iter().any(|o| o.value(t) == code));
                if everywhere {
                    out.insert(Category::Is(t, code));
                }
            }
        }
        out.into_iter().collect()
    }

    pub fn induce_rules(&self, grid: &Grid, categories: &[Category]) -> RuleSet {
        let mut rules = Vec::new();
        let mut dropped = Vec::new();
        for c in categories {
            for t in self.config.active_traits(self.vocab) {
                let view = self.view(grid, c, t);
                let (kind, domain) = self.trait_shape(t);
                let before = rules.len();
                for &scope in self.scopes() {
                    let ls = lines(scope);
                    for op in self.operators(t) {
                        let ok = ls[..2].iter().all(|l| {
                            let line = [view.cells[l[0]], view.cells[l[1]], view.cells[l[2]]];
                            holds(op, kind, domain, line, view.universe)
                        });
                        if ok {
                            rules.push(Rule { category: *c, trait_id: t, operator: op, scope });
                        }
                    }
                }
                if rules.len() == before {
                    dropped.push((*c, t));
                }
            }
        }
        rules.sort();
        rules.dedup();
        RuleSet { rules, dropped_pairs: dropped }
    }

    /// Evaluates every rule on the third line of its scope with `candidate`
    /// in the hole.
    pub fn check_answer(
        &self,
        grid: &Grid,
        rules: &RuleSet,
        candidate: &Cell,
        index: usize,
    ) -> SatisfactionReport {
        let compiled = self.compile(grid, rules);
        self.check_compiled(&compiled, candidate, index)
    }

    fn compile(&self, grid: &Grid, rules: &RuleSet) -> Vec<CompiledRule> {
        let mut cache: Vec<((Category, TraitId), PairView)> = Vec::new();
        rules
            .rules
            .iter()
            .map(|r| {
                let pair = (r.category, r.trait_id);
                let view = match cache.iter().find(|(k, _)| *k == pair) {
                    Some((_, v)) => *v,
                    None => {
                        let v = self.view(grid, &r.category, r.trait_id);
                        cache.push((pair, v));
                        v
                    }
                };
                let third = lines(r.scope)[2];
                let (kind, domain) = self.trait_shape(r.trait_id);
                CompiledRule {
                    rule: *r,
                    a: view.cells[third[0]],
                    b: view.cells[third[1]],
                    universe: view.universe,
                    kind,
                    domain,
                }
            })
            .collect()
    }

    fn check_compiled(&self, compiled: &[CompiledRule], candidate: &Cell, index: usize) -> SatisfactionReport {
        let mut satisfied = 0;
        let mut violated = 0;
        let mut memo: Vec<((Category, TraitId), u128)> = Vec::new();
        for cr in compiled {
            let pair = (cr.rule.category, cr.rule.trait_id);
            let c = match memo.iter().find(|(k, _)| *k == pair) {
                Some((_, bits)) => *bits,
                None => {
                    let bits = self.project(candidate, &pair.0, pair.1);
                    memo.push((pair, bits));
                    bits
                }
            };
            if holds(cr.rule.operator, cr.kind, cr.domain, [cr.a, cr.b, c], cr.universe) {
                satisfied += 1;
            } else {
                violated += 1;
            }
        }
        SatisfactionReport { candidate_index: index, satisfied, violated, fully_satisfying: violated == 0 }
    }

    /// Rules the candidate breaks on the third line.
    pub fn violations(&self, grid: &Grid, rules: &RuleSet, candidate: &Cell) -> Vec<Rule> {
        self.compile(grid, rules)
            .into_iter()
            .filter(|cr| {
                let c = self.project(candidate, &cr.rule.category, cr.rule.trait_id);
                !holds(cr.rule.operator, cr.kind, cr.domain, [cr.a, cr.b, c], cr.universe)
            })
            .map(|cr| cr.rule)
            .collect()
    }

    pub fn solve(&self, problem: &Problem, mode: Mode) -> Verdict {
        let categories = self.derive_categories(&problem.grid);
        let rules = self.induce_rules(&problem.grid, &categories);
        let compiled = self.compile(&problem.grid, &rules);
        let reports: Vec<_> = problem
            .candidates
            .iter()
            .enumerate()
            .map(|(i, c)| self.check_compiled(&compiled, c, i))
            .collect();
        let outcome = outcome_of(&reports, mode);
        Verdict { outcome, reports, rules }
    }
}

struct CompiledRule {
    rule: Rule,
    a: u128,
    b: u128,
    universe: u128,
    kind: TraitKind,
    domain: usize,
}

fn ranked(reports: &[SatisfactionReport], only_full: bool) -> Vec<usize> {
    let mut idx: Vec<_> = reports
        .iter()
        .filter(|r| !only_full || r.fully_satisfying)
        .map(|r| r.candidate_index)
        .collect();
    idx.sort_by_key(|&i| std::cmp::Reverse(reports[i].satisfied));
    idx
}

fn outcome_of(reports: &[SatisfactionReport], mode: Mode) -> Outcome {
    let full: Vec<_> = reports.iter().filter(|r| r.fully_satisfying).collect();
    match (full.len(), mode) {
        (1, _) => Outcome::Unique(full[0].candidate_index),
        (0, Mode::Strict) => Outcome::Unsat,
        (_, Mode::Strict) => Outcome::Ambiguous(ranked(reports, true)),
        (_, Mode::Ranked) => Outcome::Ambiguous(ranked(reports, false)),
    }
}

/// Rule induction with the default configuration.
pub fn induce_rules(vocab: &Vocabulary, grid: &Grid, categories: &[Category]) -> RuleSet {
    Solver::new(vocab, SolverConfig::default()).induce_rules(grid, categories)
}

/// Single-candidate check with the default configuration.
pub fn check_answer(
    vocab: &Vocabulary,
    grid: &Grid,
    rules: &RuleSet,
    candidate: &Cell,
    index: usize,
) -> SatisfactionReport {
    Solver::new(vocab, SolverConfig::default()).check_answer(grid, rules, candidate, index)
}

/// Solves with the default configuration.
pub fn solve(problem: &Problem, mode: Mode) -> Verdict {
    Solver::new(&problem.vocab, SolverConfig::default()).solve(problem, mode)
}

pub fn classify(verdict: &Verdict, ground_truth: usize) -> ErrorClass {
    if verdict.outcome == Outcome::Unique(ground_truth) {
        return ErrorClass::Accurate;
    }
    let false_negative = !verdict
        .reports
        .get(ground_truth)
        .is_some_and(|r| r.fully_satisfying);
    let false_positive = verdict
        .reports
        .iter()
        .any(|r| r.candidate_index != ground_truth && r.fully_satisfying);
    match (false_positive, false_negative) {
        (true, true) => ErrorClass::Both,
        (true, false) => ErrorClass::FalsePositive,
        _ => ErrorClass::FalseNegative,
    }
}
