//! Independent re-implementation of rule induction over label strings.
//!
//! Shares no code with the solver beyond reading cells: projections are
//! `BTreeSet<String>` of labels, categories are recomputed from scratch and
//! every operator is written out as a set expression.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relmat::{Cell, Grid, ObjectSpec, Vocabulary};

type Labels = BTreeSet<String>;

const ROWS: [[usize; 3]; 3] = [[0, 1, 2], [3, 4, 5], [6, 7, 8]];
const COLS: [[usize; 3]; 3] = [[0, 3, 6], [1, 4, 7], [2, 5, 8]];

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Cat {
    All,
    Layer(u8),
    Is(String, String),
}

impl Cat {
    fn name(&self) -> String {
        match self {
            Cat::All => "all".into(),
            Cat::Layer(l) => format!("layer({l})"),
            Cat::Is(t, v) => format!("is({t},{v})"),
        }
    }
}

fn label(vocab: &Vocabulary, o: &ObjectSpec, t: usize) -> String {
    vocab.traits()[t].values[o.values[t] as usize].clone()
}

fn selects(vocab: &Vocabulary, cat: &Cat, o: &ObjectSpec) -> bool {
    match cat {
        Cat::All => true,
        Cat::Layer(l) => o.identity.layer == *l,
        Cat::Is(t, v) => {
            let ti = vocab.traits().iter().position(|d| &d.name == t).unwrap();
            &label(vocab, o, ti) == v
        }
    }
}

/// `None` trait index means presence, keyed by layer and shape label.
fn project(vocab: &Vocabulary, cell: &Cell, cat: &Cat, t: Option<usize>) -> Labels {
    let shape = vocab.traits().iter().position(|d| d.name == "shape");
    cell.objects()
        .iter()
        .filter(|o| selects(vocab, cat, o))
        .map(|o| match t {
            Some(t) => label(vocab, o, t),
            None => format!("L{}:{}", o.identity.layer, shape.map_or(String::new(), |s| label(vocab, o, s))),
        })
        .collect()
}

fn categories(vocab: &Vocabulary, given: &[Cell]) -> Vec<Cat> {
    let mut out = BTreeSet::from([Cat::All]);
    for o in given.iter().flat_map(|c| c.objects()) {
        out.insert(Cat::Layer(o.identity.layer));
    }
    for (t, def) in vocab.traits().iter().enumerate() {
        for v in &def.values {
            if given.iter().all(|c| c.objects().iter().any(|o| &label(vocab, o, t) == v)) {
                out.insert(Cat::Is(def.name.clone(), v.clone()));
            }
        }
    }
    out.into_iter().collect()
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Union,
    Intersection,
    SymDiff,
    NotUnion,
    NotIntersection,
    NotSymDiff,
    Progression(usize),
}

impl Op {
    fn name(self) -> String {
        match self {
            Op::Union => "union".into(),
            Op::Intersection => "intersection".into(),
            Op::SymDiff => "symdiff".into(),
            Op::NotUnion => "notunion".into(),
            Op::NotIntersection => "notintersection".into(),
            Op::NotSymDiff => "notsymdiff".into(),
            Op::Progression(a) => format!("progression({a})"),
        }
    }
}

fn ops_for(vocab: &Vocabulary, t: Option<usize>) -> Vec<Op> {
    let mut ops = vec![Op::Union, Op::Intersection, Op::SymDiff, Op::NotUnion, Op::NotIntersection, Op::NotSymDiff];
    if let Some(t) = t {
        let def = &vocab.traits()[t];
        if matches!(def.kind.keyword(), "cyclic" | "ordinal") {
            ops.extend((1..=def.values.len()).map(Op::Progression));
        }
    }
    ops
}

fn holds(vocab: &Vocabulary, t: Option<usize>, op: Op, line: [&Labels; 3], universe: &Labels) -> bool {
    let [a, b, c] = line;
    let complement = |s: Labels| -> Labels { universe.difference(&s).cloned().collect() };
    let expect: Labels = match op {
        Op::Union => a.union(b).cloned().collect(),
        Op::Intersection => a.intersection(b).cloned().collect(),
        Op::SymDiff => a.symmetric_difference(b).cloned().collect(),
        Op::NotUnion => complement(a.union(b).cloned().collect()),
        Op::NotIntersection => complement(a.intersection(b).cloned().collect()),
        Op::NotSymDiff => complement(a.symmetric_difference(b).cloned().collect()),
        Op::Progression(slope) => {
            let def = &vocab.traits()[t.expect("numeric trait")];
            let n = def.values.len();
            return line.iter().enumerate().all(|(i, s)| {
                let y = slope * (i + 1);
                let want = match def.kind.keyword() {
                    "cyclic" => Some(y % n),
                    _ => (y < n).then_some(y),
                };
                s.len() == 1 && want.map(|w| &def.values[w]) == s.iter().next()
            });
        }
    };
    &expect == c
}

struct Pair {
    cat: Cat,
    t: Option<usize>,
    given: Vec<Labels>,
    universe: Labels,
}

/// The oracle's view of one grid.
pub struct Oracle<'v> {
    vocab: &'v Vocabulary,
    pairs: Vec<Pair>,
    /// Rules as `category trait operator scope` strings, sorted.
    pub rules: Vec<String>,
}

impl<'v> Oracle<'v> {
    pub fn new(vocab: &'v Vocabulary, grid: &Grid) -> Self {
        let given = grid.cells();
        let traits: Vec<Option<usize>> = (0..vocab.traits().len()).map(Some).chain([None]).collect();
        let mut pairs = Vec::new();
        let mut rules = BTreeSet::new();
        for cat in categories(vocab, given) {
            for &t in &traits {
                let proj: Vec<Labels> = given.iter().map(|c| project(vocab, c, &cat, t)).collect();
                let universe: Labels = proj.iter().flatten().cloned().collect();
                for (scope, lines) in [("row", ROWS), ("column", COLS)] {
                    for op in ops_for(vocab, t) {
                        let ok = lines[..2]
                            .iter()
                            .all(|l| holds(vocab, t, op, [&proj[l[0]], &proj[l[1]], &proj[l[2]]], &universe));
                        if ok {
                            let tname = t.map_or("presence".to_string(), |t| vocab.traits()[t].name.clone());
                            rules.insert(format!("{} {} {} {}", cat.name(), tname, op.name(), scope));
                        }
                    }
                }
                pairs.push(Pair { cat: cat.clone(), t, given: proj, universe });
            }
        }
        Oracle { vocab, pairs, rules: rules.into_iter().collect() }
    }

    /// Whether `candidate` in the hole breaks none of the rules.
    pub fn accepts(&self, candidate: &Cell) -> bool {
        self.violated(candidate) == 0
    }

    pub fn violated(&self, candidate: &Cell) -> usize {
        let mut count = 0;
        for rule in &self.rules {
            let parts: Vec<&str> = rule.split(' ').collect();
            let pair = self
                .pairs
                .iter()
                .find(|p| {
                    p.cat.name() == parts[0]
                        && p.t.map_or("presence", |t| self.vocab.traits()[t].name.as_str()) == parts[1]
                })
                .expect("rule pair");
            let op = ops_for(self.vocab, pair.t).into_iter().find(|o| o.name() == parts[2]).unwrap();
            let third = if parts[3] == "row" { ROWS[2] } else { COLS[2] };
            let c = project(self.vocab, candidate, &pair.cat, pair.t);
            if !holds(self.vocab, pair.t, op, [&pair.given[third[0]], &pair.given[third[1]], &c], &pair.universe) {
                count += 1;
            }
        }
        count
    }
}

/// A random cell over a narrow palette so that rules hold by chance often.
pub fn random_cell(vocab: &Vocabulary, rng: &mut ChaCha8Rng, palette: usize) -> Cell {
    let n = rng.random_range(0..=4usize);
    let mut slots: Vec<(u8, u8)> = (0..2u8).flat_map(|l| (0..6u8).map(move |s| (l, s))).collect();
    let mut objects = Vec::new();
    for _ in 0..n {
        let (layer, slot) = slots.swap_remove(rng.random_range(0..slots.len()));
        let values = vocab
            .traits()
            .iter()
            .map(|d| rng.random_range(0..palette.min(d.values.len())) as u8)
            .collect();
        objects.push(ObjectSpec::new(layer, slot, values));
    }
    Cell::new(objects).expect("distinct identities")
}

/// Random grid and a few random candidates for stream `seed`.
pub fn random_grid(vocab: &Vocabulary, seed: u64) -> (Grid, Vec<Cell>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let palette = rng.random_range(1..=3usize);
    let cells = (0..8).map(|_| random_cell(vocab, &mut rng, palette)).collect();
    let candidates = (0..4).map(|_| random_cell(vocab, &mut rng, palette)).collect();
    (Grid::new(cells).unwrap(), candidates)
}

/// Compares the solver with the oracle on one grid: the rule strings and
/// every candidate's verdict and violation count.
pub fn agrees(vocab: &Vocabulary, grid: &Grid, candidates: &[Cell]) -> Result<(), String> {
    let solver = relmat::Solver::new(vocab, relmat::SolverConfig::default());
    let rules = solver.induce_rules(grid, &solver.derive_categories(grid));
    let mut got: Vec<String> = rules.rules.iter().map(|r| r.display(vocab).to_string()).collect();
    got.sort();
    let oracle = Oracle::new(vocab, grid);
    if got != oracle.rules {
        let missing: Vec<_> = oracle.rules.iter().filter(|r| !got.contains(r)).collect();
        let extra: Vec<_> = got.iter().filter(|r| !oracle.rules.contains(r)).collect();
        return Err(format!("rules differ: missing {missing:?}, extra {extra:?}"));
    }
    for (i, c) in candidates.iter().enumerate() {
        let report = solver.check_answer(grid, &rules, c, i);
        let violated = oracle.violated(c);
        if report.violated != violated || report.fully_satisfying != (violated == 0) {
            return Err(format!("candidate {i}: solver violated {}, oracle {violated}", report.violated));
        }
    }
    Ok(())
}

/// The grids the oracle checks: random narrow-palette grids followed by
/// generated problems, `count` in total.
pub fn oracle_cases(vocab: &std::sync::Arc<Vocabulary>, count: usize, seed: u64) -> Vec<(Grid, Vec<Cell>)> {
    let random = count * 3 / 5;
    let mut out: Vec<_> = (0..random as u64).map(|i| random_grid(vocab, seed ^ (i << 8))).collect();
    let generator = relmat::Generator::new(vocab.clone(), relmat::GeneratorSpec::with_seed(seed)).unwrap();
    let problems = generator.generate_corpus((count - random) as u64, relmat::par::Execution::Parallel).unwrap();
    out.extend(problems.into_iter().map(|p| (p.grid, p.candidates)));
    out
}
