//! Line-based logic-atoms format for problems, and a one-way export of
//! the same facts in ASP syntax.
//!
//! ```text
//! @format relmat-atoms 1
//! @trait shape nominal circle square triangle diamond star cross
//! @candidates 8
//! @provenance 42 7 0123456789abcdef 3
//! @planted layer(0) presence union row
//! cell(q1).
//! object(q1_l0_s2,q1,0,2).
//! argument(q1_l0_s2,shape,circle).
//! belongs(q1_l0_s2,all).
//! belongs(q1_l0_s2,layer(0)).
//! candidate(0,a0).
//! truth(3).
//! ```
//!
//! Query cells are `q1`..`q8` in row-major order, candidate cells `a0`..
//! Each object carries one `argument` per registered trait and `belongs`
//! facts for the universal category and its layer. `@provenance`,
//! `@planted` and `truth` are written only when the truth is included.
//! `%` starts a comment line. The encoder writes facts in a fixed order, so
//! an encoding is unique for a given problem.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::Operator;
use crate::model::{
    Category, Cell, Grid, Identity, ObjectSpec, Problem, Provenance, Rule, Scope, GIVEN_CELLS, LAYERS,
    MAX_OBJECTS, SLOTS,
};
use crate::vocab::{is_identifier, TraitDef, TraitId, TraitKind, VocabError, Vocabulary};

pub const FORMAT_NAME: &str = "relmat-atoms";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AtomsErrorKind {
    #[error("syntax: {0}")]
    Syntax(String),
    #[error("header: {0}")]
    Header(String),
    #[error("vocabulary: {0}")]
    Vocabulary(#[from] VocabError),
    #[error("unknown trait `{0}`")]
    UnknownTrait(String),
    #[error("value `{value}` is not in the vocabulary of `{trait_name}`")]
    UnknownValue { trait_name: String, value: String },
    #[error("unknown predicate `{name}/{arity}`")]
    UnknownPredicate { name: String, arity: usize },
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
    #[error("cell `{0}` declared twice")]
    DuplicateCell(String),
    #[error("missing cell `{0}`")]
    MissingCell(String),
    #[error("object `{0}` declared twice")]
    DuplicateObject(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("cell `{cell}` has two objects at layer {layer} slot {slot}")]
    DuplicateIdentity { cell: String, layer: u8, slot: u8 },
    #[error("layer {0} is outside 0..{LAYERS}")]
    BadLayer(u32),
    #[error("slot {0} is outside 0..{SLOTS}")]
    BadSlot(u32),
    #[error("cell `{cell}` has {count} objects; the bound is {MAX_OBJECTS}")]
    TooManyObjects { cell: String, count: usize },
    #[error("object `{object}` has no `{trait_name}` argument")]
    MissingArgument { object: String, trait_name: String },
    #[error("object `{object}` has two `{trait_name}` arguments")]
    DuplicateArgument { object: String, trait_name: String },
    #[error("unknown category `{0}`")]
    BadCategory(String),
    #[error("object `{object}` does not belong to `{category}`")]
    MembershipMismatch { object: String, category: String },
    #[error("truth {truth} is out of range for {count} candidates")]
    TruthOutOfRange { truth: usize, count: usize },
    #[error("truth declared twice")]
    DuplicateTruth,
}

impl AtomsErrorKind {
    /// Short machine-readable category of the diagnostic.
    pub fn category(&self) -> &'static str {
        match self {
            AtomsErrorKind::Syntax(_) => "syntax",
            AtomsErrorKind::Header(_) | AtomsErrorKind::Vocabulary(_) => "header",
            AtomsErrorKind::UnknownTrait(_) | AtomsErrorKind::UnknownValue { .. } => "vocabulary",
            AtomsErrorKind::UnknownPredicate { .. } => "predicate",
            AtomsErrorKind::UnknownCell(_)
            | AtomsErrorKind::DuplicateCell(_)
            | AtomsErrorKind::MissingCell(_)
            | AtomsErrorKind::TooManyObjects { .. } => "cell",
            AtomsErrorKind::DuplicateObject(_)
            | AtomsErrorKind::UnknownObject(_)
            | AtomsErrorKind::DuplicateIdentity { .. }
            | AtomsErrorKind::BadLayer(_)
            | AtomsErrorKind::BadSlot(_) => "object",
            AtomsErrorKind::MissingArgument { .. } | AtomsErrorKind::DuplicateArgument { .. } => "argument",
            AtomsErrorKind::BadCategory(_) | AtomsErrorKind::MembershipMismatch { .. } => "membership",
            AtomsErrorKind::TruthOutOfRange { .. } | AtomsErrorKind::DuplicateTruth => "truth",
        }
    }
}

/// A decoding failure at a 1-based line and column.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{column}: {kind}")]
pub struct AtomsError {
    pub line: usize,
    pub column: usize,
    pub kind: AtomsErrorKind,
}

fn err<T>(line: usize, column: usize, kind: AtomsErrorKind) -> Result<T, AtomsError> {
    Err(AtomsError { line, column, kind })
}

fn header_error(line: usize, msg: String) -> AtomsError {
    AtomsError { line, column: 1, kind: AtomsErrorKind::Header(msg) }
}

pub fn query_cell_name(pos: usize) -> String {
    format!("q{}", pos + 1)
}

pub fn candidate_cell_name(k: usize) -> String {
    format!("a{k}")
}

pub fn object_id(cell: &str, id: Identity) -> String {
    format!("{cell}_l{}_s{}", id.layer, id.slot)
}

fn write_cell_facts(out: &mut String, vocab: &Vocabulary, cell_name: &str, cell: &Cell) {
    for o in cell.objects() {
        let id = object_id(cell_name, o.identity);
        let _ = writeln!(out, "object({id},{cell_name},{},{}).", o.identity.layer, o.identity.slot);
        for t in vocab.ids() {
            let _ = writeln!(out, "argument({id},{},{}).", vocab.trait_name(t), vocab.label(t, o.value(t)));
        }
        let _ = writeln!(out, "belongs({id},all).");
        let _ = writeln!(out, "belongs({id},layer({})).", o.identity.layer);
    }
}

/// Canonical atoms text for `problem`.
pub fn encode_atoms(problem: &Problem, include_truth: bool) -> String {
    let vocab = &*problem.vocab;
    let mut out = String::new();
    let _ = writeln!(out, "@format {FORMAT_NAME} {FORMAT_VERSION}");
    for t in vocab.traits() {
        let _ = writeln!(out, "@trait {} {} {}", t.name, t.kind.keyword(), t.values.join(" "));
    }
    let _ = writeln!(out, "@candidates {}", problem.candidates.len());
    if include_truth {
        if let Some(p) = &problem.provenance {
            let _ = writeln!(out, "@provenance {} {} {} {}", p.seed, p.index, p.spec_hash, p.rejections);
            for r in &p.planted {
                let _ = writeln!(out, "@planted {}", r.display(vocab));
            }
        }
    }
    for (pos, cell) in problem.grid.cells().iter().enumerate() {
        let name = query_cell_name(pos);
        let _ = writeln!(out, "cell({name}).");
        write_cell_facts(&mut out, vocab, &name, cell);
    }
    for (k, cell) in problem.candidates.iter().enumerate() {
        let name = candidate_cell_name(k);
        let _ = writeln!(out, "candidate({k},{name}).");
        write_cell_facts(&mut out, vocab, &name, cell);
    }
    if include_truth {
        if let Some(t) = problem.truth {
            let _ = writeln!(out, "truth({t}).");
        }
    }
    out
}

/// ASP facts for the dynamic part of a problem. The output uses the same
/// predicates as the atoms format plus `at/3` grid positions, `trait/2`
/// and `value/3` vocabulary facts and `domain/2` sizes. It omits the truth.
pub fn export_asp(problem: &Problem) -> String {
    let vocab = &*problem.vocab;
    let mut out = String::new();
    let _ = writeln!(out, "% {FORMAT_NAME} {FORMAT_VERSION} dynamic facts");
    for t in vocab.traits() {
        let _ = writeln!(out, "trait({},{}).", t.name, t.kind.keyword());
        let _ = writeln!(out, "domain({},{}).", t.name, t.values.len());
        for (code, v) in t.values.iter().enumerate() {
            let _ = writeln!(out, "value({},{code},{v}).", t.name);
        }
    }
    for (pos, cell) in problem.grid.cells().iter().enumerate() {
        let name = query_cell_name(pos);
        let _ = writeln!(out, "cell({name}).");
        let _ = writeln!(out, "at({name},{},{}).", pos / 3 + 1, pos % 3 + 1);
        write_cell_facts(&mut out, vocab, &name, cell);
    }
    for (k, cell) in problem.candidates.iter().enumerate() {
        let name = candidate_cell_name(k);
        let _ = writeln!(out, "candidate({k},{name}).");
        write_cell_facts(&mut out, vocab, &name, cell);
    }
    out
}

/// A parsed term: identifier, integer or compound.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Term {
    Ident(String),
    Int(u32),
    Compound(String, Vec<Term>),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Ident(s) => f.write_str(s),
            Term::Int(i) => write!(f, "{i}"),
            Term::Compound(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

struct TermParser<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> TermParser<'a> {
    fn col(&self) -> usize {
        self.pos + 1
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, AtomsError> {
        err(self.line, self.col(), AtomsErrorKind::Syntax(msg.into()))
    }

    fn expect(&mut self, c: u8) -> Result<(), AtomsError> {
        self.skip_ws();
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            self.fail(format!("expected `{}`", c as char))
        }
    }

    fn term(&mut self) -> Result<Term, AtomsError> {
        self.skip_ws();
        let start = self.pos;
        match self.src.get(self.pos) {
            Some(c) if c.is_ascii_digit() => {
                while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                match s.parse() {
                    Ok(n) => Ok(Term::Int(n)),
                    Err(_) => {
                        self.pos = start;
                        self.fail(format!("integer `{s}` out of range"))
                    }
                }
            }
            Some(c) if c.is_ascii_lowercase() => {
                while self
                    .src
                    .get(self.pos)
                    .is_some_and(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || *c == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii").to_string();
                self.skip_ws();
                if self.src.get(self.pos) == Some(&b'(') {
                    self.pos += 1;
                    let mut args = vec![self.term()?];
                    loop {
                        self.skip_ws();
                        match self.src.get(self.pos) {
                            Some(b',') => {
                                self.pos += 1;
                                args.push(self.term()?);
                            }
                            Some(b')') => {
                                self.pos += 1;
                                break;
                            }
                            _ => return self.fail("expected `,` or `)`"),
                        }
                    }
                    Ok(Term::Compound(name, args))
                } else {
                    Ok(Term::Ident(name))
                }
            }
            _ => self.fail("expected a term"),
        }
    }

    /// `name(args).` at the whole line.
    fn fact(mut self) -> Result<(String, Vec<Term>), AtomsError> {
        let t = self.term()?;
        self.expect(b'.')?;
        self.skip_ws();
        if self.pos != self.src.len() {
            return self.fail("trailing input after `.`");
        }
        match t {
            Term::Compound(name, args) => Ok((name, args)),
            Term::Ident(name) => Ok((name, vec![])),
            Term::Int(_) => err(self.line, 1, AtomsErrorKind::Syntax("a fact cannot be a number".into())),
        }
    }
}

struct Fact {
    line: usize,
    name: String,
    args: Vec<Term>,
}

impl Fact {
    fn at<T>(&self, kind: AtomsErrorKind) -> Result<T, AtomsError> {
        Err(self.error(kind))
    }

    fn error(&self, kind: AtomsErrorKind) -> AtomsError {
        AtomsError { line: self.line, column: 1, kind }
    }

    fn ident(&self, i: usize) -> Result<&str, AtomsError> {
        match &self.args[i] {
            Term::Ident(s) => Ok(s),
            t => self.at(AtomsErrorKind::Syntax(format!("argument {} of `{}` must be a name, got `{t}`", i + 1, self.name))),
        }
    }

    fn int(&self, i: usize) -> Result<u32, AtomsError> {
        match &self.args[i] {
            Term::Int(n) => Ok(*n),
            t => self.at(AtomsErrorKind::Syntax(format!("argument {} of `{}` must be an integer, got `{t}`", i + 1, self.name))),
        }
    }
}

#[derive(Default)]
struct Header {
    format_seen: bool,
    traits: Vec<TraitDef>,
    candidates: Option<(usize, usize)>,
    provenance: Option<(usize, u64, u64, String, u32)>,
    planted: Vec<(usize, Vec<String>)>,
}

fn parse_directive(line_no: usize, line: &str, h: &mut Header) -> Result<(), AtomsError> {
    let mut toks = line.split_whitespace();
    let head = toks.next().unwrap_or("@");
    let rest: Vec<&str> = toks.collect();
    let bad = |m: String| header_error(line_no, m);
    match head {
        "@format" => {
            if h.format_seen {
                return Err(bad("duplicate @format".into()));
            }
            if rest.len() != 2 || rest[0] != FORMAT_NAME {
                return Err(bad(format!("expected `@format {FORMAT_NAME} {FORMAT_VERSION}`")));
            }
            if rest[1] != FORMAT_VERSION.to_string() {
                return Err(bad(format!("unsupported version `{}`", rest[1])));
            }
            h.format_seen = true;
        }
        "@trait" => {
            if rest.len() < 2 {
                return Err(bad("`@trait` needs a name, a kind and values".into()));
            }
            let kind = TraitKind::from_keyword(rest[1])
                .ok_or_else(|| bad(format!("unknown trait kind `{}`", rest[1])))?;
            h.traits.push(TraitDef {
                name: rest[0].to_string(),
                kind,
                values: rest[2..].iter().map(|s| s.to_string()).collect(),
            });
        }
        "@candidates" => {
            let n: usize = match rest.as_slice() {
                [n] => n.parse().map_err(|_| bad(format!("bad candidate count `{n}`")))?,
                _ => return Err(bad("`@candidates` takes one count".into())),
            };
            if n == 0 {
                return Err(bad("a problem needs at least one candidate".into()));
            }
            h.candidates = Some((line_no, n));
        }
        "@provenance" => {
            let [seed, index, hash, rej] = rest.as_slice() else {
                return Err(bad("`@provenance` takes seed, index, spec hash and rejections".into()));
            };
            let seed = seed.parse().map_err(|_| bad(format!("bad seed `{seed}`")))?;
            let index = index.parse().map_err(|_| bad(format!("bad index `{index}`")))?;
            let rej = rej.parse().map_err(|_| bad(format!("bad rejection count `{rej}`")))?;
            if !hash.chars().all(|c| c.is_ascii_hexdigit()) {
                return Err(bad(format!("bad spec hash `{hash}`")));
            }
            h.provenance = Some((line_no, seed, index, hash.to_string(), rej));
        }
        "@planted" => {
            if rest.len() != 4 {
                return Err(bad("`@planted` takes category, trait, operator and scope".into()));
            }
            h.planted.push((line_no, rest.iter().map(|s| s.to_string()).collect()));
        }
        other => return Err(bad(format!("unknown directive `{other}`"))),
    }
    Ok(())
}

fn parse_category(t: &Term, vocab: &Vocabulary) -> Option<Category> {
    Category::parse(&t.to_string(), vocab)
}

struct ObjectEntry {
    line: usize,
    name: String,
    cell: usize,
    identity: Identity,
    values: Vec<Option<u8>>,
}

/// Parses and validates an atoms document.
pub fn decode_atoms(text: &str) -> Result<Problem, AtomsError> {
    let mut header = Header::default();
    let mut facts = Vec::new();
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        last_line = line_no;
        let line = raw.trim_end();
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        if trimmed.starts_with('@') {
            parse_directive(line_no, trimmed, &mut header)?;
            continue;
        }
        let parser = TermParser { src: line.as_bytes(), pos: 0, line: line_no };
        let (name, args) = parser.fact()?;
        facts.push(Fact { line: line_no, name, args });
    }
    let eof = last_line + 1;
    if !header.format_seen {
        return err(1, 1, AtomsErrorKind::Header(format!("missing `@format {FORMAT_NAME} {FORMAT_VERSION}`")));
    }
    let vocab = Arc::new(Vocabulary::new(header.traits).map_err(|e| AtomsError {
        line: 1,
        column: 1,
        kind: e.into(),
    })?);
    let Some((cand_line, n_candidates)) = header.candidates else {
        return err(eof, 1, AtomsErrorKind::Header("missing `@candidates`".into()));
    };

    for f in &facts {
        let want = match f.name.as_str() {
            "cell" | "truth" => 1,
            "candidate" | "belongs" => 2,
            "argument" => 3,
            "object" => 4,
            _ => usize::MAX,
        };
        if want != f.args.len() {
            return f.at(AtomsErrorKind::UnknownPredicate { name: f.name.clone(), arity: f.args.len() });
        }
    }

    // Cells: q1..q8 then a0..a(n-1).
    let total_cells = GIVEN_CELLS + n_candidates;
    let cell_index = |name: &str| -> Option<usize> {
        if let Some(rest) = name.strip_prefix('q') {
            let p: usize = rest.parse().ok()?;
            (1..=GIVEN_CELLS).contains(&p).then(|| p - 1).filter(|_| query_cell_name(p - 1) == name)
        } else if let Some(rest) = name.strip_prefix('a') {
            let k: usize = rest.parse().ok()?;
            (k < n_candidates && candidate_cell_name(k) == name).then_some(GIVEN_CELLS + k)
        } else {
            None
        }
    };
    let mut declared = vec![false; total_cells];
    for f in facts.iter().filter(|f| f.name == "cell" || f.name == "candidate") {
        let (name, idx) = if f.name == "cell" {
            let name = f.ident(0)?;
            let idx = cell_index(name).filter(|&i| i < GIVEN_CELLS);
            (name, idx)
        } else {
            let k = f.int(0)? as usize;
            let name = f.ident(1)?;
            let idx = cell_index(name).filter(|&i| i == GIVEN_CELLS + k);
            (name, idx)
        };
        let Some(idx) = idx else {
            return f.at(AtomsErrorKind::UnknownCell(name.to_string()));
        };
        if std::mem::replace(&mut declared[idx], true) {
            return f.at(AtomsErrorKind::DuplicateCell(name.to_string()));
        }
    }
    if let Some(missing) = declared.iter().position(|d| !d) {
        let name = if missing < GIVEN_CELLS {
            query_cell_name(missing)
        } else {
            candidate_cell_name(missing - GIVEN_CELLS)
        };
        return err(eof, 1, AtomsErrorKind::MissingCell(name));
    }

    let mut objects: Vec<ObjectEntry> = Vec::new();
    let mut by_name: HashMap<String, usize> = HashMap::new();
    for f in facts.iter().filter(|f| f.name == "object") {
        let name = f.ident(0)?.to_string();
        let cell_name = f.ident(1)?;
        let cell = cell_index(cell_name).ok_or_else(|| f.error(AtomsErrorKind::UnknownCell(cell_name.into())))?;
        let layer = f.int(2)?;
        let slot = f.int(3)?;
        if layer >= LAYERS as u32 {
            return f.at(AtomsErrorKind::BadLayer(layer));
        }
        if slot >= SLOTS as u32 {
            return f.at(AtomsErrorKind::BadSlot(slot));
        }
        if by_name.contains_key(&name) {
            return f.at(AtomsErrorKind::DuplicateObject(name));
        }
        let identity = Identity { layer: layer as u8, slot: slot as u8 };
        if objects.iter().any(|o| o.cell == cell && o.identity == identity) {
            return f.at(AtomsErrorKind::DuplicateIdentity {
                cell: cell_name.to_string(),
                layer: identity.layer,
                slot: identity.slot,
            });
        }
        let count = objects.iter().filter(|o| o.cell == cell).count() + 1;
        if count > MAX_OBJECTS {
            return f.at(AtomsErrorKind::TooManyObjects { cell: cell_name.to_string(), count });
        }
        by_name.insert(name.clone(), objects.len());
        objects.push(ObjectEntry { line: f.line, name, cell, identity, values: vec![None; vocab.len()] });
    }

    for f in facts.iter().filter(|f| f.name == "argument") {
        let oname = f.ident(0)?;
        let tname = f.ident(1)?;
        let vname = f.ident(2)?;
        let &oi = by_name.get(oname).ok_or_else(|| f.error(AtomsErrorKind::UnknownObject(oname.into())))?;
        let t = vocab.lookup(tname).ok_or_else(|| f.error(AtomsErrorKind::UnknownTrait(tname.into())))?;
        let code = vocab.code_of(t, vname).ok_or_else(|| {
            f.error(AtomsErrorKind::UnknownValue { trait_name: tname.into(), value: vname.into() })
        })?;
        let slot = &mut objects[oi].values[t.index()];
        if slot.is_some() {
            return f.at(AtomsErrorKind::DuplicateArgument { object: oname.into(), trait_name: tname.into() });
        }
        *slot = Some(code);
    }
    for o in &objects {
        if let Some(missing) = o.values.iter().position(Option::is_none) {
            return err(o.line, 1, AtomsErrorKind::MissingArgument {
                object: o.name.clone(),
                trait_name: vocab.trait_name(TraitId(missing as u8)).to_string(),
            });
        }
    }
    let specs: Vec<ObjectSpec> = objects
        .iter()
        .map(|o| ObjectSpec {
            identity: o.identity,
            values: o.values.iter().map(|v| v.expect("checked")).collect(),
        })
        .collect();

    for f in facts.iter().filter(|f| f.name == "belongs") {
        let oname = f.ident(0)?;
        let &oi = by_name.get(oname).ok_or_else(|| f.error(AtomsErrorKind::UnknownObject(oname.into())))?;
        let cat = parse_category(&f.args[1], &vocab)
            .ok_or_else(|| f.error(AtomsErrorKind::BadCategory(f.args[1].to_string())))?;
        if !cat.selects(&specs[oi]) {
            return f.at(AtomsErrorKind::MembershipMismatch {
                object: oname.into(),
                category: f.args[1].to_string(),
            });
        }
    }

    let mut truth = None;
    for f in facts.iter().filter(|f| f.name == "truth") {
        let t = f.int(0)? as usize;
        if truth.is_some() {
            return f.at(AtomsErrorKind::DuplicateTruth);
        }
        if t >= n_candidates {
            return f.at(AtomsErrorKind::TruthOutOfRange { truth: t, count: n_candidates });
        }
        truth = Some(t);
    }

    let mut cells: Vec<Vec<ObjectSpec>> = vec![Vec::new(); total_cells];
    for (o, spec) in objects.iter().zip(specs) {
        cells[o.cell].push(spec);
    }
    let mut cells: Vec<Cell> = cells
        .into_iter()
        .map(|objs| Cell::new(objs).expect("identities and bounds checked"))
        .collect();
    let candidates = cells.split_off(GIVEN_CELLS);
    let grid = Grid::new(cells).expect("eight query cells");

    let provenance = match header.provenance {
        Some((_, seed, index, spec_hash, rejections)) => {
            let mut planted = Vec::new();
            for (line, toks) in &header.planted {
                planted.push(parse_planted(*line, toks, &vocab)?);
            }
            Some(Provenance { seed, index, spec_hash, rejections, planted })
        }
        None => {
            if let Some((line, _)) = header.planted.first() {
                return err(*line, 1, AtomsErrorKind::Header("`@planted` without `@provenance`".into()));
            }
            None
        }
    };
    let problem = Problem { vocab, grid, candidates, truth, provenance };
    problem.validate().map_err(|e| AtomsError {
        line: cand_line,
        column: 1,
        kind: AtomsErrorKind::Header(e.to_string()),
    })?;
    Ok(problem)
}

fn parse_planted(line: usize, toks: &[String], vocab: &Vocabulary) -> Result<Rule, AtomsError> {
    let bad = |m: String| header_error(line, m);
    let category = Category::parse(&toks[0], vocab).ok_or_else(|| bad(format!("bad category `{}`", toks[0])))?;
    let trait_id = if toks[1] == "presence" {
        TraitId::PRESENCE
    } else {
        vocab.lookup(&toks[1]).ok_or_else(|| AtomsError { line, column: 1, kind: AtomsErrorKind::UnknownTrait(toks[1].clone()) })?
    };
    let operator = Operator::parse(&toks[2]).ok_or_else(|| bad(format!("bad operator `{}`", toks[2])))?;
    let scope = Scope::parse(&toks[3]).ok_or_else(|| bad(format!("bad scope `{}`", toks[3])))?;
    Ok(Rule { category, trait_id, operator, scope })
}

/// Facts grouped by predicate name, for quick inspection in tools.
pub fn fact_counts(text: &str) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') || line.starts_with('@') {
            continue;
        }
        if let Some((name, _)) = line.split_once('(') {
            if is_identifier(name) {
                *out.entry(name.to_string()).or_insert(0) += 1;
            }
        }
    }
    out
}
