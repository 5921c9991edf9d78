//! Four hand-authored problems: a Latin square, a presence union, a
//! presence symmetric difference and a multi-rule problem with a gray
//! background category.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::model::{Cell, Grid, ObjectSpec, Problem};
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    LatinSquare,
    Union,
    SymDiff,
    MultiRule,
}

impl Fixture {
    pub const ALL: [Fixture; 4] = [Fixture::LatinSquare, Fixture::Union, Fixture::SymDiff, Fixture::MultiRule];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::LatinSquare => "latin_square",
            Fixture::Union => "union",
            Fixture::SymDiff => "symdiff",
            Fixture::MultiRule => "multi_rule",
        }
    }
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Fixture {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Fixture::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown fixture `{s}`"))
    }
}

/// `(layer, slot, [shape, color, fill, rotation, size])` by label.
type Obj = (u8, u8, [&'static str; 5]);

fn build(vocab: &Vocabulary, objects: &[Obj]) -> Cell {
    let specs = objects
        .iter()
        .map(|&(layer, slot, labels)| {
            let values = vocab
                .ids()
                .zip(labels)
                .map(|(t, l)| vocab.code_of(t, l).unwrap_or_else(|| panic!("fixture label {l}")))
                .collect();
            ObjectSpec::new(layer, slot, values)
        })
        .collect();
    Cell::new(specs).expect("fixture cell")
}

fn assemble(cells: Vec<Vec<Obj>>, candidates: Vec<Vec<Obj>>, truth: usize) -> Problem {
    let vocab = Arc::new(Vocabulary::standard());
    let cells = cells.iter().map(|c| build(&vocab, c)).collect();
    let candidates = candidates.iter().map(|c| build(&vocab, c)).collect();
    Problem::new(vocab.clone(), Grid::new(cells).expect("eight cells"), candidates, Some(truth))
        .expect("fixture problem")
}

pub fn fixture(which: Fixture) -> Problem {
    match which {
        Fixture::LatinSquare => latin_square(),
        Fixture::Union => union(),
        Fixture::SymDiff => symdiff(),
        Fixture::MultiRule => multi_rule(),
    }
}

/// Shape follows `(row + col) mod 3`; rotation and the color/fill pair
/// follow `(2 row + col) mod 3`, so rows and columns are both Latin.
fn latin_square() -> Problem {
    const SHAPES: [&str; 3] = ["circle", "square", "triangle"];
    const STYLE: [(&str, &str, &str); 3] =
        [("black", "solid", "r0"), ("gray", "hatched", "r90"), ("blue", "hollow", "r180")];
    let at = |r: usize, c: usize| -> Vec<Obj> {
        let (color, fill, rot) = STYLE[(2 * r + c) % 3];
        vec![(0, 0, [SHAPES[(r + c) % 3], color, fill, rot, "large"])]
    };
    let cells = (0..8).map(|p| at(p / 3, p % 3)).collect();
    let o = |shape, color, fill, rot| -> Obj { (0, 0, [shape, color, fill, rot, "large"]) };
    let candidates = vec![
        vec![o("square", "gray", "hatched", "r90")],
        vec![o("circle", "black", "solid", "r0")],
        vec![o("triangle", "black", "solid", "r0")],
        at(2, 2),
        vec![o("square", "gray", "solid", "r0")],
        vec![o("square", "black", "hollow", "r0")],
        vec![o("square", "black", "solid", "r180")],
        vec![o("square", "black", "solid", "r0"), (0, 3, ["circle", "black", "solid", "r0", "small"])],
    ];
    assemble(cells, candidates, 3)
}

const KEY_SLOTS: [(&str, u8); 4] = [("circle", 1), ("square", 2), ("triangle", 3), ("star", 4)];

fn key(shape: &'static str) -> Obj {
    let slot = KEY_SLOTS.iter().find(|(s, _)| *s == shape).expect("pool shape").1;
    (0, slot, [shape, "black", "solid", "r0", "medium"])
}

fn keys(shapes: &[&'static str]) -> Vec<Obj> {
    shapes.iter().map(|&s| key(s)).collect()
}

fn with(mut objs: Vec<Obj>, shape: &str, f: impl FnOnce(&mut [&'static str; 5])) -> Vec<Obj> {
    let o = objs.iter_mut().find(|o| o.2[0] == shape).expect("object present");
    f(&mut o.2);
    objs
}

/// The third cell of each row holds exactly the objects of the first two.
fn union() -> Problem {
    let cells = vec![
        keys(&["circle"]),
        keys(&["square"]),
        keys(&["circle", "square"]),
        keys(&["triangle", "circle"]),
        keys(&["circle", "star"]),
        keys(&["triangle", "circle", "star"]),
        keys(&["square", "triangle"]),
        keys(&["triangle", "star"]),
    ];
    let truth = keys(&["square", "triangle", "star"]);
    let candidates = vec![
        keys(&["square", "star"]),
        keys(&["square", "triangle"]),
        truth.clone(),
        keys(&["triangle", "star"]),
        keys(&["circle", "square", "triangle", "star"]),
        with(truth.clone(), "star", |o| o[1] = "red"),
        keys(&["circle", "square", "triangle"]),
        with(truth, "triangle", |o| o[2] = "hollow"),
    ];
    assemble(cells, candidates, 2)
}

/// An object survives into the third cell iff exactly one of the first
/// two cells holds it.
fn symdiff() -> Problem {
    let cells = vec![
        keys(&["circle", "square"]),
        keys(&["square", "triangle"]),
        keys(&["circle", "triangle"]),
        keys(&["triangle", "star"]),
        keys(&["circle", "star"]),
        keys(&["triangle", "circle"]),
        keys(&["circle", "square", "star"]),
        keys(&["square", "triangle"]),
    ];
    let truth = keys(&["circle", "triangle", "star"]);
    let candidates = vec![
        keys(&["circle", "square", "triangle", "star"]),
        keys(&["square"]),
        keys(&["circle", "triangle"]),
        keys(&["circle", "star"]),
        keys(&["triangle", "star"]),
        truth.clone(),
        with(truth.clone(), "circle", |o| o[1] = "red"),
        with(truth, "star", |o| o[3] = "r45"),
    ];
    assemble(cells, candidates, 5)
}

/// A gray background object per cell keeps its color and fill while its
/// shape and rotation form a Latin square; small black foreground objects
/// follow a presence union.
fn multi_rule() -> Problem {
    const GRAY_SHAPES: [&str; 3] = ["circle", "square", "triangle"];
    const GRAY_ROT: [&str; 3] = ["r45", "r90", "r135"];
    let gray = |r: usize, c: usize| -> Obj {
        (1, 0, [GRAY_SHAPES[(r + c) % 3], "gray", "hatched", GRAY_ROT[(2 * r + c) % 3], "large"])
    };
    let fg = |shape: &'static str| -> Obj {
        let slot = match shape {
            "diamond" => 1,
            "star" => 2,
            _ => 3,
        };
        (0, slot, [shape, "black", "solid", "r0", "small"])
    };
    let black: [&[&'static str]; 9] = [
        &["diamond"],
        &["star"],
        &["diamond", "star"],
        &["star", "cross"],
        &["diamond", "cross"],
        &["diamond", "star", "cross"],
        &["cross"],
        &["diamond", "cross"],
        &["diamond", "cross"],
    ];
    let at = |p: usize| -> Vec<Obj> {
        let mut objs = vec![gray(p / 3, p % 3)];
        objs.extend(black[p].iter().map(|&s| fg(s)));
        objs
    };
    let cells = (0..8).map(at).collect();
    let truth = at(8);
    let g = |shape, color, fill, rot| -> Obj { (1, 0, [shape, color, fill, rot, "large"]) };
    let fgs = |shapes: &[&'static str]| -> Vec<Obj> { shapes.iter().map(|&s| fg(s)).collect() };
    let mut candidates = vec![
        [vec![g("circle", "gray", "hatched", "r45")], fgs(&["diamond", "cross"])].concat(),
        [vec![g("square", "gray", "hatched", "r90")], fgs(&["diamond", "cross"])].concat(),
        [vec![g("square", "black", "hatched", "r45")], fgs(&["diamond", "cross"])].concat(),
        [vec![g("square", "gray", "hatched", "r45")], fgs(&["cross"])].concat(),
        [vec![g("square", "gray", "hatched", "r45")], fgs(&["diamond", "star", "cross"])].concat(),
        [vec![g("square", "gray", "solid", "r45")], fgs(&["diamond", "cross"])].concat(),
        with(truth.clone(), "cross", |o| o[1] = "gray"),
    ];
    candidates.insert(6, truth);
    assemble(cells, candidates, 6)
}
