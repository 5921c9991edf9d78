//! On-disk corpora and the image training manifest.
//!
//! A corpus directory holds `manifest.json` and one truth-bearing atoms file
//! per problem under `problems/`. The training manifest directory holds
//! `schema.json`, `labels.jsonl` and one PNG per cell:
//!
//! ```text
//! corpus/manifest.json
//! corpus/problems/p000000.atoms
//! train/schema.json
//! train/labels.jsonl
//! train/images/p000000/q1.png ... q8.png, a0.png ... a7.png
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atoms::{candidate_cell_name, decode_atoms, encode_atoms, query_cell_name, AtomsError};
use crate::generator::GeneratorSpec;
use crate::model::{Cell, Problem, MAX_OBJECTS};
use crate::par::{self, Execution};
use crate::render::{image_key, render_cell_keyed, StyleConfig};
use crate::vocab::{TraitKind, Vocabulary};

pub const CORPUS_FORMAT: &str = "relmat-corpus";
pub const TRAINING_FORMAT: &str = "relmat-training";
/// Label value for a head whose object is absent.
pub const IGNORE: i16 = -1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Atoms {
        path: PathBuf,
        #[source]
        source: AtomsError,
    },
    #[error("{path}: {message}")]
    Manifest { path: PathBuf, message: String },
}

impl CorpusError {
    pub fn path(&self) -> &Path {
        match self {
            CorpusError::Io { path, .. } | CorpusError::Atoms { path, .. } | CorpusError::Manifest { path, .. } => path,
        }
    }
}

pub(crate) fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.to_path_buf(), source }
}

pub fn problem_file_name(index: usize) -> String {
    format!("p{index:06}.atoms")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub format: String,
    pub version: u32,
    pub count: usize,
    pub candidate_count: usize,
    /// Generator settings, absent for hand-assembled corpora.
    pub spec: Option<GeneratorSpec>,
    pub spec_hash: Option<String>,
    pub files: Vec<String>,
}

/// Writes `problems` with their truth under `dir`.
pub fn write_corpus(dir: &Path, problems: &[Problem], spec: Option<&GeneratorSpec>) -> Result<CorpusManifest, CorpusError> {
    let pdir = dir.join("problems");
    fs::create_dir_all(&pdir).map_err(io_at(&pdir))?;
    let mut files = Vec::with_capacity(problems.len());
    for (i, p) in problems.iter().enumerate() {
        let name = problem_file_name(i);
        let path = pdir.join(&name);
        fs::write(&path, encode_atoms(p, true)).map_err(io_at(&path))?;
        files.push(format!("problems/{name}"));
    }
    let manifest = CorpusManifest {
        format: CORPUS_FORMAT.into(),
        version: 1,
        count: problems.len(),
        candidate_count: problems.first().map_or(0, |p| p.candidates.len()),
        spec: spec.cloned(),
        spec_hash: spec.map(GeneratorSpec::hash),
        files,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, json + "\n").map_err(io_at(&path))?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<CorpusManifest, CorpusError> {
    let path = dir.join("manifest.json");
    let text = fs::read_to_string(&path).map_err(io_at(&path))?;
    let m: CorpusManifest =
        serde_json::from_str(&text).map_err(|e| CorpusError::Manifest { path: path.clone(), message: e.to_string() })?;
    if m.format != CORPUS_FORMAT || m.version != 1 {
        return Err(CorpusError::Manifest { path, message: format!("unsupported format {} {}", m.format, m.version) });
    }
    if m.files.len() != m.count {
        return Err(CorpusError::Manifest { path, message: format!("{} files listed, count is {}", m.files.len(), m.count) });
    }
    Ok(m)
}

pub fn read_problem(path: &Path) -> Result<Problem, CorpusError> {
    let text = fs::read_to_string(path).map_err(io_at(path))?;
    decode_atoms(&text).map_err(|source| CorpusError::Atoms { path: path.to_path_buf(), source })
}

/// Reads every problem listed in the corpus manifest, in order.
pub fn read_corpus(dir: &Path, exec: Execution) -> Result<Vec<Problem>, CorpusError> {
    let m = read_manifest(dir)?;
    par::map(exec, &m.files, |f| read_problem(&dir.join(f))).into_iter().collect()
}

/// One label head: an object's identity and trait codes, or an empty head.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadLabel {
    pub presence: u8,
    pub layer: i16,
    pub slot: i16,
    /// Trait name to value code, [`IGNORE`] when the head is empty.
    pub traits: BTreeMap<String, i16>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRow {
    pub image: String,
    pub problem: usize,
    pub cell: String,
    pub heads: Vec<HeadLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaTrait {
    pub name: String,
    pub kind: TraitKind,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingSchema {
    pub format: String,
    pub version: u32,
    pub heads: usize,
    pub ignore: i16,
    pub image_width: u32,
    pub image_height: u32,
    pub traits: Vec<SchemaTrait>,
    pub rows: usize,
}

impl TrainingSchema {
    pub fn vocabulary(&self) -> Result<Vocabulary, crate::vocab::VocabError> {
        Vocabulary::new(
            self.traits
                .iter()
                .map(|t| crate::vocab::TraitDef { name: t.name.clone(), kind: t.kind, values: t.values.clone() })
                .collect(),
        )
    }
}

/// Heads in z-order: head `i` describes the cell's `i`-th object.
pub fn cell_labels(cell: &Cell, vocab: &Vocabulary) -> Vec<HeadLabel> {
    (0..MAX_OBJECTS)
        .map(|i| match cell.objects().get(i) {
            Some(o) => HeadLabel {
                presence: 1,
                layer: o.identity.layer as i16,
                slot: o.identity.slot as i16,
                traits: vocab.ids().map(|t| (vocab.trait_name(t).to_string(), o.value(t) as i16)).collect(),
            },
            None => HeadLabel {
                presence: 0,
                layer: IGNORE,
                slot: IGNORE,
                traits: vocab.ids().map(|t| (vocab.trait_name(t).to_string(), IGNORE)).collect(),
            },
        })
        .collect()
}

/// Cell names of a problem in file order: `q1..q8`, then `a0..`.
pub fn cell_names(problem: &Problem) -> Vec<String> {
    (0..problem.grid.cells().len())
        .map(query_cell_name)
        .chain((0..problem.candidates.len()).map(candidate_cell_name))
        .collect()
}

fn all_cells(problem: &Problem) -> impl Iterator<Item = &Cell> {
    problem.grid.cells().iter().chain(&problem.candidates)
}

/// Renders every cell of every problem and writes the label manifest.
pub fn write_training_manifest(
    problems: &[Problem],
    out_dir: &Path,
    style: &StyleConfig,
    exec: Execution,
) -> Result<TrainingSchema, CorpusError> {
    let Some(first) = problems.first() else {
        return Err(CorpusError::Manifest { path: out_dir.to_path_buf(), message: "empty corpus".into() });
    };
    let vocab = first.vocab.clone();
    if let Some(i) = problems.iter().position(|p| *p.vocab != *vocab) {
        return Err(CorpusError::Manifest {
            path: out_dir.to_path_buf(),
            message: format!("problem {i} uses a different vocabulary"),
        });
    }
    let indexed: Vec<(usize, &Problem)> = problems.iter().enumerate().collect();
    let rows: Vec<Result<Vec<LabelRow>, CorpusError>> = par::map(exec, &indexed, |&(i, p)| {
        let dir = out_dir.join("images").join(format!("p{i:06}"));
        fs::create_dir_all(&dir).map_err(io_at(&dir))?;
        let mut rows = Vec::new();
        for (pos, (cell, name)) in all_cells(p).zip(cell_names(p)).enumerate() {
            let img = render_cell_keyed(cell, &p.vocab, style, image_key(i as u64, pos));
            let path = dir.join(format!("{name}.png"));
            img.write_png(&path).map_err(io_at(&path))?;
            rows.push(LabelRow {
                image: format!("images/p{i:06}/{name}.png"),
                problem: i,
                cell: name,
                heads: cell_labels(cell, &p.vocab),
            });
        }
        Ok(rows)
    });
    let mut text = String::new();
    let mut count = 0;
    for r in rows {
        for row in r? {
            text.push_str(&serde_json::to_string(&row).expect("row serializes"));
            text.push('\n');
            count += 1;
        }
    }
    let path = out_dir.join("labels.jsonl");
    fs::write(&path, text).map_err(io_at(&path))?;
    let schema = TrainingSchema {
        format: TRAINING_FORMAT.into(),
        version: 1,
        heads: MAX_OBJECTS,
        ignore: IGNORE,
        image_width: crate::render::CELL_PX,
        image_height: crate::render::CELL_PX,
        traits: vocab
            .traits()
            .iter()
            .map(|t| SchemaTrait { name: t.name.clone(), kind: t.kind, values: t.values.clone() })
            .collect(),
        rows: count,
    };
    let path = out_dir.join("schema.json");
    fs::write(&path, serde_json::to_string_pretty(&schema).expect("schema serializes") + "\n").map_err(io_at(&path))?;
    Ok(schema)
}

pub fn read_labels(path: &Path) -> Result<Vec<LabelRow>, CorpusError> {
    let text = fs::read_to_string(path).map_err(io_at(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| CorpusError::Manifest {
                path: path.to_path_buf(),
                message: format!("line {}: {e}", n + 1),
            })
        })
        .collect()
}
