//! File contract with an external image observer.
//!
//! The observer reads the training manifest written by
//! [`crate::corpus::write_training_manifest`] and writes one prediction row
//! per image as JSON lines, with the same head layout as the labels:
//!
//! ```text
//! {"problem":0,"cell":"q1","heads":[{"presence":0.97,"layer":0,"slot":1,"traits":{"shape":0,...}},...]}
//! ```
//!
//! [`emit_observations`] turns those rows into truth-free atoms files,
//! `observations/pNNNNNN.atoms`, which the evaluator pairs with the corpus
//! truth.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atoms::{candidate_cell_name, encode_atoms, query_cell_name};
use crate::corpus::{io_at, problem_file_name, read_problem, CorpusError, LabelRow};
use crate::model::{Cell, Grid, Identity, ObjectSpec, Problem, GIVEN_CELLS, LAYERS, SLOTS};
use crate::vocab::Vocabulary;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadPrediction {
    pub presence: f64,
    pub layer: u8,
    pub slot: u8,
    /// Trait name to argmax value code.
    pub traits: BTreeMap<String, u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub problem: usize,
    pub cell: String,
    pub heads: Vec<HeadPrediction>,
}

impl From<&LabelRow> for PredictionRow {
    /// Perfect predictions for a labelled image.
    fn from(row: &LabelRow) -> Self {
        let heads = row
            .heads
            .iter()
            .map(|h| HeadPrediction {
                presence: h.presence as f64,
                layer: h.layer.max(0) as u8,
                slot: h.slot.max(0) as u8,
                traits: h.traits.iter().map(|(k, &v)| (k.clone(), v.max(0) as u8)).collect(),
            })
            .collect();
        PredictionRow { problem: row.problem, cell: row.cell.clone(), heads }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ObserveError {
    #[error("problem {problem}: no prediction for cell `{cell}`")]
    MissingCell { problem: usize, cell: String },
    #[error("problem {problem}: unexpected cell `{cell}`")]
    UnknownCell { problem: usize, cell: String },
    #[error("problem {problem}: two predictions for cell `{cell}`")]
    DuplicateCell { problem: usize, cell: String },
    #[error("problem {problem} cell `{cell}`: {message}")]
    BadHead { problem: usize, cell: String, message: String },
}

/// Objects of the heads at or above `threshold`. When two heads claim the
/// same identity the earlier head wins.
fn cell_from_heads(
    vocab: &Vocabulary,
    problem: usize,
    row: &PredictionRow,
    threshold: f64,
) -> Result<Cell, ObserveError> {
    let bad = |message: String| ObserveError::BadHead { problem, cell: row.cell.clone(), message };
    let mut objects: Vec<ObjectSpec> = Vec::new();
    for h in row.heads.iter().filter(|h| h.presence >= threshold) {
        if h.layer >= LAYERS || h.slot >= SLOTS {
            return Err(bad(format!("identity layer {} slot {} out of range", h.layer, h.slot)));
        }
        let mut values = Vec::with_capacity(vocab.len());
        for t in vocab.ids() {
            let name = vocab.trait_name(t);
            let v = *h.traits.get(name).ok_or_else(|| bad(format!("no `{name}` prediction")))?;
            if v as usize >= vocab.domain_size(t) {
                return Err(bad(format!("`{name}` code {v} out of range")));
            }
            values.push(v);
        }
        let identity = Identity { layer: h.layer, slot: h.slot };
        if objects.iter().all(|o| o.identity != identity) {
            objects.push(ObjectSpec { identity, values });
        }
    }
    Cell::new(objects).map_err(|e| bad(e.to_string()))
}

/// Assembles one problem's observed grid and candidates, without truth.
pub fn observed_problem(
    vocab: Arc<Vocabulary>,
    problem: usize,
    rows: &[PredictionRow],
    threshold: f64,
) -> Result<Problem, ObserveError> {
    let mut by_cell: HashMap<&str, &PredictionRow> = HashMap::new();
    for r in rows {
        if by_cell.insert(r.cell.as_str(), r).is_some() {
            return Err(ObserveError::DuplicateCell { problem, cell: r.cell.clone() });
        }
    }
    let n_candidates = rows.iter().filter(|r| r.cell.starts_with('a')).count();
    let names: Vec<String> = (0..GIVEN_CELLS)
        .map(query_cell_name)
        .chain((0..n_candidates).map(candidate_cell_name))
        .collect();
    if let Some(r) = rows.iter().find(|r| !names.contains(&r.cell)) {
        return Err(ObserveError::UnknownCell { problem, cell: r.cell.clone() });
    }
    let mut cells = Vec::with_capacity(names.len());
    for name in &names {
        let row = by_cell
            .get(name.as_str())
            .ok_or_else(|| ObserveError::MissingCell { problem, cell: name.clone() })?;
        cells.push(cell_from_heads(&vocab, problem, row, threshold)?);
    }
    let candidates = cells.split_off(GIVEN_CELLS);
    let grid = Grid::new(cells).expect("eight query cells");
    Problem::new(vocab, grid, candidates, None).map_err(|e| ObserveError::BadHead {
        problem,
        cell: "*".into(),
        message: e.to_string(),
    })
}

/// Truth-free atoms for one problem's predictions.
pub fn emit_atoms(vocab: Arc<Vocabulary>, problem: usize, rows: &[PredictionRow], threshold: f64) -> Result<String, ObserveError> {
    Ok(encode_atoms(&observed_problem(vocab, problem, rows, threshold)?, false))
}

/// Groups prediction rows by problem and writes one atoms file each.
/// Returns the problem indices written.
pub fn emit_observations(
    vocab: Arc<Vocabulary>,
    rows: &[PredictionRow],
    threshold: f64,
    out_dir: &Path,
) -> Result<Vec<usize>, EmitError> {
    fs::create_dir_all(out_dir).map_err(|e| EmitError::Corpus(io_at(out_dir)(e)))?;
    let mut groups: BTreeMap<usize, Vec<PredictionRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.problem).or_default().push(r.clone());
    }
    for (&i, rows) in &groups {
        let text = emit_atoms(vocab.clone(), i, rows, threshold)?;
        let path = out_dir.join(problem_file_name(i));
        fs::write(&path, text).map_err(|e| EmitError::Corpus(io_at(&path)(e)))?;
    }
    Ok(groups.into_keys().collect())
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error(transparent)]
    Observe(#[from] ObserveError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRow>, CorpusError> {
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

/// The observed problem for corpus position `index`, or `None` when the
/// observer produced no file for it.
pub fn read_observation(dir: &Path, index: usize) -> Result<Option<Problem>, CorpusError> {
    let path = dir.join(problem_file_name(index));
    if !path.exists() {
        return Ok(None);
    }
    read_problem(&path).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{read_labels, write_training_manifest};
    use crate::fixtures::{fixture, Fixture};
    use crate::par::Execution;
    use crate::render::StyleConfig;

    fn perfect(p: &Problem) -> Vec<PredictionRow> {
        let dir = tempfile::tempdir().unwrap();
        write_training_manifest(std::slice::from_ref(p), dir.path(), &StyleConfig::default(), Execution::Sequential)
            .unwrap();
        read_labels(&dir.path().join("labels.jsonl")).unwrap().iter().map(PredictionRow::from).collect()
    }

    #[test]
    fn perfect_predictions_are_lossless() {
        for f in Fixture::ALL {
            let p = fixture(f);
            let rows = perfect(&p);
            let text = emit_atoms(p.vocab.clone(), 0, &rows, DEFAULT_THRESHOLD).unwrap();
            assert_eq!(text, encode_atoms(&p, false), "{f}");
        }
    }

    #[test]
    fn threshold_drops_objects() {
        let p = fixture(Fixture::Union);
        let mut rows = perfect(&p);
        rows[0].heads[0].presence = 0.49;
        let observed = observed_problem(p.vocab.clone(), 0, &rows, DEFAULT_THRESHOLD).unwrap();
        assert!(observed.grid.cells()[0].is_empty());
        assert_eq!(observed.truth, None);
    }

    #[test]
    fn missing_and_bad_rows() {
        let p = fixture(Fixture::Union);
        let rows = perfect(&p);
        let without_q3: Vec<_> = rows.iter().filter(|r| r.cell != "q3").cloned().collect();
        assert_eq!(
            emit_atoms(p.vocab.clone(), 7, &without_q3, 0.5).unwrap_err(),
            ObserveError::MissingCell { problem: 7, cell: "q3".into() }
        );
        let mut bad = rows.clone();
        bad[1].heads[0].traits.insert("shape".into(), 99);
        assert!(matches!(emit_atoms(p.vocab.clone(), 0, &bad, 0.5), Err(ObserveError::BadHead { .. })));
    }

    #[test]
    fn observation_files() {
        let p = fixture(Fixture::SymDiff);
        let dir = tempfile::tempdir().unwrap();
        let written = emit_observations(p.vocab.clone(), &perfect(&p), 0.5, dir.path()).unwrap();
        assert_eq!(written, vec![0]);
        let back = read_observation(dir.path(), 0).unwrap().unwrap();
        assert_eq!(back.grid, p.grid);
        assert_eq!(back.truth, None);
        assert!(read_observation(dir.path(), 1).unwrap().is_none());
    }
}
