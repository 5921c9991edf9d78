//! Accuracy, candidate-count scaling and ablation measurements.
//!
//! A problem counts as accurate only when the verdict is `Unique(truth)`.
//! Any other outcome is split into false-positive and false-negative
//! classes by [`classify`]. Reports carry counts only, so two runs over the
//! same corpus serialize to the same bytes; wall-clock time is kept beside
//! the report, never in it.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::{stream_rng, Generator, SCALING_STREAM};
use crate::model::Problem;
use crate::observe::read_observation;
use crate::par::{self, Execution};
use crate::reasoner::{classify, ErrorClass, Mode, Outcome, Solver, SolverConfig};
use crate::vocab::TraitId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pipeline {
    AtomsOnly,
    /// Observed problems are read from `pNNNNNN.atoms` files in this
    /// directory, matched to the corpus by position.
    ImageObserver(PathBuf),
}

impl Pipeline {
    pub fn tag(&self) -> &'static str {
        match self {
            Pipeline::AtomsOnly => "atoms-only",
            Pipeline::ImageObserver(_) => "image+observer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flagged {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub pipeline: String,
    pub mode: Mode,
    pub total: usize,
    pub accurate: usize,
    pub accuracy: f64,
    pub false_positive: usize,
    pub false_negative: usize,
    pub both: usize,
    /// Problems that could not be evaluated as given and were scored
    /// inaccurate.
    pub flagged: Vec<Flagged>,
}

impl AccuracyReport {
    fn from_classes(pipeline: &str, mode: Mode, classes: &[ErrorClass], flagged: Vec<Flagged>) -> Self {
        let count = |c: ErrorClass| classes.iter().filter(|&&x| x == c).count();
        let accurate = count(ErrorClass::Accurate);
        AccuracyReport {
            pipeline: pipeline.to_string(),
            mode,
            total: classes.len(),
            accurate,
            accuracy: if classes.is_empty() { 0.0 } else { accurate as f64 / classes.len() as f64 },
            false_positive: count(ErrorClass::FalsePositive),
            false_negative: count(ErrorClass::FalseNegative),
            both: count(ErrorClass::Both),
            flagged,
        }
    }

    pub fn incorrect(&self) -> usize {
        self.total - self.accurate
    }

    /// Problems whose class includes a false negative.
    pub fn false_negative_bearing(&self) -> usize {
        self.false_negative + self.both
    }

    /// Counts sum to the total and the ratio matches them.
    pub fn is_consistent(&self) -> bool {
        self.accurate + self.false_positive + self.false_negative + self.both == self.total
            && (self.total == 0 || (self.accuracy - self.accurate as f64 / self.total as f64).abs() < 1e-12)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// A text table with one column per report.
pub fn summary_table(reports: &[&AccuracyReport]) -> String {
    let mut out = String::new();
    let label_w = 26;
    let col_w = reports.iter().map(|r| r.pipeline.len()).max().unwrap_or(0).max(12);
    let _ = write!(out, "{:label_w$}", "");
    for r in reports {
        let _ = write!(out, " | {:>col_w$}", r.pipeline);
    }
    out.push('\n');
    let _ = writeln!(out, "{}", "-".repeat(label_w + reports.len() * (col_w + 3)));
    let mut row = |label: &str, f: &dyn Fn(&AccuracyReport) -> String| {
        let _ = write!(out, "{label:label_w$}");
        for r in reports {
            let _ = write!(out, " | {:>col_w$}", f(r));
        }
        out.push('\n');
    };
    row("Problem Solving Accuracy", &|r| format!("{:.2}%", 100.0 * r.accuracy));
    row("Problems", &|r| r.total.to_string());
    row("Incorrect", &|r| r.incorrect().to_string());
    row("  false positive only", &|r| r.false_positive.to_string());
    row("  false negative only", &|r| r.false_negative.to_string());
    row("  both", &|r| r.both.to_string());
    row("Flagged", &|r| r.flagged.len().to_string());
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("problem {0} has no ground truth")]
    NoTruth(usize),
    #[error("candidate count must be at least 1, got {0}")]
    BadCandidateCount(usize),
    #[error("scaling failed: {0}")]
    Scaling(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalOptions {
    pub mode: Mode,
    pub solver: SolverConfig,
    pub exec: Execution,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { mode: Mode::Strict, solver: SolverConfig::default(), exec: Execution::Parallel }
    }
}

fn truths(problems: &[Problem]) -> Result<Vec<usize>, EvalError> {
    if problems.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    problems.iter().enumerate().map(|(i, p)| p.truth.ok_or(EvalError::NoTruth(i))).collect()
}

/// Solves every problem under `pipeline` and aggregates the classes.
pub fn evaluate(problems: &[Problem], pipeline: &Pipeline, opts: &EvalOptions) -> Result<(AccuracyReport, Duration), EvalError> {
    let start = Instant::now();
    let truths = truths(problems)?;
    let indexed: Vec<usize> = (0..problems.len()).collect();
    let results: Vec<(ErrorClass, Option<Flagged>)> = par::map(opts.exec, &indexed, |&i| {
        let truth = truths[i];
        let observed;
        let problem = match pipeline {
            Pipeline::AtomsOnly => &problems[i],
            Pipeline::ImageObserver(dir) => match read_observation(dir, i) {
                Ok(Some(p)) => {
                    observed = p;
                    &observed
                }
                Ok(None) => {
                    let reason = "missing observation".to_string();
                    return (ErrorClass::FalseNegative, Some(Flagged { index: i, reason }));
                }
                Err(e) => return (ErrorClass::FalseNegative, Some(Flagged { index: i, reason: e.to_string() })),
            },
        };
        let verdict = Solver::new(&problem.vocab, opts.solver.clone()).solve(problem, opts.mode);
        (classify(&verdict, truth), None)
    });
    let classes: Vec<ErrorClass> = results.iter().map(|r| r.0).collect();
    let flagged = results.into_iter().filter_map(|r| r.1).collect();
    Ok((AccuracyReport::from_classes(pipeline.tag(), opts.mode, &classes, flagged), start.elapsed()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub error_rate: f64,
    pub false_positive_rate: f64,
    pub false_negative_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub cores: usize,
    pub points: Vec<ScalingPoint>,
    /// Least-squares line `e_n = slope * n + intercept`.
    pub slope: f64,
    pub intercept: f64,
    /// Least-squares `e` for the proportional model `e_n = e * n`.
    pub e: f64,
    /// Fraction of all distractors at the largest `n` that satisfy every rule.
    pub per_distractor_false_positive: f64,
}

impl ScalingReport {
    /// `slope / e`, 1 for an exactly proportional law.
    pub fn slope_ratio(&self) -> f64 {
        if self.e == 0.0 {
            return f64::NAN;
        }
        self.slope / self.e
    }

    pub fn strictly_monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[1].error_rate > w[0].error_rate)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>4} | {:>8} | {:>8} | {:>8}", "n", "e_n", "fp", "fn");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{:>4} | {:>8.4} | {:>8.4} | {:>8.4}",
                p.n, p.error_rate, p.false_positive_rate, p.false_negative_rate
            );
        }
        let _ = writeln!(
            out,
            "fit: e_n = {:.5} n {} {:.5}; proportional e = {:.5}; slope ratio = {:.3}",
            self.slope,
            if self.intercept < 0.0 { '-' } else { '+' },
            self.intercept.abs(),
            self.e,
            self.slope_ratio()
        );
        out
    }
}

/// Least squares over `(x, y)`: `(slope, intercept, through-origin slope)`.
pub fn fit_line(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let slope = if denom == 0.0 { 0.0 } else { (n * sxy - sx * sy) / denom };
    let intercept = (sy - slope * sx) / n;
    let origin = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    (slope, intercept, origin)
}

/// Re-solves each problem's grid with the truth plus the first `n - 1`
/// unverified distractors drawn from a per-problem stream, for each `n`.
/// Distractor lists are prefixes of one draw, so every `n` sees the same
/// cores and nested candidate sets.
pub fn scaling_experiment(
    generator: &Generator,
    problems: &[Problem],
    n_list: &[usize],
    opts: &EvalOptions,
) -> Result<ScalingReport, EvalError> {
    let truths = truths(problems)?;
    if let Some(&bad) = n_list.iter().find(|&&n| n == 0) {
        return Err(EvalError::BadCandidateCount(bad));
    }
    let max_n = n_list.iter().copied().max().unwrap_or(1);
    let indexed: Vec<usize> = (0..problems.len()).collect();
    let per_problem: Vec<Result<(Vec<ErrorClass>, usize), EvalError>> = par::map(opts.exec, &indexed, |&i| {
        let p = &problems[i];
        let truth = p.candidates[truths[i]].clone();
        let index = p.provenance.as_ref().map_or(i as u64, |pr| pr.index);
        let mut rng = stream_rng(generator.spec().seed, index, SCALING_STREAM);
        let distractors = generator
            .raw_distractors(&truth, max_n - 1, &mut rng)
            .map_err(|e| EvalError::Scaling(format!("problem {i}: {e}")))?;
        let solver = Solver::new(&p.vocab, opts.solver.clone());
        let classes = n_list
            .iter()
            .map(|&n| {
                let mut candidates = vec![truth.clone()];
                candidates.extend_from_slice(&distractors[..n - 1]);
                let q = Problem { candidates, truth: Some(0), provenance: None, ..p.clone() };
                classify(&solver.solve(&q, opts.mode), 0)
            })
            .collect();
        let mut full = vec![truth];
        full.extend(distractors);
        let q = Problem { candidates: full, truth: Some(0), provenance: None, ..p.clone() };
        let verdict = solver.solve(&q, Mode::Strict);
        let fp = verdict.reports[1..].iter().filter(|r| r.fully_satisfying).count();
        Ok((classes, fp))
    });
    let per_problem: Vec<(Vec<ErrorClass>, usize)> = per_problem.into_iter().collect::<Result<_, _>>()?;
    let total = problems.len() as f64;
    let points: Vec<ScalingPoint> = n_list
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let rate = |f: &dyn Fn(ErrorClass) -> bool| per_problem.iter().filter(|(c, _)| f(c[k])).count() as f64 / total;
            ScalingPoint {
                n,
                error_rate: rate(&|c| c != ErrorClass::Accurate),
                false_positive_rate: rate(&|c| c.has_false_positive()),
                false_negative_rate: rate(&|c| c.has_false_negative()),
            }
        })
        .collect();
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.error_rate)).collect();
    let (slope, intercept, e) = fit_line(&xy);
    let fp_total: usize = per_problem.iter().map(|(_, fp)| fp).sum();
    let distractors = (max_n - 1) * problems.len();
    Ok(ScalingReport {
        cores: problems.len(),
        points,
        slope,
        intercept,
        e,
        per_distractor_false_positive: if distractors == 0 { 0.0 } else { fp_total as f64 / distractors as f64 },
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ablation {
    /// Withhold these traits' argument facts from the solver.
    DropAtoms(Vec<TraitId>),
    /// Observations of jittered renders, evaluated through the observer
    /// pipeline.
    Noise { amplitude: u8, observations: PathBuf },
}

impl Ablation {
    pub fn describe(&self, vocab: &crate::vocab::Vocabulary) -> String {
        match self {
            Ablation::DropAtoms(ts) if ts.is_empty() => "drop-atoms()".into(),
            Ablation::DropAtoms(ts) => {
                let names: Vec<&str> = ts.iter().map(|&t| vocab.trait_name(t)).collect();
                format!("drop-atoms({})", names.join(","))
            }
            Ablation::Noise { amplitude, .. } => format!("noise({amplitude})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub delta: String,
    pub baseline: AccuracyReport,
    pub ablated: AccuracyReport,
    /// `baseline.accuracy - ablated.accuracy`.
    pub drop: f64,
}

impl AblationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Evaluates `baseline` and the same options under `delta`. For
/// [`Ablation::Noise`] the baseline is the pipeline given in `baseline`.
pub fn ablation_run(
    problems: &[Problem],
    baseline: &Pipeline,
    delta: &Ablation,
    opts: &EvalOptions,
) -> Result<AblationReport, EvalError> {
    let vocab = problems.first().ok_or(EvalError::EmptyCorpus)?.vocab.clone();
    let (base, _) = evaluate(problems, baseline, opts)?;
    let ablated = match delta {
        Ablation::DropAtoms(traits) => {
            let mut o = opts.clone();
            o.solver.suppressed.extend(traits.iter().copied());
            evaluate(problems, baseline, &o)?.0
        }
        Ablation::Noise { observations, .. } => {
            evaluate(problems, &Pipeline::ImageObserver(observations.clone()), opts)?.0
        }
    };
    Ok(AblationReport { delta: delta.describe(&vocab), drop: base.accuracy - ablated.accuracy, baseline: base, ablated })
}

/// Whether the verdict names exactly the truth.
pub fn is_accurate(outcome: &Outcome, truth: usize) -> bool {
    *outcome == Outcome::Unique(truth)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::fixtures::{fixture, Fixture};
    use crate::generator::GeneratorSpec;
    use crate::vocab::Vocabulary;

    fn fixtures() -> Vec<Problem> {
        Fixture::ALL.iter().map(|&f| fixture(f)).collect()
    }

    #[test]
    fn single_problem_accuracy() {
        let (r, _) = evaluate(&fixtures()[..1], &Pipeline::AtomsOnly, &EvalOptions::default()).unwrap();
        assert_eq!((r.total, r.accurate, r.accuracy), (1, 1, 1.0));
        assert!(r.is_consistent());
    }

    #[test]
    fn truth_removed_is_never_accurate() {
        let problems: Vec<Problem> = fixtures()
            .into_iter()
            .map(|mut p| {
                let t = p.truth.unwrap();
                p.candidates.remove(t);
                // Point the truth at a slot that no longer holds it.
                p.truth = Some(t.min(p.candidates.len() - 1));
                p
            })
            .collect();
        let (r, _) = evaluate(&problems, &Pipeline::AtomsOnly, &EvalOptions::default()).unwrap();
        assert_eq!(r.accurate, 0);
        assert_eq!(r.false_negative_bearing(), r.total);
    }

    #[test]
    fn parallel_and_sequential_reports_match() {
        let seq = EvalOptions { exec: Execution::Sequential, ..EvalOptions::default() };
        let a = evaluate(&fixtures(), &Pipeline::AtomsOnly, &EvalOptions::default()).unwrap().0;
        let b = evaluate(&fixtures(), &Pipeline::AtomsOnly, &seq).unwrap().0;
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn missing_observations_are_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let (r, _) =
            evaluate(&fixtures(), &Pipeline::ImageObserver(dir.path().into()), &EvalOptions::default()).unwrap();
        assert_eq!(r.accurate, 0);
        assert_eq!(r.flagged.len(), 4);
        assert_eq!(r.pipeline, "image+observer");
        assert!(r.is_consistent());
    }

    #[test]
    fn empty_and_truthless() {
        assert_eq!(evaluate(&[], &Pipeline::AtomsOnly, &EvalOptions::default()).unwrap_err(), EvalError::EmptyCorpus);
        let mut p = fixture(Fixture::Union);
        p.truth = None;
        assert_eq!(evaluate(&[p], &Pipeline::AtomsOnly, &EvalOptions::default()).unwrap_err(), EvalError::NoTruth(0));
    }

    #[test]
    fn empty_delta_equals_baseline() {
        let r = ablation_run(&fixtures(), &Pipeline::AtomsOnly, &Ablation::DropAtoms(vec![]), &EvalOptions::default())
            .unwrap();
        assert_eq!(r.baseline, r.ablated);
        assert_eq!(r.drop, 0.0);
    }

    #[test]
    fn fit() {
        let (s, i, e) = fit_line(&[(1.0, 2.0), (2.0, 4.0), (3.0, 6.0)]);
        assert!((s - 2.0).abs() < 1e-12 && i.abs() < 1e-12 && (e - 2.0).abs() < 1e-12);
        let (s, i, _) = fit_line(&[(0.0, 1.0), (2.0, 2.0)]);
        assert!((s - 0.5).abs() < 1e-12 && (i - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_with_truth_only_has_no_false_positives() {
        let vocab = Arc::new(Vocabulary::standard());
        let g = Generator::new(vocab, GeneratorSpec::with_seed(3)).unwrap();
        let problems = g.generate_corpus(30, Execution::Parallel).unwrap();
        let r = scaling_experiment(&g, &problems, &[1, 4, 8], &EvalOptions::default()).unwrap();
        assert_eq!(r.points[0].false_positive_rate, 0.0);
        assert_eq!(r.points[0].error_rate, r.points[0].false_negative_rate);
        assert!(r.points.windows(2).all(|w| w[1].error_rate >= w[0].error_rate));
        assert_eq!(r, scaling_experiment(&g, &problems, &[1, 4, 8], &EvalOptions::default()).unwrap());
    }
}
