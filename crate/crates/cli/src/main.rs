//! `relmat`: generate, render, solve and evaluate progressive-matrix problems.
//!
//! Exit codes: 0 success, 2 usage error, 3 malformed input file, 4 I/O
//! failure, 5 generation failure, 6 evaluation failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use relmat::corpus::{read_corpus, read_manifest, write_corpus, write_training_manifest, CorpusError, TrainingSchema};
use relmat::eval::{
    ablation_run, evaluate, scaling_experiment, summary_table, Ablation, EvalOptions, Pipeline,
};
use relmat::fixtures::{fixture, Fixture};
use relmat::observe::{emit_observations, read_predictions, EmitError, DEFAULT_THRESHOLD};
use relmat::par::Execution;
use relmat::render::{render_problem_sheet, Jitter, StyleConfig};
use relmat::{decode_atoms, encode_atoms, export_asp, Generator, GeneratorSpec, Mode, Outcome, Problem, SolverConfig, Vocabulary};

/// Writes to stdout; a closed pipe ends the process quietly.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if let Err(e) = write!(std::io::stdout().lock(), $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
        }
    }};
}

macro_rules! outln {
    ($($arg:tt)*) => {{
        out!($($arg)*);
        out!("\n");
    }};
}

#[derive(Debug, Parser)]
#[command(name = "relmat", version, about = "Rule-induction solver for progressive-matrix problems")]
struct Cli {
    /// Run batch work on one thread
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded corpus of verified problems
    Generate(GenerateArgs),
    /// Render a corpus to PNG cells plus a label manifest
    Render(RenderArgs),
    /// Solve one atoms file and print the verdict and rule trace
    Solve(SolveArgs),
    /// Evaluate a corpus and write reports
    Eval(EvalArgs),
    /// Print a problem's facts in ASP syntax
    ExportAsp(ExportArgs),
    /// Write the four hand-authored problems as atoms files
    Fixtures(FixturesArgs),
    /// Convert observer prediction rows into truth-free atoms files
    EmitObservations(EmitArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Base seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of problems
    #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u64).range(1..))]
    size: u64,
    /// Candidates per problem, truth included
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(2..))]
    candidates: u64,
    /// Output corpus directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// Corpus directory written by `generate`
    #[arg(long)]
    corpus: PathBuf,
    /// Output directory for images and labels
    #[arg(long)]
    out: PathBuf,
    /// Maximum per-channel color jitter (0 disables noise)
    #[arg(long, default_value_t = 0)]
    jitter: u8,
    /// Seed of the jitter streams
    #[arg(long, default_value_t = 0)]
    jitter_seed: u64,
    /// Also write one problem sheet per problem under `sheets/`
    #[arg(long)]
    sheets: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Ranked,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Strict => Mode::Strict,
            ModeArg::Ranked => Mode::Ranked,
        }
    }
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Strict keeps only fully satisfying candidates; ranked orders all of them
    #[arg(long, value_enum, default_value_t = ModeArg::Strict)]
    mode: ModeArg,
    /// Induce row rules only
    #[arg(long)]
    rows_only: bool,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig { columns: !self.rows_only, ..SolverConfig::default() }
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Atoms file
    file: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Print the verdict as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Corpus directory written by `generate`
    #[arg(long)]
    corpus: PathBuf,
    /// Directory of observed atoms files; selects the image pipeline
    #[arg(long)]
    observations: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Candidate counts for the scaling experiment, e.g. 4,8,10,16
    #[arg(long, value_delimiter = ',')]
    scaling: Option<Vec<usize>>,
    /// Ablation: `drop-atoms:all`, `drop-atoms:shape,color` or `noise:AMPLITUDE`
    /// (noise reads observations of jittered renders from --noise-observations)
    #[arg(long)]
    ablate: Option<String>,
    /// Observations of jittered renders for `noise:` ablations
    #[arg(long)]
    noise_observations: Option<PathBuf>,
    /// JSON report path
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    /// Atoms file
    file: PathBuf,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FixturesArgs {
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EmitArgs {
    /// `schema.json` from the training manifest
    #[arg(long)]
    schema: PathBuf,
    /// Prediction rows, one JSON object per line
    #[arg(long)]
    predictions: PathBuf,
    /// Output directory for `pNNNNNN.atoms` files
    #[arg(long)]
    out: PathBuf,
    /// Presence probability at or above which a head becomes an object
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
}

enum Failure {
    Malformed(anyhow::Error),
    Io(anyhow::Error),
    Generate(anyhow::Error),
    Eval(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Malformed(_) => 3,
            Failure::Io(_) => 4,
            Failure::Generate(_) => 5,
            Failure::Eval(_) => 6,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Malformed(e) | Failure::Io(e) | Failure::Generate(e) | Failure::Eval(e) => e,
        }
    }
}

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io { .. } => Failure::Io(e.into()),
            _ => Failure::Malformed(e.into()),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn io<T>(r: std::io::Result<T>, path: &Path) -> Result<T> {
    r.with_context(|| path.display().to_string()).map_err(Failure::Io)
}

fn read_atoms(path: &Path) -> Result<Problem> {
    let text = io(fs::read_to_string(path), path)?;
    decode_atoms(&text).map_err(|e| Failure::Malformed(anyhow!("{}:{e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        io(fs::create_dir_all(dir), dir)?;
    }
    io(fs::write(path, contents), path)
}

fn exec(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn generate(a: &GenerateArgs, exec: Execution) -> Result<()> {
    let spec = GeneratorSpec { candidate_count: a.candidates as usize, ..GeneratorSpec::with_seed(a.seed) };
    let g = Generator::new(Arc::new(Vocabulary::standard()), spec).map_err(|e| Failure::Generate(e.into()))?;
    let problems = g.generate_corpus(a.size, exec).map_err(|e| Failure::Generate(e.into()))?;
    let m = write_corpus(&a.out, &problems, Some(g.spec()))?;
    let rejections: u64 = problems.iter().filter_map(|p| p.provenance.as_ref()).map(|p| p.rejections as u64).sum();
    outln!("wrote {} problems to {} (spec {}, {rejections} rejected draws)", m.count, a.out.display(), g.spec().hash());
    Ok(())
}

fn render(a: &RenderArgs, exec: Execution) -> Result<()> {
    let problems = read_corpus(&a.corpus, exec)?;
    if problems.is_empty() {
        return Err(Failure::Malformed(anyhow!("{}: corpus is empty", a.corpus.display())));
    }
    let jitter = (a.jitter > 0).then_some(Jitter { seed: a.jitter_seed, amplitude: a.jitter });
    let style = StyleConfig { jitter, ..StyleConfig::default() };
    let schema = write_training_manifest(&problems, &a.out, &style, exec)?;
    if a.sheets {
        let dir = a.out.join("sheets");
        io(fs::create_dir_all(&dir), &dir)?;
        for (i, p) in problems.iter().enumerate() {
            let path = dir.join(format!("p{i:06}.png"));
            io(render_problem_sheet(p, &style).write_png(&path), &path)?;
        }
    }
    outln!("wrote {} images to {}", schema.rows, a.out.display());
    Ok(())
}

fn solve(a: &SolveArgs) -> Result<()> {
    let p = read_atoms(&a.file)?;
    let solver = relmat::Solver::new(&p.vocab, a.solver.config());
    let v = solver.solve(&p, a.solver.mode.into());
    if a.json {
        outln!("{}", serde_json::to_string_pretty(&v).expect("verdict serializes"));
        return Ok(());
    }
    match &v.outcome {
        Outcome::Unique(i) => outln!("outcome: unique {i}"),
        Outcome::Ambiguous(ix) => {
            let ix: Vec<String> = ix.iter().map(usize::to_string).collect();
            outln!("outcome: ambiguous {}", ix.join(" "));
        }
        Outcome::Unsat => outln!("outcome: unsat"),
    }
    if let Some(t) = p.truth {
        outln!("truth: {t} ({:?})", relmat::classify(&v, t));
    }
    outln!("rules: {}", v.rules.len());
    for r in &v.rules.rules {
        outln!("  {}", r.display(&p.vocab));
    }
    if !v.rules.dropped_pairs.is_empty() {
        outln!("dropped pairs: {}", v.rules.dropped_pairs.len());
        for (c, t) in &v.rules.dropped_pairs {
            outln!("  {} {}", c.display(&p.vocab), p.vocab.trait_name(*t));
        }
    }
    outln!("candidates:");
    for r in &v.reports {
        let mark = if r.fully_satisfying { "*" } else { " " };
        outln!("  {mark} {} satisfied {} violated {}", r.candidate_index, r.satisfied, r.violated);
    }
    Ok(())
}

fn parse_ablation(spec: &str, vocab: &Vocabulary, noise_dir: Option<&PathBuf>) -> Result<Ablation> {
    let bad = |m: String| Failure::Eval(anyhow!("--ablate {spec}: {m}"));
    if let Some(rest) = spec.strip_prefix("drop-atoms:") {
        if rest == "all" {
            return Ok(Ablation::DropAtoms(vocab.ids().collect()));
        }
        let ids = rest
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|n| vocab.lookup(n).ok_or_else(|| bad(format!("unknown trait `{n}`"))))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Ablation::DropAtoms(ids));
    }
    if let Some(rest) = spec.strip_prefix("noise:") {
        let amplitude: u8 = rest.parse().map_err(|_| bad(format!("bad amplitude `{rest}`")))?;
        let observations = noise_dir.cloned().ok_or_else(|| bad("needs --noise-observations".into()))?;
        return Ok(Ablation::Noise { amplitude, observations });
    }
    Err(bad("expected drop-atoms:... or noise:...".into()))
}

fn eval(a: &EvalArgs, exec: Execution) -> Result<()> {
    let problems = read_corpus(&a.corpus, exec)?;
    let opts = EvalOptions { mode: a.solver.mode.into(), solver: a.solver.config(), exec };
    let pipeline = match &a.observations {
        Some(dir) => Pipeline::ImageObserver(dir.clone()),
        None => Pipeline::AtomsOnly,
    };
    let fail = |e: relmat::eval::EvalError| Failure::Eval(e.into());
    let (report, elapsed) = evaluate(&problems, &pipeline, &opts).map_err(fail)?;
    out!("{}", summary_table(&[&report]));
    eprintln!("evaluated in {:.2?}", elapsed);
    let mut json = serde_json::json!({ "accuracy": report });
    if let Some(ns) = &a.scaling {
        let m = read_manifest(&a.corpus)?;
        let spec = m
            .spec
            .ok_or_else(|| Failure::Eval(anyhow!("{}: scaling needs a generated corpus", a.corpus.display())))?;
        let g = Generator::new(problems[0].vocab.clone(), spec).map_err(|e| Failure::Eval(e.into()))?;
        let s = scaling_experiment(&g, &problems, ns, &opts).map_err(fail)?;
        out!("\n{}", s.table());
        json["scaling"] = serde_json::to_value(&s).expect("report serializes");
    }
    if let Some(spec) = &a.ablate {
        let delta = parse_ablation(spec, &problems[0].vocab, a.noise_observations.as_ref())?;
        let r = ablation_run(&problems, &pipeline, &delta, &opts).map_err(fail)?;
        outln!(
            "\nablation {}: {:.2}% -> {:.2}% (drop {:.2} points)",
            r.delta,
            100.0 * r.baseline.accuracy,
            100.0 * r.ablated.accuracy,
            100.0 * r.drop
        );
        json["ablation"] = serde_json::to_value(&r).expect("report serializes");
    }
    if let Some(path) = &a.report {
        write(path, &(serde_json::to_string_pretty(&json).expect("report serializes") + "\n"))?;
    }
    Ok(())
}

fn export(a: &ExportArgs) -> Result<()> {
    let text = export_asp(&read_atoms(&a.file)?);
    match &a.out {
        Some(path) => write(path, &text),
        None => {
            out!("{text}");
            Ok(())
        }
    }
}

fn fixtures(a: &FixturesArgs) -> Result<()> {
    for f in Fixture::ALL {
        let path = a.out.join(format!("{f}.atoms"));
        write(&path, &encode_atoms(&fixture(f), true))?;
        outln!("{}", path.display());
    }
    Ok(())
}

fn emit(a: &EmitArgs) -> Result<()> {
    let text = io(fs::read_to_string(&a.schema), &a.schema)?;
    let schema: TrainingSchema = serde_json::from_str(&text)
        .map_err(|e| Failure::Malformed(anyhow!("{}: {e}", a.schema.display())))?;
    let vocab = schema.vocabulary().map_err(|e| Failure::Malformed(anyhow!("{}: {e}", a.schema.display())))?;
    let rows = read_predictions(&a.predictions)?;
    let written = emit_observations(Arc::new(vocab), &rows, a.threshold, &a.out).map_err(|e| match e {
        EmitError::Corpus(c) => Failure::from(c),
        EmitError::Observe(o) => Failure::Malformed(anyhow!("{}: {o}", a.predictions.display())),
    })?;
    outln!("wrote {} observation files to {}", written.len(), a.out.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let exec = exec(cli);
    match &cli.command {
        Command::Generate(a) => generate(a, exec),
        Command::Render(a) => render(a, exec),
        Command::Solve(a) => solve(a),
        Command::Eval(a) => eval(a, exec),
        Command::ExportAsp(a) => export(a),
        Command::Fixtures(a) => fixtures(a),
        Command::EmitObservations(a) => emit(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}
