use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use ocus::bench::{instance_files, parse_matrix, run_matrix, write_csv};
use ocus::dimacs::parse_dimacs;
use ocus::explain::{explain_full_with, ExplainOptions, SequenceDocument};
use ocus::ocus::{default_actual_domain, hitting_set_for};
use ocus::puzzle::read_problem;
use ocus::{
    assemble_ocus_formula, verify_sequence, CnfFormula, ExplanationProblem, GrowStrategy, IndexSet, Interpretation,
    Literal, MetaConstraint, OcusEngine, OcusQuery, OcusResult, PolarityHint, PuzzleSpec, SatSubsetCache,
    SequenceConfig,
};

#[derive(Parser)]
#[command(name = "ocus", version, about = "Optimal constrained unsatisfiable subsets and step-wise explanations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Computes one optimal constrained unsatisfiable subset.
    Ocus(OcusArgs),
    /// Explains a whole problem step by step.
    Explain(ExplainArgs),
    /// Runs a configuration matrix over a directory of problems and prints CSV.
    Bench(BenchArgs),
    /// Encodes a logic-grid puzzle as a problem document.
    Encode(EncodeArgs),
    /// Checks a sequence document against a problem.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GrowArgs {
    /// none, model, greedy, max:full or max:actual.
    #[arg(long, default_value = "max:actual")]
    grow: String,
    /// unif, pos or inv; only used by the max grows.
    #[arg(long, default_value = "unif")]
    grow_weights: String,
}

impl GrowArgs {
    fn strategy(&self) -> Result<GrowStrategy, Failure> {
        GrowStrategy::parse(&self.grow, &self.grow_weights).ok_or_else(|| {
            Failure::usage(format!(
                "unknown grow '{}' with weights '{}' (grow: none|model|greedy|max:full|max:actual, weights: unif|pos|inv)",
                self.grow, self.grow_weights
            ))
        })
    }
}

#[derive(Args)]
struct OcusArgs {
    /// Problem document or puzzle.
    #[arg(long, conflicts_with = "formula", required_unless_present = "formula")]
    problem: Option<PathBuf>,
    /// Facts already derived (atom ids or names, comma separated); defaults to the initial facts.
    #[arg(long, requires = "problem")]
    interpretation: Option<String>,
    /// DIMACS formula.
    #[arg(long)]
    formula: Option<PathBuf>,
    /// Clause numbers (1-based) of which the subset must hold exactly one.
    #[arg(long, requires = "formula")]
    exactly_one: Option<String>,
    /// Clause weights for a DIMACS formula, comma separated; default 1 each.
    #[arg(long, requires = "formula")]
    weights: Option<String>,
    #[command(flatten)]
    grow: GrowArgs,
    /// Prints every iteration as a JSON line.
    #[arg(long)]
    trace: bool,
    /// Prints the sets collected for the hitting-set solver.
    #[arg(long)]
    dump_hs: bool,
}

#[derive(Args)]
struct ExplainArgs {
    #[arg(long)]
    problem: PathBuf,
    /// mus, ocus or ousb.
    #[arg(long, default_value = "ocus")]
    algo: String,
    /// none, ss, shared or perlit.
    #[arg(long, default_value = "none")]
    incr: String,
    #[command(flatten)]
    grow: GrowArgs,
    /// Where to write the sequence document; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = "OCUS_TIMEOUT_MS")]
    timeout_ms: Option<u64>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of `*.json` problems or puzzles.
    #[arg(long)]
    problems: PathBuf,
    /// Comma-separated configuration labels such as `ocus+shared@max:actual:unif`.
    #[arg(long, default_value = "ocus+shared@none,ocus+shared@max:actual:unif")]
    matrix: String,
    /// Limit per (instance, configuration) run.
    #[arg(long, env = "OCUS_TIMEOUT_MS", default_value_t = 60_000)]
    timeout_ms: u64,
    /// Cells run in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// CSV destination; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    puzzle: PathBuf,
    /// Writes the constraints as DIMACS instead of a problem document.
    #[arg(long)]
    dimacs: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Sequence document written by `explain`.
    #[arg(long)]
    sequence: PathBuf,
}

/// A message and the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }

    fn negative(message: impl Into<String>) -> Failure {
        Failure { code: 1, message: message.into() }
    }
}

impl From<ocus::Error> for Failure {
    fn from(e: ocus::Error) -> Failure {
        let code = match e {
            ocus::Error::Internal(_) | ocus::Error::Timeout => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Ocus(a) => cmd_ocus(a),
        Command::Explain(a) => cmd_explain(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Encode(a) => cmd_encode(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ocus: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty())
}

fn parse_interpretation(problem: &ExplanationProblem, s: &str) -> Result<Interpretation, Failure> {
    let mut lits = Vec::new();
    for tok in split_list(s) {
        let lit = match tok.parse::<i32>() {
            Ok(v) => Literal::from_dimacs(v).filter(|l| l.atom() <= problem.atom_count()),
            Err(_) => {
                let (positive, name) = match tok.strip_prefix('-') {
                    Some(rest) => (false, rest),
                    None => (true, tok),
                };
                problem.atom_names().iter().position(|n| n == name).map(|i| Literal::new(i as u32 + 1, positive))
            }
        };
        lits.push(lit.ok_or_else(|| Failure::usage(format!("unknown literal '{tok}'")))?);
    }
    Ok(Interpretation::from_literals(lits)?)
}

fn parse_numbers(s: &str, what: &str) -> Result<Vec<u64>, Failure> {
    split_list(s).map(|t| t.parse::<u64>().map_err(|_| Failure::usage(format!("invalid {what} '{t}'")))).collect()
}

fn cmd_ocus(a: OcusArgs) -> Result<(), Failure> {
    let grow = a.grow.strategy()?;
    let (formula, constraint, hint): (CnfFormula, MetaConstraint, PolarityHint) = if let Some(path) = &a.problem {
        let problem = read_problem(&read(path)?)?;
        let interp = match &a.interpretation {
            Some(s) => parse_interpretation(&problem, s)?,
            None => problem.initial().clone(),
        };
        let (f, domain) = assemble_ocus_formula(&problem, &interp)?;
        (f, MetaConstraint::ExactlyOne(domain), PolarityHint::from(problem.target()))
    } else {
        let path = a.formula.as_ref().expect("clap requires --problem or --formula");
        let mut f = parse_dimacs(&read(path)?)?;
        if let Some(w) = &a.weights {
            let w = parse_numbers(w, "weight")?;
            if w.len() != f.len() || w.contains(&0) {
                return Err(Failure::usage(format!("expected {} positive weights, got {:?}", f.len(), w)));
            }
            for (i, &x) in w.iter().enumerate() {
                f.set_weight(i, x);
            }
        }
        let constraint = match &a.exactly_one {
            None => MetaConstraint::TriviallyTrue,
            Some(s) => {
                let mut domain = IndexSet::new();
                for n in parse_numbers(s, "clause number")? {
                    if n == 0 || n as usize > f.len() {
                        return Err(Failure::usage(format!("clause number {n} out of range 1..={}", f.len())));
                    }
                    domain.insert(n as usize - 1);
                }
                MetaConstraint::ExactlyOne(domain)
            }
        };
        (f, constraint, PolarityHint::none())
    };
    let mut hs = hitting_set_for(&formula, constraint)?;
    let mut cache = SatSubsetCache::new();
    let active = formula.all_indices();
    let actual = default_actual_domain(&formula);
    let query = OcusQuery { active: &active, grow, actual_domain: &actual, hint: &hint, bound: None };
    let mut engine = OcusEngine::new(&formula);
    if a.trace {
        engine.enable_trace();
    }
    let result = engine.solve(&query, &mut hs, &mut cache)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for rec in engine.take_trace() {
        let line = serde_json::to_string(&rec).expect("trace records serialize");
        let _ = writeln!(out, "{line}");
    }
    if a.dump_hs {
        let _ = write!(out, "{}", hs.dump());
    }
    match result {
        OcusResult::Found { subset, cost } => {
            let names: Vec<String> = subset.iter().map(|i| format!("c{}", i + 1)).collect();
            let _ = writeln!(out, "subset: {}", names.join(" "));
            let _ = writeln!(out, "cost: {cost}");
            Ok(())
        }
        OcusResult::NoneExists => Err(Failure::negative("no unsatisfiable subset satisfies the constraint")),
        OcusResult::ExceedsBound => Err(Failure::negative("bound exceeded")),
    }
}

fn explain_config(a: &ExplainArgs) -> Result<SequenceConfig, Failure> {
    let label = if a.algo == "mus" && a.incr == "none" {
        "mus".to_string()
    } else {
        let grow = a.grow.strategy()?;
        let incr = if a.incr == "none" { String::new() } else { format!("+{}", a.incr) };
        format!("{}{incr}@{}", a.algo, grow.label())
    };
    Ok(label.parse::<SequenceConfig>()?)
}

fn cmd_explain(a: ExplainArgs) -> Result<(), Failure> {
    let config = explain_config(&a)?;
    let problem = read_problem(&read(&a.problem)?)?;
    let started = Instant::now();
    let options = ExplainOptions { deadline: a.timeout_ms.map(|ms| started + Duration::from_millis(ms)) };
    let seq = explain_full_with(&problem, config, options).map_err(|e| Failure::from(e.error))?;
    let report = verify_sequence(&problem, &seq.steps);
    if let Some(v) = report.violation {
        return Err(Failure::negative(format!("generated sequence failed verification: {v}")));
    }
    let doc = SequenceDocument::new(&problem, &config, &seq);
    let text = serde_json::to_string_pretty(&doc).expect("documents serialize") + "\n";
    write_output(a.out.as_deref(), &text)?;
    eprintln!(
        "{}: {} steps, total cost {}, {:.1} ms",
        config.label(),
        seq.steps.len(),
        seq.total_cost(),
        started.elapsed().as_secs_f64() * 1000.0
    );
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    let configs = parse_matrix(&a.matrix)?;
    let files = instance_files(&a.problems).map_err(|e| Failure::usage(format!("{}: {e}", a.problems.display())))?;
    if files.is_empty() {
        return Err(Failure::usage(format!("no *.json problems in {}", a.problems.display())));
    }
    let report = run_matrix(&files, &configs, Duration::from_millis(a.timeout_ms), a.jobs);
    for (path, reason) in &report.skipped {
        eprintln!("ocus: warning: skipping {}: {reason}", path.display());
    }
    for (instance, config, reason) in &report.failed {
        eprintln!("ocus: warning: {instance} under {config} failed: {reason}");
    }
    if report.skipped.len() == files.len() {
        return Err(Failure::usage("no instance could be read"));
    }
    let mut buf = Vec::new();
    write_csv(&mut buf, &report.records)?;
    write_output(a.out.as_deref(), &String::from_utf8(buf).expect("CSV of UTF-8 fields"))
}

fn cmd_encode(a: EncodeArgs) -> Result<(), Failure> {
    let problem = PuzzleSpec::from_json(&read(&a.puzzle)?)?.encode()?;
    let text = if a.dimacs { problem.constraints().to_dimacs() } else { problem.to_json() + "\n" };
    write_output(a.out.as_deref(), &text)
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let problem = read_problem(&read(&a.problem)?)?;
    let doc: SequenceDocument = serde_json::from_slice(&read(&a.sequence)?)
        .map_err(|e| Failure::usage(format!("{}: {e}", a.sequence.display())))?;
    let report = verify_sequence(&problem, &doc.explanation_steps());
    match report.violation {
        None if report.total_cost == doc.total_cost => {
            println!("valid: {} steps, total cost {}", doc.steps.len(), report.total_cost);
            Ok(())
        }
        None => Err(Failure::negative(format!(
            "stated total cost {} but the steps cost {}",
            doc.total_cost, report.total_cost
        ))),
        Some(v) => Err(Failure::negative(format!("invalid: {v}"))),
    }
}
