use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use folqa::corpus::{corpus_to_jsonl, load_corpus, split, write_report, CorpusFormat};
use folqa::engine::{
    compile, enumerate_entities, entail, explain, export_smtlib, EngineConfig, Problem, Verdict,
};
use folqa::par::{with_jobs, Execution};
use folqa::pipeline::{run, summary_table, EvalConfig};
use folqa::semantics::DEFAULT_NODE_BUDGET;
use folqa::syntax::{parse, Formula, ParseOutcome};
use folqa::wellformed::check_swf;

/// First-order logic checking, entailment and NL-to-FOL evaluation.
#[derive(Debug, Parser)]
#[command(name = "folqa", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Treat unasserted ground atoms of fact predicates as false
    #[arg(long, global = true)]
    closed_world: bool,
    /// Weight of the SWF/LE harmonic term in the conversion score
    #[arg(long, global = true, default_value_t = 0.5, value_parser = parse_unit)]
    lambda1: f64,
    /// Seed for LE sampling and corpus splits
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Maximum number of ground formula nodes per problem
    #[arg(long, global = true, default_value_t = DEFAULT_NODE_BUDGET)]
    domain_budget: usize,
    /// Corpus format
    #[arg(long, global = true, value_enum, default_value_t = Format::Jsonl)]
    format: Format,
    /// Where `eval` writes its JSON report
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Worker threads for record-level parallelism (0 = all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score a formula string against the six well-formedness criteria
    Validate { formula: String },
    /// Parse a formula and print its canonical form
    Parse { formula: String },
    /// Decide whether the premises entail the query
    Entail {
        /// File with one premise per line (`#` starts a comment line)
        premises: PathBuf,
        query: String,
    },
    /// List the constants c for which the premises entail template[c]
    Enumerate {
        premises: PathBuf,
        /// Atom with exactly one variable argument, e.g. `eligible_ta(x)`
        template: String,
    },
    /// Evaluate a corpus and print the summary table
    Eval { corpus: PathBuf },
    /// Print the entailment check as an SMT-LIB script
    ExportSmt { premises: PathBuf, query: String },
    /// Split a corpus into train and test files
    Split {
        corpus: PathBuf,
        train: PathBuf,
        test: PathBuf,
        #[arg(long, default_value_t = 0.8, value_parser = parse_unit)]
        train_fraction: f64,
    },
}

fn parse_unit(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} is outside [0, 1]"))
    }
}

impl Global {
    fn engine(&self) -> EngineConfig {
        EngineConfig {
            closed_world: self.closed_world,
            node_budget: self.domain_budget,
        }
    }

    fn corpus_format(&self) -> CorpusFormat {
        match self.format {
            Format::Jsonl => CorpusFormat::Jsonl,
        }
    }
}

fn read_premises(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading premises from {}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

/// Prints diagnostics and returns `None` when anything fails to parse.
fn compile_or_report(premises: &[String], query: &str) -> Option<Problem> {
    match compile(premises, query) {
        Ok(p) => Some(p),
        Err(diags) => {
            for d in &diags {
                println!("{}: {}", d.source, d.diagnostic);
            }
            println!("Final Answer: Error");
            None
        }
    }
}

fn exit_code(v: &Verdict) -> u8 {
    match v {
        Verdict::True { .. } => 0,
        Verdict::False { .. } => 1,
        Verdict::Uncertain { .. } => 2,
        Verdict::CompileError { .. } => 3,
    }
}

fn cmd_validate(input: &str) -> u8 {
    let r = check_swf(input);
    println!("SWF {:.4} ({}/6)", r.score, r.passed());
    for c in &r.criteria {
        match &c.evidence {
            None => println!("  pass  {}", c.id.as_str()),
            Some(d) => println!("  FAIL  {}: {}", c.id.as_str(), d),
        }
    }
    u8::from(r.score != 1.0)
}

fn cmd_parse(input: &str) -> u8 {
    match parse(input) {
        ParseOutcome::Parsed { formula, warnings } => {
            println!("{formula}");
            let free = formula.free_vars();
            if !free.is_empty() {
                let list: Vec<String> = free.into_iter().collect();
                println!("free variables: {}", list.join(", "));
            }
            for w in warnings {
                println!("warning: {w}");
            }
            0
        }
        ParseOutcome::Rejected { errors } => {
            for e in errors {
                println!("error: {e}");
            }
            1
        }
    }
}

fn cmd_entail(g: &Global, premises: &Path, query: &str) -> Result<u8> {
    let premises = read_premises(premises)?;
    let Some(p) = compile_or_report(&premises, query) else {
        return Ok(3);
    };
    match entail(&p.kb, &p.query, &g.engine()) {
        Ok(v) => {
            print!("{}", explain(&v, &p.kb, &p.query));
            Ok(exit_code(&v))
        }
        Err(e) => {
            eprintln!("engine error: {e}");
            Ok(4)
        }
    }
}

fn cmd_enumerate(g: &Global, premises: &Path, template: &str) -> Result<u8> {
    let premises = read_premises(premises)?;
    let Some(p) = compile_or_report(&premises, template) else {
        return Ok(3);
    };
    let Formula::Atom(atom) = &p.query else {
        bail!("template must be a single atom, got {}", p.query);
    };
    let exec = Execution::default();
    match with_jobs(g.jobs, || enumerate_entities(&p.kb, atom, &g.engine(), exec)) {
        Ok(ans) => {
            for w in &ans.warnings {
                println!("warning: {w}");
            }
            for e in &ans.entities {
                println!("{e}");
            }
            Ok(0)
        }
        Err(e) => {
            eprintln!("engine error: {e}");
            Ok(4)
        }
    }
}

fn cmd_eval(g: &Global, corpus: &Path) -> Result<u8> {
    let loaded = load_corpus(corpus, g.corpus_format())
        .with_context(|| format!("loading corpus {}", corpus.display()))?;
    for s in &loaded.skipped {
        eprintln!("skipped line {}: {}", s.line, s.message);
    }
    let cfg = EvalConfig {
        lambda1: g.lambda1,
        closed_world: g.closed_world,
        seed: g.seed,
        node_budget: g.domain_budget,
        ..EvalConfig::default()
    };
    let name = corpus.display().to_string();
    let report = with_jobs(g.jobs, || run(&loaded.records, loaded.skipped.clone(), &cfg, Some(name)));
    if let Some(path) = &g.report {
        write_report(&report, path).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{}", summary_table(&report));
    Ok(0)
}

fn cmd_export_smt(g: &Global, premises: &Path, query: &str) -> Result<u8> {
    let premises = read_premises(premises)?;
    let Some(p) = compile_or_report(&premises, query) else {
        return Ok(3);
    };
    print!("{}", export_smtlib(&p.kb, &p.query, &g.engine()));
    Ok(0)
}

fn cmd_split(g: &Global, corpus: &Path, train: &Path, test: &Path, frac: f64) -> Result<u8> {
    let loaded = load_corpus(corpus, g.corpus_format())
        .with_context(|| format!("loading corpus {}", corpus.display()))?;
    let (a, b) = split(&loaded.records, frac, g.seed);
    fs::write(train, corpus_to_jsonl(&a)).with_context(|| format!("writing {}", train.display()))?;
    fs::write(test, corpus_to_jsonl(&b)).with_context(|| format!("writing {}", test.display()))?;
    println!("train {}  test {}  seed {}", a.len(), b.len(), g.seed);
    Ok(0)
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    let g = &cli.global;
    let code = match &cli.command {
        Command::Validate { formula } => cmd_validate(formula),
        Command::Parse { formula } => cmd_parse(formula),
        Command::Entail { premises, query } => cmd_entail(g, premises, query)?,
        Command::Enumerate { premises, template } => cmd_enumerate(g, premises, template)?,
        Command::Eval { corpus } => cmd_eval(g, corpus)?,
        Command::ExportSmt { premises, query } => cmd_export_smt(g, premises, query)?,
        Command::Split {
            corpus,
            train,
            test,
            train_fraction,
        } => cmd_split(g, corpus, train, test, *train_fraction)?,
    };
    Ok(ExitCode::from(code))
}
