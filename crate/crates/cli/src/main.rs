//! `csprove`: decide CS formulas, check proofs, run the corpus and sweeps.
//!
//! Exit codes: 0 proved / ok, 1 refuted / rejected / mismatch, 2 usage or
//! input error, 3 internal invariant violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use csprove_core::corpus::{enumerate_formulas, to_jsonl};
use csprove_core::{
    check_proof, decide, forces, parse, refute_semantic, standard_corpus, validate_model,
    CarlsonModel, Config, Expected, Formula, Label, ProofGraph, SearchError, Sequent, Verdict,
};

const PROVED: u8 = 0;
const REFUTED: u8 = 1;
const USAGE: u8 = 2;
const INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "csprove", version, about = "Decision procedure for the bimodal provability logic CS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SearchOpts {
    /// Label phases allowed per branch before giving up
    #[arg(long, value_name = "N")]
    max_steps: Option<u64>,
    /// Log search events to stderr as JSON lines
    #[arg(long)]
    trace: bool,
}

impl SearchOpts {
    fn config(&self) -> Config {
        Config {
            max_steps: self.max_steps,
            trace: self.trace,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide a formula, or a sequent given as JSON
    Decide {
        /// Formula, e.g. "[b]([b]p -> p) -> [b]p"
        #[arg(required_unless_present = "sequent", conflicts_with = "sequent")]
        formula: Option<String>,
        /// Sequent JSON, inline or as a file path
        #[arg(long, value_name = "JSON|PATH")]
        sequent: Option<String>,
        /// Write the proof graph here when proved
        #[arg(long, value_name = "PATH")]
        proof_out: Option<PathBuf>,
        /// Write the countermodel here when refuted
        #[arg(long, value_name = "PATH")]
        model_out: Option<PathBuf>,
        /// Also emit the countermodel as Graphviz (next to --model-out, else on stdout)
        #[arg(long)]
        dot: bool,
        #[command(flatten)]
        search: SearchOpts,
    },
    /// Check a proof graph written by `decide --proof-out`
    Check {
        #[arg(long, value_name = "PATH")]
        proof: PathBuf,
    },
    /// Run the built-in corpus and report mismatches
    Corpus {
        /// Largest model the oracle searches when confirming refutations
        #[arg(long, default_value_t = 4, value_name = "N")]
        oracle_bound: usize,
        /// Print the corpus as JSON lines instead of running it
        #[arg(long)]
        jsonl: bool,
        #[command(flatten)]
        search: SearchOpts,
    },
    /// Decide every small formula and compare against the semantic oracle
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "p")]
        atoms: Vec<String>,
        #[arg(long, default_value_t = 6, value_name = "N")]
        max_nodes: usize,
        /// Model size the oracle searches for each proved formula
        #[arg(long, default_value_t = 3, value_name = "N")]
        oracle_bound: usize,
        #[command(flatten)]
        search: SearchOpts,
    },
}

/// Failure carrying its exit code.
struct Fail(u8, String);

impl From<SearchError> for Fail {
    fn from(e: SearchError) -> Self {
        Fail(INTERNAL, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decide {
            formula,
            sequent,
            proof_out,
            model_out,
            dot,
            search,
        } => run_decide(formula, sequent, proof_out, model_out, dot, &search.config()),
        Command::Check { proof } => run_check(&proof),
        Command::Corpus {
            oracle_bound,
            jsonl,
            search,
        } => run_corpus(oracle_bound, jsonl, &search.config()),
        Command::Sweep {
            atoms,
            max_nodes,
            oracle_bound,
            search,
        } => run_sweep(&atoms, max_nodes, oracle_bound, &search.config()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, message)) => {
            eprintln!("csprove: {message}");
            ExitCode::from(code)
        }
    }
}

fn write_json(path: &Path, json: Result<String, serde_json::Error>) -> Result<(), Fail> {
    let text = json.map_err(|e| Fail(INTERNAL, e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Fail(USAGE, format!("{}: {e}", path.display())))
}

fn read_sequent(arg: &str) -> Result<Sequent, Fail> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| Fail(USAGE, format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Fail(USAGE, format!("invalid sequent: {e}")))
}

fn parse_formula(text: &str) -> Result<Formula, Fail> {
    parse(text).map_err(|e| Fail(USAGE, e.to_string()))
}

fn run_decide(
    formula: Option<String>,
    sequent: Option<String>,
    proof_out: Option<PathBuf>,
    model_out: Option<PathBuf>,
    dot: bool,
    config: &Config,
) -> Result<u8, Fail> {
    let root = match (formula, sequent) {
        (_, Some(arg)) => read_sequent(&arg)?,
        (Some(text), None) => Sequent::root(Label(0), parse_formula(&text)?),
        (None, None) => return Err(Fail(USAGE, "nothing to decide".into())),
    };
    match decide(&root, config)? {
        Verdict::Proved(graph) => {
            println!("PROVED");
            eprintln!("{} nodes, {} back-edges", graph.len(), graph.back_edges.len());
            if let Some(path) = proof_out {
                write_json(&path, serde_json::to_string_pretty(&graph))?;
            }
            Ok(PROVED)
        }
        Verdict::Refuted { model, leaf, .. } => {
            println!("REFUTED");
            eprintln!("{} worlds, leaf: {leaf}", model.world_count());
            validate_model(&model).map_err(|e| Fail(INTERNAL, format!("extracted model: {e}")))?;
            match (&model_out, dot) {
                (Some(path), _) => {
                    write_json(path, serde_json::to_string_pretty(&model))?;
                    if dot {
                        let dot_path = path.with_extension("dot");
                        fs::write(&dot_path, model.to_dot())
                            .map_err(|e| Fail(USAGE, format!("{}: {e}", dot_path.display())))?;
                    }
                }
                (None, true) => print!("{}", model.to_dot()),
                (None, false) => {}
            }
            Ok(REFUTED)
        }
    }
}

fn run_check(path: &Path) -> Result<u8, Fail> {
    let text = fs::read_to_string(path).map_err(|e| Fail(USAGE, format!("{}: {e}", path.display())))?;
    let graph: ProofGraph =
        serde_json::from_str(&text).map_err(|e| Fail(USAGE, format!("invalid proof graph: {e}")))?;
    match check_proof(&graph) {
        Ok(()) => {
            println!("OK");
            Ok(PROVED)
        }
        Err(e) => {
            println!("REJECTED: {e}");
            Ok(REFUTED)
        }
    }
}

/// Confirms a refutation: the model is a Carlson model and falsifies `f`
/// at the world of `x0`.
fn confirm_refutation(f: &Formula, model: &CarlsonModel, root: Option<csprove_core::WorldId>) -> Result<(), String> {
    validate_model(model).map_err(|e| e.to_string())?;
    let root = root.ok_or("root label has no world")?;
    match forces(model, root, f) {
        Ok(false) => Ok(()),
        Ok(true) => Err("extracted model forces the formula at the root".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn run_corpus(oracle_bound: usize, jsonl: bool, config: &Config) -> Result<u8, Fail> {
    let corpus = standard_corpus();
    if jsonl {
        print!("{}", to_jsonl(&corpus));
        return Ok(PROVED);
    }
    if oracle_bound == 0 {
        return Err(Fail(USAGE, "--oracle-bound must be at least 1".into()));
    }
    let mut mismatches = 0;
    for entry in &corpus {
        let root = Sequent::root(Label(0), entry.formula.clone());
        let problem = match (decide(&root, config)?, entry.expected) {
            (Verdict::Proved(_), Expected::Provable) => None,
            (Verdict::Refuted { model, interpretation, .. }, Expected::Refutable) => {
                confirm_refutation(&entry.formula, &model, interpretation.get(Label(0)))
                    .err()
                    .or_else(|| {
                        refute_semantic(&entry.formula, oracle_bound)
                            .is_none()
                            .then(|| format!("oracle finds no countermodel up to {oracle_bound} worlds"))
                    })
            }
            (Verdict::Proved(_), Expected::Refutable) => Some("proved".into()),
            (Verdict::Refuted { .. }, Expected::Provable) => Some("refuted".into()),
        };
        match problem {
            None => println!("ok       {:<14} {:<9} {}", entry.name, entry.expected, entry.formula),
            Some(why) => {
                mismatches += 1;
                println!("MISMATCH {:<14} {:<9} {}: {why}", entry.name, entry.expected, entry.formula);
            }
        }
    }
    println!("{} entries, {mismatches} mismatches", corpus.len());
    Ok(if mismatches == 0 { PROVED } else { REFUTED })
}

fn run_sweep(atoms: &[String], max_nodes: usize, oracle_bound: usize, config: &Config) -> Result<u8, Fail> {
    for a in atoms {
        Formula::try_atom(a).map_err(|e| Fail(USAGE, format!("--atoms: {e}")))?;
    }
    if oracle_bound == 0 {
        return Err(Fail(USAGE, "--oracle-bound must be at least 1".into()));
    }
    let names: Vec<&str> = atoms.iter().map(String::as_str).collect();
    let formulas = enumerate_formulas(&names, max_nodes);
    let (mut proved, mut refuted, mut mismatches) = (0usize, 0usize, 0usize);
    for f in &formulas {
        let root = Sequent::root(Label(0), f.clone());
        let problem = match decide(&root, config)? {
            Verdict::Proved(g) => {
                proved += 1;
                match (check_proof(&g), refute_semantic(f, oracle_bound)) {
                    (Err(e), _) => Some(format!("proof rejected: {e}")),
                    (Ok(()), Some((_, w))) => Some(format!("proved, but the oracle refutes it at {w:?}")),
                    (Ok(()), None) => None,
                }
            }
            Verdict::Refuted { model, interpretation, .. } => {
                refuted += 1;
                confirm_refutation(f, &model, interpretation.get(Label(0))).err()
            }
        };
        if let Some(why) = problem {
            mismatches += 1;
            eprintln!("mismatch: {f}: {why}");
        }
    }
    println!(
        "{} formulas, {proved} proved, {refuted} refuted, {mismatches} mismatches",
        formulas.len()
    );
    Ok(match (mismatches, refuted) {
        (0, 0) => PROVED,
        (0, _) => REFUTED,
        _ => INTERNAL,
    })
}
