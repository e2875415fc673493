mod dot;
mod report;

/// `println!` that exits quietly when stdout has gone away, for example when
/// piped into `head`.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        if writeln!(std::io::stdout().lock(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use finhors::{
    decide_finiteness, elaborate, enumerate_language, parse_program, root_goal, search_derivations, Budget, Decision,
    Derivation, Elaborated, FinitenessError, LanguageSample, Program, SearchConfig,
};

use report::{Answer, OracleSummary, RunReport};

const INPUT_ERROR: u8 = 2;
const ORACLE_MISMATCH: u8 = 4;

/// How many derivations are scanned for the largest counter when a finite
/// answer is exported as a graph.
const EXPORT_SCAN: usize = 1_000;

#[derive(Parser)]
#[command(name = "finhors", version, about = "Decide whether a recursion scheme generates finitely many trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and sort-check a program, then print its sorts and complexity.
    Check { file: PathBuf },
    /// Decide whether the language of a program is finite.
    Decide(DecideArgs),
    /// Enumerate small trees of the language by brute-force reduction.
    Oracle {
        file: PathBuf,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Print every tree found.
        #[arg(long)]
        print_trees: bool,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct BudgetArgs {
    /// Largest tree size to enumerate.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    max_size: u64,
    /// β-steps allowed along one exploration path.
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: u64,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget::new(self.max_size as usize, self.max_steps)
    }
}

#[derive(Args)]
struct DecideArgs {
    file: PathBuf,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Write the pumped derivation, or one with the largest counter found, as DOT.
    #[arg(long, value_name = "PATH")]
    emit_derivation: Option<PathBuf>,
    /// Type variables with every full type of their sort and fail rather than truncate.
    #[arg(long)]
    exhaustive: bool,
    /// How often one judgment class may repeat on a branch.
    #[arg(long, default_value_t = 3)]
    branch_cap: usize,
    #[arg(long)]
    max_derivation_nodes: Option<usize>,
    /// Largest number of judgment classes generated before giving up.
    #[arg(long)]
    max_classes: Option<usize>,
    /// Also run the brute-force oracle and compare.
    #[arg(long)]
    oracle: bool,
    #[command(flatten)]
    budget: BudgetArgs,
}

struct InputError(String);

fn load(path: &Path) -> Result<(Program, Elaborated), InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let program = parse_program(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let el = elaborate(&program);
    el.store
        .check_sorts(el.root)
        .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    Ok((program, el))
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

fn check(file: &Path) -> Result<u8, InputError> {
    let (program, el) = load(file)?;
    for nt in &program.nonterminals {
        out!("{} : {}", nt.name, nt.sort);
    }
    out!("start : {}", el.store.sort(el.root));
    out!("complexity: {}", el.store.complexity(el.root));
    Ok(0)
}

fn oracle(file: &Path, budget: Budget, print_trees: bool, json: bool) -> Result<u8, InputError> {
    let (_, mut el) = load(file)?;
    let sample = enumerate_language(&mut el.store, el.root, budget);
    if json {
        out!("{}", serde_json::to_string_pretty(&OracleSummary::from(&sample)).expect("serialisable"));
    } else {
        print_sample(&sample);
        if print_trees {
            for t in &sample.trees {
                out!("{t}");
            }
        }
    }
    Ok(0)
}

fn print_sample(sample: &LanguageSample) {
    let sizes: Vec<String> = sample.sizes().iter().map(usize::to_string).collect();
    out!("sizes: {{{}}}", sizes.join(", "));
    out!("trees: {}", sample.trees.len());
    out!("complete: {}", sample.complete);
}

/// The derivation to export for a finite answer: the one with the largest
/// counter among the first few the search yields.
fn largest_counter_derivation(el: &Elaborated, config: &SearchConfig) -> Option<Derivation> {
    let goal = root_goal(&el.store, el.root);
    search_derivations(&el.store, &goal, config)
        .ok()?
        .take(EXPORT_SCAN)
        .last()
}

fn decide(args: &DecideArgs) -> Result<u8, InputError> {
    let parse_start = Instant::now();
    let (_, mut el) = load(&args.file)?;
    let parse_ms = millis(parse_start);
    let complexity = el.store.complexity(el.root);
    let mut config = SearchConfig {
        branch_occurrence_cap: args.branch_cap,
        exhaustive: args.exhaustive,
        ..SearchConfig::default()
    };
    if let Some(n) = args.max_derivation_nodes {
        config.max_derivation_nodes = n;
    }
    if let Some(n) = args.max_classes {
        config.max_classes = n;
    }

    let decide_start = Instant::now();
    let decision = match decide_finiteness(&el.store, el.root, &config) {
        Ok(d) => d,
        Err(FinitenessError::ResourceLimit(reason)) => {
            let mut report = RunReport::inconclusive(complexity, reason);
            report.timings.insert("parse".into(), parse_ms);
            return finish(args, report, None, &el);
        }
        Err(e) => return Err(InputError(e.to_string())),
    };
    let decide_ms = millis(decide_start);
    let mut report = RunReport::from_decision(complexity, &decision);
    report.timings.insert("parse".into(), parse_ms);
    report.timings.insert("decide".into(), decide_ms);

    let mut mismatch = None;
    if args.oracle {
        let start = Instant::now();
        let sample = enumerate_language(&mut el.store, el.root, args.budget.budget());
        report.timings.insert("oracle".into(), millis(start));
        mismatch = report.contradicted_by(&sample);
        report.oracle = Some(OracleSummary::from(&sample));
    }

    let derivation = match decision {
        Decision::Infinite { derivation, .. } => Some(derivation),
        Decision::Finite {
            root_derivable: true, ..
        } if args.emit_derivation.is_some() => largest_counter_derivation(&el, &config),
        _ => None,
    };
    let code = finish(args, report, derivation.as_ref(), &el)?;
    if let Some(why) = mismatch {
        eprintln!("oracle mismatch: {why}");
        return Ok(ORACLE_MISMATCH);
    }
    Ok(code)
}

fn finish(args: &DecideArgs, report: RunReport, derivation: Option<&Derivation>, el: &Elaborated) -> Result<u8, InputError> {
    if let Some(path) = &args.emit_derivation {
        let text = match derivation {
            Some(d) => dot::derivation_to_dot(&el.store, d),
            None => "digraph derivation {\n}\n".to_string(),
        };
        std::fs::write(path, text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    }
    if args.json {
        out!("{}", serde_json::to_string_pretty(&report).expect("serialisable"));
    } else {
        print_report(&report);
    }
    Ok(report.answer.exit_code())
}

fn print_report(report: &RunReport) {
    let answer = match report.answer {
        Answer::Finite => "finite",
        Answer::Infinite => "infinite",
        Answer::Inconclusive => "inconclusive",
    };
    out!("answer: {answer}");
    out!("complexity: {}", report.complexity);
    out!("root derivable: {}", report.root_derivable);
    if let Some(c) = report.max_counter {
        out!("max counter: {c}");
    }
    if let Some(p) = &report.pump {
        out!(
            "pump: {} at counters {} and {}",
            p.fulltype, p.ancestor_counter, p.descendant_counter
        );
    }
    if let Some(reason) = &report.reason {
        out!("reason: {reason}");
    }
    if let Some(o) = &report.oracle {
        let sizes: Vec<String> = o.sizes.iter().map(usize::to_string).collect();
        out!("oracle sizes: {{{}}} (complete: {})", sizes.join(", "), o.complete);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Check { file } => check(file),
        Command::Decide(args) => decide(args),
        Command::Oracle {
            file,
            budget,
            print_trees,
            json,
        } => oracle(file, budget.budget(), *print_trees, *json),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
