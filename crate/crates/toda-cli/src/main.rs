//! `toda`: expression evaluation, group lookup, bracket analysis, H-formula
//! evaluation, database validation, and a derivation-script runner over the
//! bundled 2-local database.
//!
//! Exit codes: 0 success, 1 data or parse error, 2 mathematical
//! precondition failure.

use toda_cli::script;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use toda::bracket::{
    check_well_defined, compare_indeterminacy_routes, indeterminacy, indeterminacy_full_traced,
    parse_spec,
};
use toda::db::{load_database, Database};
use toda::ehp::h_formula;
use toda::error::Error;
use toda::group::Target;
use toda::normalize::{Normalizer, Trace};
use toda::term::parse_sum;
use toda::validate::{validate_database, Severity};

const BUNDLED_DB: &str = include_str!("../../../data/toda2.db");
const DB_ENV: &str = "TODA_DB";

#[derive(Parser)]
#[command(name = "toda", version, about = "symbolic 2-local homotopy of spheres")]
struct Cli {
    /// Database path (falls back to $TODA_DB, then the bundled tables).
    #[arg(long, global = true)]
    db: Option<String>,
    /// Show the rewrite trace behind each answer.
    #[arg(long, global = true)]
    verbose: bool,
    /// One machine-readable record per line, stable field order.
    #[arg(long, global = true)]
    machine: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize a chain expression to an element of its group.
    Eval { expr: String },
    /// Print a stored or derived group presentation, e.g. `group 33 S14vS20`.
    Group { degree: u32, target: String },
    /// Analyze a bracket literal `{ [row] ; [matrix] ; [column] }_n`.
    Bracket {
        spec: String,
        #[command(flatten)]
        mode: BracketMode,
    },
    /// Run a derivation script, one statement per line.
    Run {
        path: String,
        /// Keep executing after a failed step.
        #[arg(long)]
        keep_going: bool,
    },
    /// Validate the database: exactness, orders, degree consistency.
    Checkdb,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct BracketMode {
    /// Check well-definedness (both composites vanish).
    #[arg(long)]
    check: bool,
    /// Indeterminacy by the summand-wise formula (needs index n >= 1).
    #[arg(long)]
    ind: bool,
    /// Indeterminacy by the full computation from the definition.
    #[arg(long)]
    ind_full: bool,
    /// The generalized H-formula (needs index n >= 1).
    #[arg(long)]
    hformula: bool,
    /// Evaluate both indeterminacy routes and report containment.
    #[arg(long)]
    compare_routes: bool,
}

fn resolve_db(cli: &Cli) -> Result<Database, Error> {
    let text = match &cli.db {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::Parse {
            line: 0,
            col: 0,
            msg: format!("cannot read database `{path}`: {e}"),
        })?,
        None => match std::env::var(DB_ENV) {
            Ok(path) => std::fs::read_to_string(&path).map_err(|e| Error::Parse {
                line: 0,
                col: 0,
                msg: format!("cannot read database `{path}` (from ${DB_ENV}): {e}"),
            })?,
            Err(_) => BUNDLED_DB.to_string(),
        },
    };
    load_database(&text)
}

fn exit_for(e: &Error) -> ExitCode {
    if e.is_math_precondition() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn print_trace(trace: &Trace, verbose: bool) {
    if !verbose {
        return;
    }
    for step in &trace.steps {
        println!("  via {} [{}]", step.rule, step.citation);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let db = match resolve_db(&cli) {
        Ok(db) => db,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_for(&e);
        }
    };
    let result = dispatch(&cli, &db);
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_for(&e)
        }
    }
}

fn dispatch(cli: &Cli, db: &Database) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Eval { expr } => {
            let terms = parse_sum(expr, db)?;
            let mut trace = Trace::default();
            let elem = Normalizer::new(db).normalize_sum(terms, &mut trace)?;
            let cites: Vec<String> = trace.steps.iter().map(|s| s.citation.clone()).collect();
            if cli.machine {
                println!(
                    "result kind=eval expr={expr} value={elem} group={} shape={} citations={}",
                    elem.group.name(),
                    elem.group.shape().replace(' ', ""),
                    cites.join(";")
                );
            } else {
                println!(
                    "{elem} in {} (shape {})",
                    elem.group.name(),
                    elem.group.shape()
                );
                // Every applied relation is cited, verbose or not.
                let rel_cites: Vec<String> = trace
                    .relations_used()
                    .iter()
                    .map(|s| s.citation.clone())
                    .collect();
                if !rel_cites.is_empty() && !cli.verbose {
                    println!("  [via {}]", rel_cites.join("; "));
                }
                print_trace(&trace, cli.verbose);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Group { degree, target } => {
            let target = parse_target(target)?;
            let g = toda::lookup_group(db, *degree, &target)?;
            if cli.machine {
                let basis: Vec<String> = g
                    .basis
                    .iter()
                    .map(|b| format!("{}:{}", b.label, b.order))
                    .collect();
                println!(
                    "result kind=group group={} shape={} basis={} citation={}",
                    g.name(),
                    g.shape().replace(' ', ""),
                    basis.join(","),
                    g.citation
                );
            } else {
                println!("{} = {}", g.name(), g.shape());
                for b in &g.basis {
                    println!("  {} of order {}", b.label, b.order);
                }
                if !g.citation.is_empty() {
                    println!("  [{}]", g.citation);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bracket { spec, mode } => bracket_command(cli, db, spec, mode),
        Command::Run { path, keep_going } => {
            let source = std::fs::read_to_string(path).map_err(|e| Error::Parse {
                line: 0,
                col: 0,
                msg: format!("cannot read script `{path}`: {e}"),
            })?;
            let parsed = script::parse_script(&source)?;
            let mut runner = script::Runner::new(db);
            let report = runner.run(&parsed, *keep_going);
            for outcome in &report.outcomes {
                let tag = if outcome.passed { "ok" } else { "FAIL" };
                if cli.machine {
                    println!(
                        "step line={} status={tag} text={}",
                        outcome.line, outcome.text
                    );
                } else {
                    println!("[{tag}] {}", outcome.text);
                }
            }
            println!("{}", report.summary());
            if report.all_passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Checkdb => {
            let report = validate_database(db);
            for f in &report.findings {
                match f.severity {
                    Severity::Failure => println!("{f}"),
                    Severity::Skipped | Severity::Info => {
                        if cli.verbose {
                            println!("{f}");
                        }
                    }
                }
            }
            if report.passes() {
                println!(
                    "database valid: {} findings, no failures",
                    report.findings.len()
                );
                Ok(ExitCode::SUCCESS)
            } else {
                println!("database INVALID: {} failures", report.failures().count());
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn bracket_command(
    cli: &Cli,
    db: &Database,
    spec_lit: &str,
    mode: &BracketMode,
) -> Result<ExitCode, Error> {
    let spec = parse_spec(spec_lit, db)?;
    if mode.check {
        let report = check_well_defined(&spec, db)?;
        let ok = report.is_well_defined();
        if cli.machine {
            println!(
                "result kind=check spec={} well_defined={}",
                spec.render().replace(' ', ""),
                ok
            );
        } else {
            for (label, zero) in report.ab_entries.iter().chain(&report.bc_entries) {
                println!("  {} {}", if *zero { "O:" } else { "nonzero:" }, label);
            }
            print_trace(&report.trace, cli.verbose);
            println!(
                "{}",
                if ok {
                    "well-defined"
                } else {
                    "NOT well-defined"
                }
            );
        }
        Ok(if ok {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(2)
        })
    } else if mode.ind {
        let sub = indeterminacy(&spec, db)?;
        if cli.machine {
            println!(
                "result kind=ind n={} value={} order={} ambient={}",
                spec.n,
                sub.render().replace(' ', ""),
                toda::bracket::render_order(sub.order()),
                sub.ambient.name()
            );
        } else {
            println!(
                "Ind = {} of order {} in {}",
                sub.render(),
                toda::bracket::render_order(sub.order()),
                sub.ambient.name()
            );
        }
        Ok(ExitCode::SUCCESS)
    } else if mode.ind_full {
        let mut trace = Trace::default();
        let sub = indeterminacy_full_traced(&spec, db, &mut trace)?;
        if cli.machine {
            println!(
                "result kind=ind-full n={} value={} order={} ambient={}",
                spec.n,
                sub.render().replace(' ', ""),
                toda::bracket::render_order(sub.order()),
                sub.ambient.name()
            );
        } else {
            println!(
                "Ind (full computation at n = {}) = {} of order {} in {}",
                spec.n,
                sub.render(),
                toda::bracket::render_order(sub.order()),
                sub.ambient.name()
            );
            print_trace(&trace, cli.verbose);
        }
        Ok(ExitCode::SUCCESS)
    } else if mode.hformula {
        let result = h_formula(db, &spec)?;
        if cli.machine {
            println!(
                "result kind=hformula value={}",
                result.value.render().replace(' ', "")
            );
        } else {
            println!("H = {}", result.value.render());
            for col in &result.columns {
                println!("  {}: {}", col.label, col.how);
            }
            print_trace(&result.trace, cli.verbose);
        }
        Ok(ExitCode::SUCCESS)
    } else if mode.compare_routes {
        let cmp = compare_indeterminacy_routes(&spec, db)?;
        let verdict = if cmp.equal {
            "agree"
        } else if cmp.formula_is_proper_subgroup {
            "formula-strictly-smaller"
        } else {
            "disagree"
        };
        if cli.machine {
            println!(
                "result kind=compare full_order={} formula_order={} verdict={verdict}",
                toda::bracket::render_order(cmp.full.order()),
                toda::bracket::render_order(cmp.formula.order()),
            );
        } else {
            println!(
                "full: {} (order {})",
                cmp.full.render(),
                toda::bracket::render_order(cmp.full.order())
            );
            println!(
                "formula: {} (order {})",
                cmp.formula.render(),
                toda::bracket::render_order(cmp.formula.order())
            );
            match verdict {
                "agree" => println!("the two routes agree"),
                "formula-strictly-smaller" => println!(
                    "the formula value is a proper subgroup: the bracket is not a coset of it"
                ),
                _ => println!("the two routes disagree"),
            }
        }
        Ok(ExitCode::SUCCESS)
    } else {
        unreachable!("clap enforces one mode")
    }
}

fn parse_target(s: &str) -> Result<Target, Error> {
    let parts: Vec<&str> = s.split('v').collect();
    let mut dims = Vec::new();
    for p in &parts {
        let p = p.trim();
        let digits = p.strip_prefix('S').unwrap_or(p).trim_start_matches('^');
        let d: u32 = digits.parse().map_err(|_| Error::Parse {
            line: 0,
            col: 0,
            msg: format!("bad target `{s}` (use S13 or S14vS20)"),
        })?;
        dims.push(d);
    }
    if dims.len() == 1 {
        Ok(Target::Sphere(dims[0]))
    } else {
        Ok(Target::Wedge(dims))
    }
}
