use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use ceamp::formula::{brute_force_sat, normalize, parse_dimacs, Assignment, Formula};
use ceamp::io::{edits_from_json, edits_to_json, instance_from_json, instance_to_dot, instance_to_json};
use ceamp::reduction::{instance_stats, reduce, Instance};
use ceamp::solver::{brute_force_partition_solve, solve_zero_excess, SolveOutcome};
use ceamp::transform::{decode_assignment, encode_solution};
use ceamp::verifier::{verify_instance, verify_solution};

#[derive(Parser)]
#[command(name = "ceamp", version, about = "Cluster Editing above a P3 packing: reduction workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a DIMACS CNF into an instance (normalizing it first if needed)
    Reduce {
        cnf: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write a Graphviz rendering
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Print instance statistics as JSON
        #[arg(long)]
        stats: bool,
    },
    /// Check an instance, and optionally a solution, printing a JSON report
    Verify {
        instance: PathBuf,
        #[arg(long)]
        solution: Option<PathBuf>,
    },
    /// Turn a satisfying assignment into a zero-excess edit set
    Encode {
        instance: PathBuf,
        assignment: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Read the assignment off a zero-excess edit set ("-" reads stdin)
    Decode { instance: PathBuf, edits: PathBuf },
    /// Decide whether a zero-excess edit set exists; prints it if so
    Solve {
        instance: PathBuf,
        /// Give up after this many seconds
        #[arg(long, value_name = "SECONDS")]
        time_limit: Option<f64>,
        /// Use the brute-force partition enumeration instead
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Brute-force satisfiability of a DIMACS CNF
    Sat { cnf: PathBuf },
    /// Print the normalized form of a DIMACS CNF
    Normalize { cnf: PathBuf },
}

enum Failure {
    /// Exit 1: a check failed or no solution exists.
    Negative(String),
    /// Exit 2: unreadable or malformed input.
    Input(String),
    /// Exit 3.
    Timeout,
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::Input(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_output(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn print(text: &str) -> Result<(), Failure> {
    io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn read_cnf(path: &Path) -> Result<Formula, Failure> {
    Ok(parse_dimacs(&read_input(path)?)?)
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    Ok(instance_from_json(&read_input(path)?)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Reduce { cnf, output, dot, stats } => {
            let mut f = read_cnf(&cnf)?;
            if !f.is_conforming() {
                f = normalize(&f)?;
                eprintln!("input normalized to {} variables and {} clauses", f.variable_count, f.clauses.len());
            }
            let inst = reduce(&f)?;
            write_output(&output, &instance_to_json(&inst))?;
            if let Some(dot) = dot {
                write_output(&dot, &instance_to_dot(&inst))?;
            }
            if stats {
                let mut s = serde_json::to_string_pretty(&instance_stats(&inst))?;
                s.push('\n');
                print(&s)?;
            }
        }
        Command::Verify { instance, solution } => {
            let inst = read_instance(&instance)?;
            let mut report = verify_instance(&inst);
            if let Some(path) = solution {
                report.extend(verify_solution(&inst, &edits_from_json(&read_input(&path)?)?));
            }
            print(&report.to_json())?;
            if !report.passed() {
                return Err(Failure::Negative(format!("failing checks: {}", report.failures().join(", "))));
            }
        }
        Command::Encode { instance, assignment, output } => {
            let inst = read_instance(&instance)?;
            let a = Assignment::parse_text(&read_input(&assignment)?)?;
            let s = encode_solution(&inst, &a).map_err(|e| Failure::Negative(e.to_string()))?;
            match output {
                Some(path) => write_output(&path, &edits_to_json(&s))?,
                None => print(&edits_to_json(&s))?,
            }
        }
        Command::Decode { instance, edits } => {
            let inst = read_instance(&instance)?;
            let s = edits_from_json(&read_input(&edits)?)?;
            let a = decode_assignment(&inst, &s).map_err(|e| Failure::Negative(e.to_string()))?;
            print(&a.to_text())?;
        }
        Command::Solve { instance, time_limit, oracle, threads } => {
            let inst = read_instance(&instance)?;
            let outcome = if oracle {
                match brute_force_partition_solve(&inst.graph, &inst.packing)? {
                    Some(s) => SolveOutcome::Feasible(s),
                    None => SolveOutcome::Infeasible,
                }
            } else {
                let limit = match time_limit {
                    Some(t) if !(t.is_finite() && t >= 0.0) => return Err(Failure::Input(format!("bad time limit {t}"))),
                    t => t.map(Duration::from_secs_f64),
                };
                solve_zero_excess(&inst, limit, threads.max(1))?
            };
            match outcome {
                SolveOutcome::Feasible(s) => print(&edits_to_json(&s))?,
                SolveOutcome::Infeasible => return Err(Failure::Negative("infeasible".into())),
                SolveOutcome::Timeout => return Err(Failure::Timeout),
            }
        }
        Command::Sat { cnf } => match brute_force_sat(&read_cnf(&cnf)?)? {
            Some(a) => print(&a.to_text())?,
            None => return Err(Failure::Negative("unsatisfiable".into())),
        },
        Command::Normalize { cnf } => print(&normalize(&read_cnf(&cnf)?)?.to_dimacs())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Timeout) => {
            eprintln!("time limit exceeded");
            ExitCode::from(3)
        }
    }
}
