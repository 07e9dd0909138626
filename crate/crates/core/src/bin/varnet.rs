//! Command line interface: compute expected values, verify axioms, compare
//! the two trade formation regimes, and emit example problem files.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use varnet::axioms::{self, AXIOM_TOL};
use varnet::io::{self, ComputeOptions};
use varnet::{Error, VariableGame};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_SIZE_CAP: u8 = 3;

#[derive(Parser)]
#[command(author, version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Expected wealth, Expected Myerson and Position values, and a
    /// per-network breakdown
    Compute {
        /// Problem file (JSON)
        problem: PathBuf,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Tolerance for the axiom section of the report
        #[arg(long, default_value_t = AXIOM_TOL)]
        tol: f64,
        /// Leave out the axiom checks
        #[arg(long)]
        no_axioms: bool,
    },
    /// Check both expected values against the five axioms
    Verify {
        /// Problem file (JSON); omit to only run the random corpus
        problem: Option<PathBuf>,
        #[arg(long, default_value_t = AXIOM_TOL)]
        tol: f64,
        /// Also check a random corpus of this many component additive games
        #[arg(long)]
        corpus: Option<usize>,
        /// Seed for the random corpus and the Shapley property suite
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest player count in the random corpus
        #[arg(long, default_value_t = 4)]
        max_players: usize,
        /// Largest support size in the random corpus
        #[arg(long, default_value_t = 8)]
        max_support: usize,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Compare independent and institutional formation in the trade example
    Compare {
        /// Comma separated values used for both p and q
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.5,0.7,0.9")]
        grid: Vec<f64>,
        /// Overrides --grid for p
        #[arg(long, value_delimiter = ',')]
        p_grid: Option<Vec<f64>>,
        /// Overrides --grid for q
        #[arg(long, value_delimiter = ',')]
        q_grid: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Print the trade example as a problem file
    Example {
        /// Probability of the seller-buyer link
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Probability of each link to the intermediary
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        /// Only networks in which the intermediary is linked can form
        #[arg(long)]
        institutional: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    match run(cli.command, &mut out) {
        Ok(code) => {
            let mut stdout = std::io::stdout().lock();
            match stdout
                .write_all(out.as_bytes())
                .and_then(|()| stdout.flush())
            {
                Ok(()) => ExitCode::from(code),
                // A closed pipe (e.g. `varnet ... | head`) is not an error.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::from(code),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_INPUT)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_size_cap() {
                EXIT_SIZE_CAP
            } else {
                EXIT_INPUT
            })
        }
    }
}

fn load(path: &PathBuf) -> Result<VariableGame, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    io::parse_problem(&text)
}

fn push_json<T: Serialize>(out: &mut String, value: &T) {
    out.push_str(&serde_json::to_string_pretty(value).expect("reports serialize"));
    out.push('\n');
}

#[derive(Serialize)]
struct VerifyOutput {
    problem: Option<io::VerifyReport>,
    corpus: Option<Vec<axioms::SuiteLine>>,
    shapley: Vec<axioms::AxiomReport>,
}

fn run(command: Command, out: &mut String) -> Result<u8, Error> {
    match command {
        Command::Compute {
            problem,
            format,
            tol,
            no_axioms,
        } => {
            let problem = load(&problem)?;
            let report = io::run_compute(
                &problem,
                &ComputeOptions {
                    tol,
                    with_axioms: !no_axioms,
                },
            )?;
            match format {
                Format::Json => push_json(out, &report),
                Format::Table => out.push_str(&io::render_compute_table(&report)),
            }
            Ok(0)
        }
        Command::Verify {
            problem,
            tol,
            corpus,
            seed,
            max_players,
            max_support,
            format,
        } => {
            if problem.is_none() && corpus.is_none() {
                return Err(Error::Parse(
                    "verify needs a problem file, --corpus, or both".into(),
                ));
            }
            let problem_report = problem
                .map(|path| io::run_verify(&load(&path)?, tol))
                .transpose()?;
            let suite = corpus
                .map(|count| {
                    let games = axioms::generate_corpus(seed, count, max_players, max_support)?;
                    axioms::run_suite(&games, tol)
                })
                .transpose()?;
            let shapley = if suite.is_some() {
                axioms::check_shapley_axioms(tol, seed, 50)
            } else {
                Vec::new()
            };

            let ok = problem_report
                .as_ref()
                .is_none_or(|r| r.all_expected_pass())
                && suite
                    .as_ref()
                    .is_none_or(|lines| lines.iter().all(|l| l.as_expected()))
                && shapley.iter().all(|r| r.passed);

            let output = VerifyOutput {
                problem: problem_report,
                corpus: suite,
                shapley,
            };
            match format {
                Format::Json => push_json(out, &output),
                Format::Table => push_verify(out, &output),
            }
            Ok(if ok { 0 } else { EXIT_VERIFY_FAILED })
        }
        Command::Compare {
            grid,
            p_grid,
            q_grid,
            format,
        } => {
            let p_grid = p_grid.unwrap_or_else(|| grid.clone());
            let q_grid = q_grid.unwrap_or(grid);
            let rows = io::run_compare(&p_grid, &q_grid)?;
            match format {
                Format::Json => push_json(out, &rows),
                Format::Table => out.push_str(&io::render_compare_table(&rows)),
            }
            let ok = rows.iter().all(|r| r.myerson_dominance && r.signs_agree);
            Ok(if ok { 0 } else { EXIT_VERIFY_FAILED })
        }
        Command::Example {
            p,
            q,
            institutional,
        } => {
            out.push_str(&io::trade_problem_file(p, q, institutional)?.to_json());
            out.push('\n');
            Ok(0)
        }
    }
}

fn push_verify(out: &mut String, output: &VerifyOutput) {
    if let Some(report) = &output.problem {
        out.push_str(&io::render_verify_table(report));
    }
    let Some(lines) = &output.corpus else { return };
    if output.problem.is_some() {
        out.push('\n');
    }
    out.push_str("random corpus:\n");
    for line in lines {
        let status = if line.as_expected() {
            "ok"
        } else {
            "UNEXPECTED"
        };
        let _ = write!(
            out,
            "  {:<24} {:<28} expected {:<3} failures {}/{} {}",
            line.rule.name(),
            line.axiom.name(),
            if line.expected_to_pass { "yes" } else { "no" },
            line.failures,
            line.checked,
            status
        );
        if let Some((idx, w)) = &line.first_failure {
            let _ = write!(
                out,
                " (first: instance {idx}, {}, gap {})",
                w.instance,
                io::fmt_num(w.gap)
            );
        }
        out.push('\n');
    }
    out.push_str("Shapley value properties:\n");
    for r in &output.shapley {
        let _ = writeln!(out, "  {}", io::render_report(r));
    }
}
