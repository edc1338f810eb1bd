//! The `ctms` command line.
//!
//! Exit codes: 0 on success, 1 when mining finds nothing or a fixture is
//! invalid, 2 on usage, configuration or input errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::corpus::load_fixture;
use crate::eval::GoldAnswer;
use crate::expand::dump_weblists;
use crate::pipeline::{evaluate, mine_with_weblists, render_table, MiningReport, PipelineConfig};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_EMPTY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ctms", version, about = "Mine coordinate terms of a seed term")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mine coordinate terms for one seed from a fixture corpus.
    Mine {
        seed: String,
        /// Fixture directory or manifest file.
        #[arg(long)]
        corpus: PathBuf,
        /// Pipeline configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Rank all web lists as one concept.
        #[arg(long)]
        no_disambiguation: bool,
        /// Write the extracted web lists as JSON lines.
        #[arg(long, value_name = "PATH")]
        dump_weblists: Option<PathBuf>,
        /// Report output (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a mining report against gold lists.
    Eval {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Cut-offs for P@n.
        #[arg(long, value_delimiter = ',', default_value = "5,10")]
        at: Vec<usize>,
        /// Also write the table here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a fixture corpus for structural problems.
    FixtureValidate { path: PathBuf },
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn run_mine(
    seed: &str,
    corpus: &Path,
    config: &Path,
    no_disambiguation: bool,
    dump: Option<&Path>,
    out: &Path,
) -> Result<MiningReport> {
    let mut cfg = PipelineConfig::load(config)?;
    if no_disambiguation {
        cfg.disambiguation = false;
    }
    let provider = load_fixture(corpus)?;
    let (report, lists) = mine_with_weblists(seed, &cfg, &provider)?;
    if let Some(path) = dump {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        dump_weblists(&lists, BufWriter::new(f))?;
    }
    write_file(out, &report.to_json()?)?;
    Ok(report)
}

fn run_eval(report: &Path, gold: &Path, at: &[usize], out: Option<&Path>) -> Result<String> {
    let report = MiningReport::load(report)?;
    let gold = GoldAnswer::load(gold)?;
    let table = render_table(&evaluate(&report, &gold, at)?);
    if let Some(path) = out {
        write_file(path, &table)?;
    }
    Ok(table)
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Mine {
            seed,
            corpus,
            config,
            no_disambiguation,
            dump_weblists,
            out,
        } => match run_mine(
            &seed,
            &corpus,
            &config,
            no_disambiguation,
            dump_weblists.as_deref(),
            &out,
        ) {
            Ok(report) if report.is_empty() => {
                let why = report
                    .diagnostics
                    .stage_failure
                    .as_deref()
                    .unwrap_or("no terms ranked");
                eprintln!("ctms: nothing found for {seed:?}: {why}");
                EXIT_EMPTY
            }
            Ok(report) => {
                let terms: usize = report.concepts.iter().map(|c| c.terms.len()).sum();
                eprintln!(
                    "ctms: {} concept(s), {terms} term(s) written to {}",
                    report.concepts.len(),
                    out.display()
                );
                EXIT_OK
            }
            Err(e) => {
                eprintln!("ctms: {e}");
                EXIT_USAGE
            }
        },
        Command::Eval {
            report,
            gold,
            at,
            out,
        } => match run_eval(&report, &gold, &at, out.as_deref()) {
            Ok(table) => {
                print!("{table}");
                EXIT_OK
            }
            Err(e) => {
                eprintln!("ctms: {e}");
                EXIT_USAGE
            }
        },
        Command::FixtureValidate { path } => {
            match load_fixture(&path).and_then(|c| c.validate().map(|_| c)) {
                Ok(c) => {
                    println!("ok: {} queries, {} pages", c.query_count(), c.page_count());
                    EXIT_OK
                }
                Err(e @ (Error::Io { .. } | Error::Json(_))) => {
                    eprintln!("ctms: {e}");
                    EXIT_USAGE
                }
                Err(e) => {
                    eprintln!("ctms: invalid fixture: {e}");
                    EXIT_EMPTY
                }
            }
        }
    }
}
