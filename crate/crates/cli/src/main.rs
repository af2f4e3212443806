//! `tabling`: load programs, run queries, run the built-in benchmarks.

use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use tabling::bench::{self, BenchReport};
use tabling::{parse_program, Engine, Error, Query, Stats};

#[derive(Parser, Debug)]
#[command(name = "tabling", version, about = "A tabled logic-programming engine")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    /// Print table statistics to standard error.
    #[arg(long, global = true)]
    stats: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Program file to load; may be repeated.
    #[arg(short = 'p', long = "program", value_name = "FILE")]
    programs: Vec<PathBuf>,
    /// Query to run, e.g. "p(X,Y)."; without it a REPL reads queries from stdin.
    #[arg(short = 'q', long)]
    query: Option<String>,
    /// Enumerate all answers (the default).
    #[arg(long)]
    all: bool,
    /// Stop after this many answers.
    #[arg(long, value_name = "N")]
    limit: Option<usize>,
    /// Print answers in lexicographic order.
    #[arg(long)]
    sorted: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a built-in benchmark and print its report.
    Bench {
        /// One of: fib, recognize, nreverse, shuttle, pingpong, path_double_first,
        /// path_right_last_pyramid, path_right_last_btree, large_join.
        name: String,
        size: u64,
        /// Emit the report as one JSON object.
        #[arg(long)]
        json: bool,
    },
}

enum Outcome {
    Answers,
    NoAnswers,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Some(Command::Bench { name, size, json }) => run_bench(name, *size, *json, cli.stats),
        None => run(&cli.run, cli.stats),
    };
    match result {
        Ok(Outcome::Answers) => ExitCode::SUCCESS,
        Ok(Outcome::NoAnswers) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn load(paths: &[PathBuf]) -> Result<Engine, String> {
    let mut engine = Engine::default();
    for path in paths {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let program = parse_program(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        engine.load(program);
    }
    Ok(engine)
}

fn run(args: &RunArgs, stats: bool) -> Result<Outcome, String> {
    let mut engine = load(&args.programs)?;
    match &args.query {
        Some(text) => {
            let mut out = io::stdout().lock();
            let outcome = answer(&mut engine, text, args, &mut out).map_err(|e| e.to_string())?;
            if stats {
                print_stats(&engine.stats());
            }
            Ok(outcome)
        }
        None => repl(&mut engine, args, stats),
    }
}

/// Runs one query and prints its answers, one per line.
fn answer(engine: &mut Engine, text: &str, args: &RunArgs, out: &mut impl Write) -> Result<Outcome, Error> {
    let query = Query::parse(text)?;
    let limit = if args.all { None } else { args.limit };
    let mut lines = Vec::new();
    for bindings in engine.solve(&query) {
        if limit.is_some_and(|n| lines.len() >= n) {
            break;
        }
        let bindings = bindings?;
        lines.push(if bindings.to_strings().is_empty() { "true.".to_owned() } else { bindings.to_string() });
    }
    if args.sorted {
        lines.sort();
    }
    let write = |out: &mut dyn Write, line: &str| -> Result<(), Error> {
        writeln!(out, "{line}").map_err(|e| tabling::EngineError::Output(e).into())
    };
    if lines.is_empty() {
        write(out, "false.")?;
        return Ok(Outcome::NoAnswers);
    }
    for line in &lines {
        write(out, line)?;
    }
    Ok(Outcome::Answers)
}

/// Reads one query per line. `abolish_all_tables.` clears the tables and
/// `halt.` (or end of input) leaves.
fn repl(engine: &mut Engine, args: &RunArgs, stats: bool) -> Result<Outcome, String> {
    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    for line in stdin.lock().lines() {
        let line = line.map_err(|e| e.to_string())?;
        let text = line.trim();
        match text {
            "" => continue,
            "halt." | "halt" => break,
            "abolish_all_tables." | "abolish_all_tables" => {
                engine.abolish_all_tables();
                let _ = writeln!(out, "true.");
                continue;
            }
            _ => {}
        }
        if let Err(e) = answer(engine, text, args, &mut out) {
            let _ = writeln!(out, "error: {e}");
        }
        if stats {
            print_stats(&engine.stats());
        }
    }
    Ok(Outcome::Answers)
}

fn print_stats(s: &Stats) {
    eprintln!(
        "tables: {}, answers: {}, deps: {}, workers: {}, suspensions: {}, resumptions: {}, resolutions: {}",
        s.tables_created,
        s.answers_stored,
        s.dependencies_stored,
        s.worker_invocations,
        s.suspensions,
        s.resumptions,
        s.resolutions
    );
}

fn run_bench(name: &str, size: u64, as_json: bool, stats: bool) -> Result<Outcome, String> {
    let report = bench::run_bench(name, size).map_err(|e| e.to_string())?;
    if as_json {
        println!("{}", report_json(&report));
    } else {
        print_report(&report);
    }
    if stats {
        print_stats(&report.stats);
    }
    Ok(Outcome::Answers)
}

fn report_json(r: &BenchReport) -> serde_json::Value {
    json!({
        "name": r.name,
        "size": r.size,
        "ms": r.millis,
        "answers": r.answers,
        "tables": r.stats.tables_created,
        "deps": r.stats.dependencies_stored,
        "suspensions": r.stats.suspensions,
        "resumptions": r.stats.resumptions,
    })
}

fn print_report(r: &BenchReport) {
    let memory = r.peak_memory_bytes.map_or_else(|| "n/a".to_owned(), |b| b.to_string());
    let rows = [
        ("name", r.name.to_owned()),
        ("size", r.size.to_string()),
        ("ms", format!("{:.3}", r.millis)),
        ("answers", r.answers.to_string()),
        ("tables", r.stats.tables_created.to_string()),
        ("stored", r.stats.answers_stored.to_string()),
        ("deps", r.stats.dependencies_stored.to_string()),
        ("suspensions", r.stats.suspensions.to_string()),
        ("resumptions", r.stats.resumptions.to_string()),
        ("peak_bytes", memory),
    ];
    for (key, value) in rows {
        println!("{key:<12} {value:>14}");
    }
}
