//! Built-in benchmark programs.
//!
//! Each benchmark is generated as program text for a size parameter, run
//! under tabling, and validated against a count or value computed directly
//! in Rust.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::time::Instant;

use num_bigint::BigInt;
use thiserror::Error;

use crate::engine::Engine;
use crate::error::Error;
use crate::parser::Query;
use crate::tabling::Stats;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("unknown benchmark {0:?}; known: {known}", known = NAMES.join(", "))]
    Unknown(String),
    #[error("size {size} is outside the supported range {min}..={max} for {name}")]
    SizeOutOfRange { name: &'static str, size: u64, min: u64, max: u64 },
    #[error(transparent)]
    Engine(#[from] Error),
    #[error("{name} {size}: {message}")]
    Mismatch { name: &'static str, size: u64, message: String },
}

pub const NAMES: &[&str] = &[
    "fib",
    "recognize",
    "nreverse",
    "shuttle",
    "pingpong",
    "path_double_first",
    "path_right_last_pyramid",
    "path_right_last_btree",
    "large_join",
];

/// A generated benchmark instance.
#[derive(Clone, Debug)]
pub struct Benchmark {
    pub name: &'static str,
    pub size: u64,
    pub program: String,
    pub query: String,
    pub expected_answers: usize,
    /// Printed form of the single answer, when checked by value.
    pub expected_answer: Option<String>,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub name: &'static str,
    pub size: u64,
    pub millis: f64,
    pub answers: usize,
    pub stats: Stats,
    /// Peak resident set size of the process, where the platform reports it.
    pub peak_memory_bytes: Option<u64>,
}

fn range(name: &str) -> Option<(&'static str, u64, u64)> {
    let (min, max) = match name {
        "fib" => (0, 5_000),
        "recognize" => (1, 5_000),
        "nreverse" => (1, 1_000),
        "shuttle" => (1, 20_000),
        "pingpong" => (1, 5_000),
        "path_double_first" => (1, 200),
        "path_right_last_pyramid" => (2, 60),
        "path_right_last_btree" => (1, 16),
        "large_join" => (1, 20_000),
        _ => return None,
    };
    let name = NAMES.iter().copied().find(|n| *n == name)?;
    Some((name, min, max))
}

pub fn generate(name: &str, size: u64) -> Result<Benchmark, BenchError> {
    let (name, min, max) = range(name).ok_or_else(|| BenchError::Unknown(name.to_owned()))?;
    if size < min || size > max {
        return Err(BenchError::SizeOutOfRange { name, size, min, max });
    }
    let n = size as usize;
    let mut b = Benchmark {
        name,
        size,
        program: String::new(),
        query: String::new(),
        expected_answers: 0,
        expected_answer: None,
    };
    match name {
        "fib" => {
            b.program = "\
:- table fib/2.
fib(0, 0).
fib(1, 1).
fib(N, F) :- N > 1, N1 is N - 1, N2 is N - 2, fib(N1, F1), fib(N2, F2), F is F1 + F2.
"
            .into();
            b.query = format!("fib({n}, F)");
            b.expected_answers = 1;
            b.expected_answer = Some(format!("F = {}", fib(n)));
        }
        "recognize" => {
            // Sentences "a + a + ... + a" under a left-recursive grammar.
            b.program = "\
:- table expr/2.
expr(I, J) :- expr(I, K), word(K, '+', L), term(L, J).
expr(I, J) :- term(I, J).
term(I, J) :- word(I, a, J).
"
            .into();
            for i in 0..n {
                let _ = writeln!(b.program, "word({}, a, {}).", 2 * i, 2 * i + 1);
                if i + 1 < n {
                    let _ = writeln!(b.program, "word({}, '+', {}).", 2 * i + 1, 2 * i + 2);
                }
            }
            b.query = "expr(0, J)".into();
            b.expected_answers = n;
        }
        "nreverse" => {
            b.program = "\
:- table nrev/2.
nrev([], []).
nrev([H|T], R) :- nrev(T, RT), app(RT, [H], R).
app([], L, L).
app([H|T], L, [H|R]) :- app(T, L, R).
"
            .into();
            let items: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
            let reversed: Vec<String> = items.iter().rev().cloned().collect();
            b.query = format!("nrev([{}], R)", items.join(","));
            b.expected_answers = 1;
            b.expected_answer = Some(format!("R = [{}]", reversed.join(",")));
        }
        "shuttle" => {
            // Left-recursive reachability over a chain walkable both ways.
            b.program = left_closure("r", "e");
            for i in 0..n {
                let _ = writeln!(b.program, "e({i}, {}).\ne({}, {i}).", i + 1, i + 1);
            }
            b.query = "r(0, Y)".into();
            b.expected_answers = n + 1;
        }
        "pingpong" => {
            b.program = "\
:- table ping/2, pong/2.
ping(X, Y) :- pong(X, Z), e(Z, Y).
ping(X, Y) :- e(X, Y).
pong(X, Y) :- ping(X, Z), e(Z, Y).
pong(X, Y) :- e(X, Y).
"
            .into();
            b.program.push_str(&chain_facts(n));
            b.query = "ping(0, Y)".into();
            b.expected_answers = n;
        }
        "path_double_first" => {
            b.program = "\
:- table path/2.
path(X, Y) :- path(X, Z), path(Z, Y).
path(X, Y) :- e(X, Y).
"
            .into();
            b.program.push_str(&chain_facts(n));
            b.query = "path(X, Y)".into();
            b.expected_answers = n * (n + 1) / 2;
        }
        "path_right_last_pyramid" => {
            b.program = right_closure("path", "e");
            let id = |i: usize, j: usize| i * (i + 1) / 2 + j;
            let mut edges = Vec::new();
            for i in 0..n - 1 {
                for j in 0..=i {
                    edges.push((id(i, j), id(i + 1, j)));
                    edges.push((id(i, j), id(i + 1, j + 1)));
                }
            }
            b.expected_answers = reachable(&edges, 0);
            b.program.push_str(&facts(&edges));
            b.query = "path(0, Y)".into();
        }
        "path_right_last_btree" => {
            b.program = right_closure("path", "e");
            let nodes = (1usize << n) - 1;
            let edges: Vec<(usize, usize)> =
                (1..=nodes).flat_map(|k| [(k, 2 * k), (k, 2 * k + 1)]).filter(|&(_, c)| c <= nodes).collect();
            b.expected_answers = reachable(&edges, 1);
            b.program.push_str(&facts(&edges));
            b.query = "path(1, Y)".into();
        }
        "large_join" => {
            let m = (n / 4).max(1);
            let rows = |a: usize, b: usize, c: usize, d: usize| -> Vec<(usize, usize)> {
                (0..n).map(|i| ((i * a + b) % m, (i * c + d) % m)).collect()
            };
            let (r1, r2, r3) = (rows(1, 0, 7, 1), rows(3, 2, 11, 5), rows(13, 2, 5, 0));
            b.program = ":- table join/2.\njoin(X, W) :- r1(X, Y), r2(Y, Z), r3(Z, W).\n".into();
            for (name, rel) in [("r1", &r1), ("r2", &r2), ("r3", &r3)] {
                for (x, y) in rel {
                    let _ = writeln!(b.program, "{name}({x}, {y}).");
                }
            }
            b.query = "join(X, W)".into();
            b.expected_answers = join3(&r1, &r2, &r3);
        }
        _ => unreachable!("checked by range"),
    }
    Ok(b)
}

fn left_closure(p: &str, e: &str) -> String {
    format!(":- table {p}/2.\n{p}(X, Y) :- {p}(X, Z), {e}(Z, Y).\n{p}(X, Y) :- {e}(X, Y).\n")
}

fn right_closure(p: &str, e: &str) -> String {
    format!(":- table {p}/2.\n{p}(X, Y) :- {e}(X, Z), {p}(Z, Y).\n{p}(X, Y) :- {e}(X, Y).\n")
}

fn chain_facts(n: usize) -> String {
    facts(&(0..n).map(|i| (i, i + 1)).collect::<Vec<_>>())
}

fn facts(edges: &[(usize, usize)]) -> String {
    let mut out = String::new();
    for (a, b) in edges {
        let _ = writeln!(out, "e({a}, {b}).");
    }
    out
}

/// Nodes reachable from `start` by one or more edges.
fn reachable(edges: &[(usize, usize)], start: usize) -> usize {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for &(a, b) in edges {
            if a == x && seen.insert(b) {
                queue.push_back(b);
            }
        }
    }
    seen.len()
}

fn join3(r1: &[(usize, usize)], r2: &[(usize, usize)], r3: &[(usize, usize)]) -> usize {
    let mut out = BTreeSet::new();
    for &(x, y) in r1 {
        for &(y2, z) in r2.iter().filter(|(y2, _)| *y2 == y) {
            debug_assert_eq!(y2, y);
            for &(_, w) in r3.iter().filter(|(z2, _)| *z2 == z) {
                out.insert((x, w));
            }
        }
    }
    out.len()
}

fn fib(n: usize) -> BigInt {
    let (mut a, mut b) = (BigInt::from(0), BigInt::from(1));
    for _ in 0..n {
        let next = &a + &b;
        a = std::mem::replace(&mut b, next);
    }
    a
}

/// Generates, runs and validates one benchmark.
pub fn run_bench(name: &str, size: u64) -> Result<BenchReport, BenchError> {
    let bench = generate(name, size)?;
    let mut engine = Engine::from_source(&bench.program)?;
    let query = Query::parse(&bench.query).map_err(Error::from)?;
    let before = engine.stats();
    let started = Instant::now();
    let answers: Vec<_> = engine.solve(&query).collect::<Result<_, _>>().map_err(Error::from)?;
    let millis = started.elapsed().as_secs_f64() * 1e3;
    let mismatch = |message: String| BenchError::Mismatch { name: bench.name, size, message };
    if answers.len() != bench.expected_answers {
        return Err(mismatch(format!("expected {} answers, got {}", bench.expected_answers, answers.len())));
    }
    if let Some(expected) = &bench.expected_answer {
        let got = answers[0].to_string();
        if &got != expected {
            return Err(mismatch(format!("expected {expected}, got {got}")));
        }
    }
    Ok(BenchReport {
        name: bench.name,
        size,
        millis,
        answers: answers.len(),
        stats: engine.stats().since(&before),
        peak_memory_bytes: peak_memory(),
    })
}

fn peak_memory() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kib: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kib * 1024)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(fib(0), BigInt::from(0));
        assert_eq!(fib(10), BigInt::from(55));
        assert_eq!(reachable(&[(0, 1), (1, 2), (2, 0)], 0), 3);
        assert_eq!(join3(&[(0, 1)], &[(1, 2), (1, 3)], &[(2, 9), (3, 9)]), 1);
    }

    #[test]
    fn rejects_unknown_names_and_sizes() {
        assert!(matches!(generate("nope", 1), Err(BenchError::Unknown(_))));
        assert!(matches!(generate("fib", 1_000_000), Err(BenchError::SizeOutOfRange { .. })));
        assert!(matches!(generate("recognize", 0), Err(BenchError::SizeOutOfRange { .. })));
    }

    #[test]
    fn every_benchmark_validates_at_small_size() {
        for name in NAMES {
            let (_, min, _) = range(name).unwrap();
            let report = run_bench(name, min.max(4)).unwrap();
            assert!(report.answers > 0 || *name == "fib", "{name}");
        }
    }

    #[test]
    fn base_case_of_fib() {
        let report = run_bench("fib", 0).unwrap();
        assert_eq!(report.answers, 1);
        assert_eq!(generate("fib", 0).unwrap().expected_answer.as_deref(), Some("F = 0"));
    }

    #[test]
    fn chain_of_500_reaches_499_nodes() {
        let b = generate("path_right_last_btree", 3).unwrap();
        assert_eq!(b.expected_answers, 6);
        assert_eq!(generate("pingpong", 499).unwrap().expected_answers, 499);
    }
}
