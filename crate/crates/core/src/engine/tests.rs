use std::sync::{Arc, Mutex};

use super::*;
use crate::parser::parse_query;
use crate::tabling::TableStatus;

const EDGES: &str = "e(a,b). e(b,c).";

const CLOSURE: &str = "
:- table p/2.
p(X,Y) :- p(X,Z), e(Z,Y).
p(X,Y) :- e(X,Y).
e(a,b). e(b,c).
";

fn engine(text: &str) -> Engine {
    Engine::from_source(text).unwrap()
}

fn answers(engine: &mut Engine, query: &str) -> Vec<String> {
    engine.find_all(query).unwrap().iter().map(|b| b.to_string()).collect()
}

fn sorted(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v
}

#[derive(Clone, Default)]
struct Capture(Arc<Mutex<Vec<u8>>>);

impl Write for Capture {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}

impl Capture {
    fn attach(engine: &mut Engine) -> Capture {
        let capture = Capture::default();
        engine.set_output(Box::new(capture.clone()));
        capture
    }

    fn lines(&self) -> Vec<String> {
        String::from_utf8(self.0.lock().unwrap().clone()).unwrap().lines().map(String::from).collect()
    }
}

fn outcomes(engine: &mut Engine, query: &str) -> Vec<DelimOutcome> {
    engine.run_delimited(&parse_query(query).unwrap()).collect_outcomes().unwrap()
}

fn describe(outcome: &DelimOutcome) -> String {
    match outcome {
        DelimOutcome::Answer(b) => format!("answer {b}"),
        DelimOutcome::Shifted { payload, suspension } => format!("shifted {payload} {suspension}"),
        DelimOutcome::Exhausted => "exhausted".into(),
    }
}

fn describe_all(outcomes: &[DelimOutcome]) -> Vec<String> {
    outcomes.iter().map(describe).collect()
}

fn suspension(outcome: &DelimOutcome) -> &Suspension {
    match outcome {
        DelimOutcome::Shifted { suspension, .. } => suspension,
        other => panic!("expected a shift, got {}", describe(other)),
    }
}

#[test]
fn facts_answer_in_order() {
    let mut e = engine(EDGES);
    assert_eq!(answers(&mut e, "e(a,X)"), ["X = b"]);
    assert_eq!(answers(&mut e, "e(X,Y)"), ["X = a, Y = b", "X = b, Y = c"]);
    assert_eq!(answers(&mut e, "e(c,X)"), Vec::<String>::new());
}

#[test]
fn arithmetic() {
    let mut e = Engine::default();
    assert_eq!(answers(&mut e, "X is 1+2"), ["X = 3"]);
    assert_eq!(answers(&mut e, "X is 2*3, X > 5, X =< 6, X =:= 6, X =\\= 7"), ["X = 6"]);
    assert_eq!(answers(&mut e, "1 < 0"), Vec::<String>::new());
    assert_eq!(answers(&mut e, "X = f(Y), Y = 1"), ["X = f(1), Y = 1"]);
}

#[test]
fn variable_free_success_prints_true() {
    let mut e = engine(EDGES);
    assert_eq!(answers(&mut e, "e(a,b)"), ["true"]);
}

#[test]
fn unbound_answers_keep_sharing() {
    let mut e = Engine::default();
    assert_eq!(answers(&mut e, "X = f(Y,Z), Z = Y"), ["X = f(_0,_0), Y = _0, Z = _0"]);
}

#[test]
fn runtime_errors() {
    let mut e = Engine::default();
    assert!(matches!(
        e.find_all("q(X)"),
        Err(Error::Engine(EngineError::UnknownProcedure(p))) if p == "q/1"
    ));
    assert!(matches!(e.find_all("X is Y + 1"), Err(Error::Engine(EngineError::Instantiation(_)))));
    assert!(matches!(e.find_all("X is foo"), Err(Error::Engine(EngineError::NotEvaluable(_)))));
    assert!(matches!(e.find_all("shift(a)"), Err(Error::Engine(EngineError::ShiftWithoutReset))));
    assert!(matches!(e.find_all("call(X)"), Err(Error::Engine(EngineError::Instantiation(_)))));
}

#[test]
fn bindings_are_undone_after_a_query() {
    let mut e = engine(EDGES);
    let before = e.store.bound_count();
    let query = parse_query("e(X,Y)").unwrap();
    let first = e.solve(&query).next().unwrap().unwrap();
    assert_eq!(first.to_string(), "X = a, Y = b");
    assert_eq!(e.store.bound_count(), before);
}

#[test]
fn deep_recursion_runs_without_host_stack() {
    let mut e = engine("len([],0). len([_|T],N) :- len(T,M), N is M+1. mk(0,[]). mk(N,[x|T]) :- N > 0, M is N-1, mk(M,T).");
    assert_eq!(answers(&mut e, "mk(100000,L), len(L,N)").len(), 1);
}

#[test]
fn step_limit_stops_runaway_recursion() {
    let mut e = engine("loop :- loop.");
    e.set_step_limit(Some(10_000));
    assert!(matches!(e.find_all("loop"), Err(Error::Engine(EngineError::StepLimit(10_000)))));
}

#[test]
fn delimited_answers_then_exhausted() {
    let mut e = engine(EDGES);
    assert_eq!(describe_all(&outcomes(&mut e, "e(X,Y)")), ["answer X = a, Y = b", "answer X = b, Y = c", "exhausted"]);
    assert_eq!(describe_all(&outcomes(&mut e, "fail")), ["exhausted"]);
}

#[test]
fn exhausted_is_terminal() {
    let mut e = Engine::default();
    let query = parse_query("true").unwrap();
    let mut run = e.run_delimited(&query);
    assert!(matches!(run.next_outcome().unwrap(), DelimOutcome::Answer(_)));
    for _ in 0..3 {
        assert_eq!(run.next_outcome().unwrap(), DelimOutcome::Exhausted);
    }
}

#[test]
fn follower_call_shifts_its_call_info() {
    let mut e = engine(CLOSURE);
    e.begin_scheduling_component();
    let out = outcomes(&mut e, "p(X,Z), e(Z,Y)");
    e.abandon_scheduling_component();
    assert_eq!(out.len(), 2);
    let DelimOutcome::Shifted { payload, suspension } = &out[0] else { panic!("{}", describe(&out[0])) };
    let payload = payload.local_term();
    assert_eq!(payload.indicator(), Some((Atom::CALL_INFO, 2)));
    assert_eq!(FrozenTerm::from_local(payload.args()[0].clone(), 2).to_string(), "p(_0,_1)");
    assert_eq!(suspension.goals().len(), 1);
    assert_eq!(suspension.to_string(), "[e(_0,_1)]");
    assert_eq!(out[1], DelimOutcome::Exhausted);
}

#[test]
fn resume_with_preset_variable() {
    let mut e = engine(EDGES);
    let out = outcomes(&mut e, "shift(k), e(Z,Y)");
    let susp = suspension(&out[0]).clone();
    assert_eq!(susp.payload().to_string(), "k");
    let b = parse_term("b").unwrap();
    let resumed = e.resume(&susp, &[("Z", b)]).unwrap().collect_outcomes().unwrap();
    assert_eq!(describe_all(&resumed), ["answer Z = b, Y = c", "exhausted"]);
}

#[test]
fn resume_empty_and_failing_continuations() {
    let mut e = Engine::default();
    let out = outcomes(&mut e, "shift(k)");
    let empty = suspension(&out[0]).clone();
    assert!(empty.is_empty());
    assert_eq!(describe_all(&e.resume(&empty, &[]).unwrap().collect_outcomes().unwrap()), ["answer true", "exhausted"]);
    let out = outcomes(&mut e, "shift(k), fail");
    let failing = suspension(&out[0]).clone();
    assert_eq!(describe_all(&e.resume(&failing, &[]).unwrap().collect_outcomes().unwrap()), ["exhausted"]);
}

#[test]
fn suspensions_resume_independently() {
    let mut e = engine(EDGES);
    let out = outcomes(&mut e, "shift(k), e(Z,Y)");
    let susp = suspension(&out[0]).clone();
    let run = |e: &mut Engine, z: &str| {
        describe_all(&e.resume(&susp, &[("Z", parse_term(z).unwrap())]).unwrap().collect_outcomes().unwrap())
    };
    let forward = (run(&mut e, "a"), run(&mut e, "b"));
    let backward = (run(&mut e, "b"), run(&mut e, "a"));
    assert_eq!(forward.0, backward.1);
    assert_eq!(forward.1, backward.0);
    assert_eq!(forward.0, ["answer Z = a, Y = b", "exhausted"]);
}

const TRANSCRIPT_Q: &str = "q :- writeln('before shift'), shift('return value'), writeln('after shift').";

#[test]
fn unresumed_continuation_has_no_effect() {
    let text = format!("{TRANSCRIPT_Q} p :- reset(q,Cont,Term1), writeln(Term1), writeln(Cont), writeln(end).");
    let mut e = engine(&text);
    let out = Capture::attach(&mut e);
    assert_eq!(answers(&mut e, "p"), ["true"]);
    assert_eq!(out.lines(), ["before shift", "return value", "$cont$([writeln(after shift)])", "end"]);
}

#[test]
fn resumed_continuation_runs_once() {
    let text = format!("{TRANSCRIPT_Q} p :- reset(q,Cont,Term1), writeln(Term1), call(Cont), writeln(end).");
    let mut e = engine(&text);
    let out = Capture::attach(&mut e);
    assert_eq!(answers(&mut e, "p"), ["true"]);
    assert_eq!(out.lines(), ["before shift", "return value", "after shift", "end"]);
}

#[test]
fn delimited_transcript_through_outcomes() {
    let mut e = engine(TRANSCRIPT_Q);
    let out = Capture::attach(&mut e);
    let shifted = outcomes(&mut e, "q");
    assert_eq!(out.lines(), ["before shift"]);
    let susp = suspension(&shifted[0]).clone();
    assert_eq!(susp.payload().to_string(), "'return value'");
    e.resume(&susp, &[]).unwrap().collect_outcomes().unwrap();
    assert_eq!(out.lines(), ["before shift", "after shift"]);
}

#[test]
fn nested_reset_is_transparent() {
    let mut e = engine(&format!("{TRANSCRIPT_Q} {EDGES}"));
    let _out = Capture::attach(&mut e);
    for goal in ["q", "e(X,Y)", "shift(k), e(Z,Y)", "fail"] {
        let plain = describe_all(&outcomes(&mut e, goal));
        let nested = describe_all(&outcomes(&mut e, &format!("reset(true,_C0,_B0), {goal}")));
        assert_eq!(plain, nested, "{goal}");
        // An inner reset absorbs every shift of its goal.
        let absorbed = outcomes(&mut e, &format!("reset(({goal}), _C, _B)"));
        assert!(absorbed.iter().all(|o| !matches!(o, DelimOutcome::Shifted { .. })), "{goal}");
    }
}

#[test]
fn continuation_is_an_ordinary_term() {
    let mut e = engine("q(X) :- shift(got(X)), X = 2.");
    let got = answers(&mut e, "reset(q(X), C, B), call(C)");
    assert_eq!(got, ["X = 2, C = '$cont$'([2=2]), B = got(2)"]);
}

#[test]
fn tabled_transitive_closure() {
    let mut e = engine(CLOSURE);
    assert_eq!(sorted(answers(&mut e, "p(X,Y)")), ["X = a, Y = b", "X = a, Y = c", "X = b, Y = c"]);
    let table = e.table_for("p(_,_)").unwrap().unwrap();
    assert_eq!(table.status(), TableStatus::Complete);
    assert_eq!(table.dependency_count(), 0);
}

#[test]
fn complete_tables_are_reused() {
    let mut e = engine(CLOSURE);
    answers(&mut e, "p(X,Y)");
    let before = e.stats();
    assert_eq!(sorted(answers(&mut e, "p(A,B)")).len(), 3);
    let delta = e.stats().since(&before);
    assert_eq!((delta.worker_invocations, delta.resolutions, delta.tables_created), (0, 0, 0));
    assert_eq!(sorted(answers(&mut e, "p(a,Y)")), ["Y = b", "Y = c"]);
    assert_eq!(e.stats().since(&before).tables_created, 1);
}

#[test]
fn tabled_predicate_without_clauses_fails() {
    let mut e = engine(":- table t/1.");
    assert!(answers(&mut e, "t(X)").is_empty());
    assert_eq!(e.table_for("t(_)").unwrap().unwrap().status(), TableStatus::Complete);
}

#[test]
fn errors_inside_a_component_leave_no_partial_tables() {
    let mut e = engine(":- table t/1. t(X) :- t(Y), X is Y + 1. t(a).");
    assert!(matches!(e.find_all("t(X)"), Err(Error::Engine(EngineError::NotEvaluable(_)))));
    assert!(!e.tables().scheduling().leader_active());
    let table = e.table_for("t(_)").unwrap().unwrap();
    assert_eq!((table.status(), table.answer_count()), (TableStatus::Fresh, 0));
    // Later queries start over.
    e.load(parse_program("ok.").unwrap());
    assert_eq!(answers(&mut e, "ok"), ["true"]);
}
