//! The resolution machine.
//!
//! Goals are terms on a persistent continuation list; the machine's own
//! control instructions are terms with reserved `$`-functors, so that a
//! captured continuation is an ordinary goal list:
//!
//! - `'$reset'(Cont, Ball)` ends the goal of a `reset/3`; reached normally it
//!   unifies `Cont` with `0`.
//! - `'$delim'(Wrapper, Table)` ends one worker derivation or one resumed
//!   dependency; reached normally it stores `Wrapper` as an answer and fails.
//! - `'$activate'(Wrapper, Table)` runs the worker of `Table` to exhaustion,
//!   then continues.
//! - `'$completion'` runs the component's fixpoint, then completes it.
//! - `'$answers'(Wrapper, Table)` enumerates a complete table.
//! - `'$worker'(Wrapper)` resolves `Wrapper` against its clauses, bypassing
//!   tabling.
//!
//! Nothing here recurses on the host stack per logical call, so deep
//! recursion is bounded by memory only.

use std::io::Write;
use std::sync::Arc;

use crate::error::{EngineError, Result};
use crate::program::{PredKey, Predicate};
use crate::tabling::{Dependency, TableId, TableStatus};
use crate::terms::{Atom, FrozenTerm, Term, TermDisplay, TrailMark, VarNaming, VariantKey};

use super::arith;
use super::Engine;

pub(crate) type Cont = Option<Arc<Frame>>;

pub(crate) struct Frame {
    goal: Term,
    next: Cont,
}

impl Drop for Frame {
    fn drop(&mut self) {
        let mut next = self.next.take();
        while let Some(frame) = next {
            match Arc::try_unwrap(frame) {
                Ok(mut frame) => next = frame.next.take(),
                Err(_) => break,
            }
        }
    }
}

pub(crate) fn push(goal: Term, next: Cont) -> Cont {
    Some(Arc::new(Frame { goal, next }))
}

fn push_all(goals: Vec<Term>, mut cont: Cont) -> Cont {
    for goal in goals.into_iter().rev() {
        cont = push(goal, cont);
    }
    cont
}

fn instr(name: Atom, args: Vec<Term>) -> Term {
    Term::compound(name, args)
}

struct Choice {
    mark: TrailMark,
    alt: Alt,
}

enum Alt {
    Clauses { goal: Term, pred: Arc<Predicate>, candidates: Arc<Vec<u32>>, next: usize, cont: Cont },
    Answers { wrapper: Term, answers: Arc<[FrozenTerm]>, next: usize, cont: Cont },
    // One-shot: continue with `cont`.
    Resume { cont: Cont },
    // Pairs of one get_work batch, row-major over (answer, dependency).
    Work { table: TableId, answers: Vec<FrozenTerm>, deps: Vec<Dependency>, next: usize, after: Cont },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum State {
    Ready,
    Yielded,
    Done,
}

pub(crate) struct Run {
    cont: Cont,
    choices: Vec<Choice>,
    pub(crate) base: TrailMark,
    state: State,
}

impl Run {
    pub(crate) fn new(goals: Vec<Term>, base: TrailMark) -> Run {
        Run { cont: push_all(goals, None), choices: Vec::new(), base, state: State::Ready }
    }

    pub(crate) fn finish(&mut self) {
        self.state = State::Done;
        self.cont = None;
        self.choices.clear();
    }

    pub(crate) fn is_done(&self) -> bool {
        self.state == State::Done
    }
}

/// Goals of a proper list term.
pub(crate) fn list_goals(engine: &Engine, list: &Term) -> Result<Vec<Term>> {
    let mut goals = Vec::new();
    let mut cur = engine.store.deref(list);
    loop {
        match cur {
            Term::Compound(c) if c.functor == Atom::DOT && c.arity() == 2 => {
                goals.push(c.args[0].clone());
                cur = engine.store.deref(&c.args[1]);
            }
            Term::Atom(Atom::NIL) => return Ok(goals),
            Term::Var(_) => return Err(EngineError::Instantiation("continuation is a partial list")),
            other => {
                return Err(EngineError::Type {
                    expected: "continuation",
                    found: FrozenTerm::freeze(other, &engine.store).to_string(),
                })
            }
        }
    }
}

impl Engine {
    /// Runs to the next solution. `Ok(false)` once the search space is
    /// exhausted; afterwards the run stays exhausted.
    pub(crate) fn drive(&mut self, run: &mut Run) -> Result<bool> {
        match run.state {
            State::Done => return Ok(false),
            State::Yielded => {
                if !self.backtrack(run)? {
                    run.finish();
                    return Ok(false);
                }
            }
            State::Ready => {}
        }
        run.state = State::Ready;
        loop {
            let Some(frame) = run.cont.take() else {
                run.state = State::Yielded;
                return Ok(true);
            };
            let goal = match Arc::try_unwrap(frame) {
                Ok(mut frame) => {
                    run.cont = frame.next.take();
                    std::mem::replace(&mut frame.goal, Term::Atom(Atom::TRUE))
                }
                Err(shared) => {
                    run.cont = shared.next.clone();
                    shared.goal.clone()
                }
            };
            if !self.step(goal, run)? && !self.backtrack(run)? {
                run.finish();
                return Ok(false);
            }
        }
    }

    /// Executes one goal. `Ok(false)` means the current branch failed.
    fn step(&mut self, goal: Term, run: &mut Run) -> Result<bool> {
        let goal = self.store.deref(&goal).clone();
        let (name, arity) = match &goal {
            Term::Var(_) => return Err(EngineError::Instantiation("goal is unbound")),
            Term::Int(i) => return Err(EngineError::Type { expected: "callable", found: i.to_string() }),
            Term::Atom(a) => (*a, 0),
            Term::Compound(c) => (c.functor, c.arity()),
        };
        let args = goal.args();
        match (name, arity) {
            (Atom::TRUE, 0) => Ok(true),
            (Atom::FAIL | Atom::FALSE, 0) => Ok(false),
            (Atom::COMMA, 2) => {
                run.cont = push(args[0].clone(), push(args[1].clone(), run.cont.take()));
                Ok(true)
            }
            (Atom::EQ, 2) => Ok(self.store.unify(&args[0], &args[1])),
            (Atom::IS, 2) => {
                let value = arith::eval(&args[1], &self.store)?;
                Ok(self.store.unify(&args[0], &Term::int(value)))
            }
            (Atom::LT | Atom::LE | Atom::GT | Atom::GE | Atom::ARITH_EQ | Atom::ARITH_NE, 2) => {
                let x = arith::eval(&args[0], &self.store)?;
                let y = arith::eval(&args[1], &self.store)?;
                Ok(arith::compare(name, x.cmp(&y)))
            }
            (Atom::WRITELN, 1) => {
                writeln!(self.output, "{}", TermDisplay::new(&args[0], VarNaming::Store(&self.store)))?;
                self.output.flush()?;
                Ok(true)
            }
            (Atom::CALL, 1) => {
                let target = self.store.deref(&args[0]).clone();
                match &target {
                    Term::Compound(c) if c.functor == Atom::CONT && c.arity() == 1 => {
                        let goals = list_goals(self, &c.args[0])?;
                        run.cont = push_all(goals, run.cont.take());
                    }
                    _ => run.cont = push(target, run.cont.take()),
                }
                Ok(true)
            }
            (Atom::RESET, 3) => {
                let mark = instr(Atom::RESET_MARK, vec![args[1].clone(), args[2].clone()]);
                run.cont = push(args[0].clone(), push(mark, run.cont.take()));
                Ok(true)
            }
            (Atom::RESET_MARK, 2) => Ok(self.store.unify(&args[0], &Term::int(0))),
            (Atom::SHIFT, 1) => self.shift(&args[0], run),
            (Atom::DELIM_MARK, 2) => {
                let table = table_arg(&args[1])?;
                let answer = FrozenTerm::freeze(&args[0], &self.store);
                self.tables.store_answer(table, answer);
                Ok(false)
            }
            (Atom::ACTIVATE, 2) => {
                let table = table_arg(&args[1])?;
                self.tables.activate(table);
                let rest = run.cont.take();
                run.choices.push(Choice { mark: self.store.mark(), alt: Alt::Resume { cont: rest } });
                let wrapper = args[0].clone();
                let delim = instr(Atom::DELIM_MARK, vec![wrapper.clone(), args[1].clone()]);
                run.cont = push(instr(Atom::WORKER, vec![wrapper]), push(delim, None));
                Ok(true)
            }
            (Atom::COMPLETION, 0) => self.completion(run),
            (Atom::ANSWERS, 2) => {
                let table = table_arg(&args[1])?;
                self.answers_from(args[0].clone(), table, run)
            }
            (Atom::WORKER, 1) => {
                let wrapper = self.store.deref(&args[0]).clone();
                self.resolve(wrapper, run)
            }
            _ => {
                let key = PredKey { name, arity: arity as u32 };
                if self.program.is_tabled(&key) {
                    self.table_call(goal, run)
                } else {
                    self.resolve(goal, run)
                }
            }
        }
    }

    fn resolve(&mut self, goal: Term, run: &mut Run) -> Result<bool> {
        let key = PredKey::of(&goal).expect("callable goal");
        let Some(pred) = self.program.predicate(&key).cloned() else {
            // A declared table without clauses has an empty worker.
            if self.program.is_tabled(&key) {
                return Ok(false);
            }
            return Err(EngineError::UnknownProcedure(key.to_string()));
        };
        let first = goal.args().first().map(|a| self.store.deref(a));
        let candidates = pred.candidates(first).clone();
        if candidates.is_empty() {
            return Ok(false);
        }
        let cont = run.cont.take();
        run.choices.push(Choice {
            mark: self.store.mark(),
            alt: Alt::Clauses { goal, pred, candidates, next: 0, cont },
        });
        Ok(false)
    }

    fn table_call(&mut self, wrapper: Term, run: &mut Run) -> Result<bool> {
        let key = VariantKey::of(&wrapper, &self.store);
        let (table, _) = self.tables.get_table_for_variant(key);
        let status = self.tables.table(table).status();
        let id = table.to_term();
        if status == TableStatus::Complete {
            return self.answers_from(wrapper, table, run);
        }
        if !self.tables.scheduling().leader_active() {
            if status != TableStatus::Fresh {
                return Err(EngineError::Internal(format!("table {} is {status} outside any component", table.index())));
            }
            self.tables.create_scheduling_component();
            let rest = push(instr(Atom::ANSWERS, vec![wrapper.clone(), id.clone()]), run.cont.take());
            let rest = push(Term::Atom(Atom::COMPLETION), rest);
            run.cont = push(instr(Atom::ACTIVATE, vec![wrapper, id]), rest);
            return Ok(true);
        }
        let info = instr(Atom::CALL_INFO, vec![wrapper.clone(), id.clone()]);
        if status == TableStatus::Fresh {
            let rest = push(instr(Atom::SHIFT, vec![info]), run.cont.take());
            run.cont = push(instr(Atom::ACTIVATE, vec![wrapper, id]), rest);
            Ok(true)
        } else {
            self.shift(&info, run)
        }
    }

    fn answers_from(&mut self, wrapper: Term, table: TableId, run: &mut Run) -> Result<bool> {
        let answers = self.tables.complete_answers(table);
        if answers.is_empty() {
            return Ok(false);
        }
        let cont = run.cont.take();
        run.choices.push(Choice { mark: self.store.mark(), alt: Alt::Answers { wrapper, answers, next: 0, cont } });
        Ok(false)
    }

    /// Captures the continuation up to the nearest delimiter.
    fn shift(&mut self, payload: &Term, run: &mut Run) -> Result<bool> {
        let mut goals = Vec::new();
        let mut cur = run.cont.clone();
        while let Some(frame) = cur {
            if let Term::Compound(c) = &frame.goal {
                if c.functor == Atom::RESET_MARK && c.arity() == 2 {
                    self.tables.stats.suspensions += 1;
                    let captured = Term::compound(Atom::CONT, vec![Term::list(goals, Term::Atom(Atom::NIL))]);
                    if !self.store.unify(&c.args[0], &captured) || !self.store.unify(&c.args[1], payload) {
                        return Ok(false);
                    }
                    run.cont = frame.next.clone();
                    return Ok(true);
                }
                if c.functor == Atom::DELIM_MARK && c.arity() == 2 {
                    let payload = self.store.deref(payload).clone();
                    let (source_wrapper, source) = match &payload {
                        Term::Compound(p) if p.functor == Atom::CALL_INFO && p.arity() == 2 => {
                            (p.args[0].clone(), table_arg(self.store.deref(&p.args[1]))?)
                        }
                        _ => {
                            return Err(EngineError::Type {
                                expected: "call_info/2 shifted from a tabled worker",
                                found: FrozenTerm::freeze(&payload, &self.store).to_string(),
                            })
                        }
                    };
                    self.tables.stats.suspensions += 1;
                    let dep = Dependency::capture(
                        &source_wrapper,
                        source,
                        Term::list(goals, Term::Atom(Atom::NIL)),
                        &c.args[0],
                        table_arg(&c.args[1])?,
                        &self.store,
                    );
                    self.tables.store_dependency(dep);
                    return Ok(false);
                }
            }
            goals.push(frame.goal.clone());
            cur = frame.next.clone();
        }
        Err(EngineError::ShiftWithoutReset)
    }

    fn completion(&mut self, run: &mut Run) -> Result<bool> {
        while let Some(table) = self.tables.pop_worklist() {
            if let Some((answers, deps)) = self.tables.get_work(table) {
                let after = push(Term::Atom(Atom::COMPLETION), run.cont.take());
                run.choices.push(Choice {
                    mark: self.store.mark(),
                    alt: Alt::Work { table, answers, deps, next: 0, after },
                });
                return Ok(false);
            }
        }
        self.tables.set_all_complete();
        Ok(true)
    }

    fn count_resolution(&mut self) -> Result<()> {
        self.tables.stats.resolutions += 1;
        if let Some(limit) = self.step_limit {
            self.steps += 1;
            if self.steps > limit {
                return Err(EngineError::StepLimit(limit));
            }
        }
        Ok(())
    }

    /// Resumes the newest choice point. `Ok(false)` if none is left.
    fn backtrack(&mut self, run: &mut Run) -> Result<bool> {
        loop {
            let Some(choice) = run.choices.last_mut() else {
                return Ok(false);
            };
            let mark = choice.mark;
            self.store.undo_to(mark);
            // (continuation to run, whether this choice is used up)
            let (resumed, exhausted) = match &mut choice.alt {
                Alt::Resume { cont } => (Some(cont.take()), true),
                Alt::Clauses { goal, pred, candidates, next, cont } => {
                    let mut found = None;
                    while *next < candidates.len() {
                        let clause = pred.clause(candidates[*next]);
                        *next += 1;
                        let base = self.store.fresh_block(clause.var_count);
                        let head = FrozenTerm::instantiate_at(&clause.head, base);
                        if self.store.unify(goal, &head) {
                            self.count_resolution()?;
                            let mut body = cont.clone();
                            for g in clause.body.iter().rev() {
                                body = push(FrozenTerm::instantiate_at(g, base), body);
                            }
                            found = Some(body);
                            break;
                        }
                        self.store.undo_to(mark);
                    }
                    (found, *next >= candidates.len())
                }
                Alt::Answers { wrapper, answers, next, cont } => {
                    let mut found = None;
                    while *next < answers.len() {
                        let answer = answers[*next].instantiate(&mut self.store);
                        *next += 1;
                        if self.store.unify(wrapper, &answer) {
                            found = Some(cont.clone());
                            break;
                        }
                        self.store.undo_to(mark);
                    }
                    (found, *next >= answers.len())
                }
                Alt::Work { table, answers, deps, next, after } => loop {
                    if *next >= answers.len() * deps.len() {
                        match self.tables.get_work(*table) {
                            Some((a, d)) => {
                                *answers = a;
                                *deps = d;
                                *next = 0;
                                continue;
                            }
                            None => break (Some(after.take()), true),
                        }
                    }
                    let (a, d) = (*next / deps.len(), *next % deps.len());
                    *next += 1;
                    let (source, goals, target) = deps[d].instantiate(&mut self.store);
                    let answer = answers[a].instantiate(&mut self.store);
                    if !self.store.unify(&source, &answer) {
                        self.store.undo_to(mark);
                        continue;
                    }
                    self.tables.stats.resumptions += 1;
                    let goals = list_goals(self, &goals)?;
                    let delim = instr(Atom::DELIM_MARK, vec![target, deps[d].target().to_term()]);
                    break (Some(push_all(goals, push(delim, None))), false);
                },
            };
            if exhausted {
                run.choices.pop();
            }
            if let Some(cont) = resumed {
                run.cont = cont;
                return Ok(true);
            }
        }
    }
}

fn table_arg(term: &Term) -> Result<TableId> {
    TableId::from_term(term).ok_or_else(|| EngineError::Internal("malformed table reference".into()))
}
