//! SLD resolution with delimited control and tabling.
//!
//! An [`Engine`] owns a program, a binding store and all tables. Queries are
//! answered lazily through [`Solutions`]; [`Engine::run_delimited`] runs a
//! query under an implicit `reset/3` and reports each captured continuation
//! as a resumable [`Suspension`].

mod arith;
mod machine;

use std::fmt;
use std::io::{self, Write};
use std::sync::Arc;

use crate::error::{Error, EngineError, Result};
use crate::parser::{parse_program, parse_term, Query};
use crate::program::Program;
use crate::tabling::{Stats, Table, TableSpace};
use crate::terms::{Atom, BindingStore, FrozenTerm, Term, TermDisplay, Var, VarNaming};

use machine::{list_goals, Run};

pub struct Engine {
    program: Program,
    store: BindingStore,
    tables: TableSpace,
    output: Box<dyn Write + Send>,
    step_limit: Option<u64>,
    steps: u64,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new(Program::new())
    }
}

impl Engine {
    pub fn new(program: Program) -> Engine {
        Engine {
            program,
            store: BindingStore::new(),
            tables: TableSpace::new(),
            output: Box::new(io::stdout()),
            step_limit: None,
            steps: 0,
        }
    }

    pub fn from_source(text: &str) -> Result<Engine, Error> {
        Ok(Engine::new(parse_program(text)?))
    }

    /// Adds clauses and table declarations. Existing tables are discarded
    /// since their answers may no longer be complete.
    pub fn load(&mut self, program: Program) {
        self.program.extend(program);
        self.abolish_all_tables();
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    /// Destination of `writeln/1`; flushed after every call.
    pub fn set_output(&mut self, output: Box<dyn Write + Send>) {
        self.output = output;
    }

    /// Caps the clause resolutions of each query; exceeding it is an error.
    pub fn set_step_limit(&mut self, limit: Option<u64>) {
        self.step_limit = limit;
    }

    pub fn stats(&self) -> Stats {
        self.tables.stats()
    }

    pub fn tables(&self) -> &TableSpace {
        &self.tables
    }

    /// The table of the variant of `call`, if one exists.
    pub fn table_for(&self, call: &str) -> Result<Option<&Table>, Error> {
        let key = parse_term(call)?.variant_key();
        Ok(self.tables.lookup(&key).map(|id| self.tables.table(id)))
    }

    pub fn abolish_all_tables(&mut self) {
        self.tables.abolish_all_tables();
    }

    fn start(&mut self, query: &Query) -> (Vec<Term>, Vec<Term>) {
        self.steps = 0;
        let first = self.store.fresh_block(query.var_count);
        let goals = query.goals.iter().map(|g| FrozenTerm::instantiate_at(g, first)).collect();
        let vars = query.var_names.iter().map(|(_, i)| Term::Var(Var(first + u64::from(*i)))).collect();
        (goals, vars)
    }

    pub fn solve(&mut self, query: &Query) -> Solutions<'_> {
        let base = self.store.mark();
        let (goals, vars) = self.start(query);
        let run = Run::new(goals, base);
        let names = answer_names(query);
        Solutions { engine: self, run, names, vars }
    }

    /// All answers of a query given as text.
    pub fn find_all(&mut self, query: &str) -> Result<Vec<Bindings>, Error> {
        let query = Query::parse(query)?;
        let answers = self.solve(&query).collect::<Result<Vec<_>>>()?;
        Ok(answers)
    }

    /// Runs the query as if wrapped in `reset/3`.
    pub fn run_delimited(&mut self, query: &Query) -> DelimRun<'_> {
        let base = self.store.mark();
        let (mut goals, vars) = self.start(query);
        let cont = self.store.fresh_var();
        let ball = self.store.fresh_var();
        goals.push(Term::compound(Atom::RESET_MARK, vec![cont.clone(), ball.clone()]));
        let run = Run::new(goals, base);
        let names = answer_names(query);
        DelimRun { solutions: Solutions { engine: self, run, names, vars }, cont, ball }
    }

    /// Runs a fresh copy of a captured continuation under a new delimiter.
    /// `presets` binds query variables of the copy before it starts.
    pub fn resume(&mut self, suspension: &Suspension, presets: &[(&str, FrozenTerm)]) -> Result<DelimRun<'_>> {
        self.steps = 0;
        let base = self.store.mark();
        let copy = suspension.frozen.instantiate(&mut self.store);
        let [captured, _, vars] = copy.args() else { unreachable!("suspension/3") };
        let vars = vars.args().to_vec();
        let mut goals = list_goals(self, &captured.args()[0])?;
        for (name, value) in presets {
            let i = suspension.names.iter().position(|n| n == name).ok_or_else(|| {
                EngineError::Internal(format!("suspension has no variable {name}"))
            })?;
            let value = value.instantiate(&mut self.store);
            goals.insert(0, Term::compound(Atom::EQ, vec![vars[i].clone(), value]));
        }
        self.tables.stats.resumptions += 1;
        let cont = self.store.fresh_var();
        let ball = self.store.fresh_var();
        goals.push(Term::compound(Atom::RESET_MARK, vec![cont.clone(), ball.clone()]));
        let run = Run::new(goals, base);
        let names = suspension.names.to_vec();
        Ok(DelimRun { solutions: Solutions { engine: self, run, names, vars }, cont, ball })
    }

    /// Opens a scheduling component without a leader call, so that tabled
    /// calls in a following [`Engine::run_delimited`] act as followers.
    pub fn begin_scheduling_component(&mut self) {
        self.tables.create_scheduling_component();
    }

    /// Discards the component opened by
    /// [`Engine::begin_scheduling_component`] without completing it.
    pub fn abandon_scheduling_component(&mut self) {
        self.tables.abandon_component();
    }

    fn bindings(&self, names: &[String], vars: &[Term]) -> Bindings {
        let values = Term::compound(Atom::VARS, vars.to_vec());
        Bindings { names: names.into(), values: FrozenTerm::freeze(&values, &self.store) }
    }

    fn recover(&mut self, run: &mut Run) {
        run.finish();
        self.store.undo_to(run.base);
        if self.tables.scheduling().leader_active() {
            self.tables.abandon_component();
        }
    }
}

fn answer_names(query: &Query) -> Vec<String> {
    query.var_names.iter().map(|(n, _)| n.clone()).collect()
}

/// Variable bindings of one answer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bindings {
    names: Arc<[String]>,
    // '$vars'(V1, ..., Vn), frozen together so shared variables stay shared.
    values: FrozenTerm,
}

impl Bindings {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<FrozenTerm> {
        let i = self.names.iter().position(|n| n == name)?;
        Some(self.value(i))
    }

    fn value(&self, i: usize) -> FrozenTerm {
        let arg = self.values.local_term().args()[i].clone();
        FrozenTerm::from_local(arg, self.values.var_count())
    }

    /// Named variables, skipping `_`-prefixed ones.
    pub fn iter(&self) -> impl Iterator<Item = (&str, FrozenTerm)> + '_ {
        self.names
            .iter()
            .enumerate()
            .filter(|(_, n)| !n.starts_with('_'))
            .map(|(i, n)| (n.as_str(), self.value(i)))
    }

    /// Values printed as `Name = value` strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.iter().map(|(n, v)| format!("{n} = {v}")).collect()
    }
}

impl fmt::Display for Bindings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown = self.to_strings();
        if shown.is_empty() {
            f.write_str("true")
        } else {
            f.write_str(&shown.join(", "))
        }
    }
}

/// Lazily enumerated answers. Dropping it undoes every binding the query
/// made.
pub struct Solutions<'e> {
    engine: &'e mut Engine,
    run: Run,
    names: Vec<String>,
    vars: Vec<Term>,
}

impl Solutions<'_> {
    fn advance(&mut self) -> Option<Result<()>> {
        if self.run.is_done() {
            return None;
        }
        match self.engine.drive(&mut self.run) {
            Ok(true) => Some(Ok(())),
            Ok(false) => None,
            Err(e) => {
                self.engine.recover(&mut self.run);
                Some(Err(e))
            }
        }
    }
}

impl Iterator for Solutions<'_> {
    type Item = Result<Bindings>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.advance()?.map(|()| self.engine.bindings(&self.names, &self.vars)))
    }
}

impl Drop for Solutions<'_> {
    fn drop(&mut self) {
        self.run.finish();
        self.engine.store.undo_to(self.run.base);
    }
}

/// A captured continuation together with the query variables it shares.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Suspension {
    // '$suspension'('$cont$'(Goals), Ball, '$vars'(V1, ..., Vn))
    frozen: FrozenTerm,
    names: Arc<[String]>,
}

impl Suspension {
    /// The suspended goals, in execution order.
    pub fn goals(&self) -> Vec<FrozenTerm> {
        let mut goals = Vec::new();
        let mut cur = &self.frozen.local_term().args()[0].args()[0];
        while let Term::Compound(c) = cur {
            goals.push(FrozenTerm::from_local(c.args[0].clone(), self.frozen.var_count()));
            cur = &c.args[1];
        }
        goals
    }

    pub fn is_empty(&self) -> bool {
        self.goals().is_empty()
    }

    pub fn payload(&self) -> FrozenTerm {
        FrozenTerm::from_local(self.frozen.local_term().args()[1].clone(), self.frozen.var_count())
    }

    /// The whole record as one term, e.g. for display.
    pub fn as_term(&self) -> &FrozenTerm {
        &self.frozen
    }
}

impl fmt::Display for Suspension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let goals = self.frozen.local_term().args()[0].args()[0].clone();
        TermDisplay::new(&goals, VarNaming::Local).quoted(true).fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DelimOutcome {
    /// The delimited goal completed normally.
    Answer(Bindings),
    /// `shift/1` captured the rest of the delimited goal.
    Shifted { payload: FrozenTerm, suspension: Suspension },
    Exhausted,
}

/// Outcomes of one delimited run.
pub struct DelimRun<'e> {
    solutions: Solutions<'e>,
    cont: Term,
    ball: Term,
}

impl DelimRun<'_> {
    /// The next outcome; `Exhausted` from the end on.
    pub fn next_outcome(&mut self) -> Result<DelimOutcome> {
        match self.solutions.advance() {
            None => return Ok(DelimOutcome::Exhausted),
            Some(r) => r?,
        }
        let engine = &*self.solutions.engine;
        let bindings = engine.bindings(&self.solutions.names, &self.solutions.vars);
        if engine.store.deref(&self.cont).as_int().is_some() {
            return Ok(DelimOutcome::Answer(bindings));
        }
        let record = Term::compound(
            Atom::SUSPENSION,
            vec![self.cont.clone(), self.ball.clone(), Term::compound(Atom::VARS, self.solutions.vars.clone())],
        );
        let suspension =
            Suspension { frozen: FrozenTerm::freeze(&record, &engine.store), names: self.solutions.names.clone().into() };
        Ok(DelimOutcome::Shifted { payload: FrozenTerm::freeze(&self.ball, &engine.store), suspension })
    }

    /// Every outcome up to and including `Exhausted`.
    pub fn collect_outcomes(mut self) -> Result<Vec<DelimOutcome>> {
        let mut out = Vec::new();
        loop {
            let outcome = self.next_outcome()?;
            let done = outcome == DelimOutcome::Exhausted;
            out.push(outcome);
            if done {
                return Ok(out);
            }
        }
    }
}

#[cfg(test)]
mod tests;
