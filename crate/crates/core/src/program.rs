//! Loaded programs: clauses grouped by predicate, plus the tabled set.

use std::fmt;
use std::sync::Arc;

use indexmap::{IndexMap, IndexSet};
use rustc_hash::FxHashMap;

use crate::terms::{Atom, FrozenTerm, Term, Token};

/// Predicate indicator `name/arity`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct PredKey {
    pub name: Atom,
    pub arity: u32,
}

impl PredKey {
    pub fn new(name: &str, arity: u32) -> Self {
        PredKey { name: Atom::new(name), arity }
    }

    pub fn of(term: &Term) -> Option<PredKey> {
        term.indicator().map(|(name, arity)| PredKey { name, arity: arity as u32 })
    }
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::terms::TermDisplay::new(&Term::Atom(self.name), crate::terms::VarNaming::Local)
            .quoted(true)
            .fmt(f)?;
        write!(f, "/{}", self.arity)
    }
}

/// A fact or rule. Variables are local indices `0..var_count` shared between
/// head and body.
#[derive(Clone, Debug)]
pub struct Clause {
    pub(crate) head: Term,
    pub(crate) body: Vec<Term>,
    pub(crate) var_count: u32,
}

impl Clause {
    pub(crate) fn new(head: Term, body: Vec<Term>, var_count: u32) -> Self {
        Clause { head, body, var_count }
    }

    pub fn head(&self) -> FrozenTerm {
        FrozenTerm::from_local(self.head.clone(), self.var_count)
    }

    pub fn body(&self) -> &[Term] {
        &self.body
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    /// The clause as a single `Head :- Body` (or `Head`) frozen term.
    pub fn to_term(&self) -> FrozenTerm {
        let term = match self.body.split_last() {
            None => self.head.clone(),
            Some((last, init)) => {
                let body = init
                    .iter()
                    .rev()
                    .fold(last.clone(), |acc, g| Term::compound(Atom::COMMA, vec![g.clone(), acc]));
                Term::compound(Atom::NECK, vec![self.head.clone(), body])
            }
        };
        FrozenTerm::from_local(term, self.var_count)
    }
}

fn first_arg_key(head: &Term) -> Option<Token> {
    match head.args().first()? {
        Term::Var(_) => None,
        Term::Atom(a) => Some(Token::Atom(*a)),
        Term::Int(i) => Some(Token::Int(i.clone())),
        Term::Compound(c) => Some(Token::Functor(c.functor, c.args.len() as u32)),
    }
}

/// Clauses of one predicate with a first-argument index. Every candidate
/// list is in source order.
#[derive(Clone, Debug, Default)]
pub struct Predicate {
    clauses: Vec<Clause>,
    all: Arc<Vec<u32>>,
    var_first: Arc<Vec<u32>>,
    by_first: FxHashMap<Token, Arc<Vec<u32>>>,
}

impl Predicate {
    fn push(&mut self, clause: Clause) {
        let idx = self.clauses.len() as u32;
        let key = first_arg_key(&clause.head);
        self.clauses.push(clause);
        Arc::make_mut(&mut self.all).push(idx);
        match key {
            Some(key) => {
                let var_first = &self.var_first;
                let list = self.by_first.entry(key).or_insert_with(|| Arc::new(var_first.as_ref().clone()));
                Arc::make_mut(list).push(idx);
            }
            None => {
                Arc::make_mut(&mut self.var_first).push(idx);
                for list in self.by_first.values_mut() {
                    Arc::make_mut(list).push(idx);
                }
            }
        }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub(crate) fn clause(&self, idx: u32) -> &Clause {
        &self.clauses[idx as usize]
    }

    /// Clauses whose head may match a goal with the given (dereferenced)
    /// first argument.
    pub(crate) fn candidates(&self, first_arg: Option<&Term>) -> &Arc<Vec<u32>> {
        let key = match first_arg {
            None | Some(Term::Var(_)) => return &self.all,
            Some(Term::Atom(a)) => Token::Atom(*a),
            Some(Term::Int(i)) => Token::Int(i.clone()),
            Some(Term::Compound(c)) => Token::Functor(c.functor, c.args.len() as u32),
        };
        self.by_first.get(&key).unwrap_or(&self.var_first)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Program {
    preds: IndexMap<PredKey, Arc<Predicate>>,
    tabled: IndexSet<PredKey>,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_clause(&mut self, clause: Clause) {
        let key = PredKey::of(&clause.head).expect("clause head is callable");
        Arc::make_mut(self.preds.entry(key).or_default()).push(clause);
    }

    pub fn add_table(&mut self, key: PredKey) {
        self.tabled.insert(key);
    }

    /// Appends every clause and table declaration of `other`.
    pub fn extend(&mut self, other: Program) {
        for (_, pred) in other.preds {
            for clause in pred.clauses.iter().cloned() {
                self.add_clause(clause);
            }
        }
        self.tabled.extend(other.tabled);
    }

    /// Drops all table declarations, turning tabled predicates into plain ones.
    pub fn without_tabling(mut self) -> Program {
        self.tabled.clear();
        self
    }

    pub fn is_tabled(&self, key: &PredKey) -> bool {
        self.tabled.contains(key)
    }

    pub fn tabled(&self) -> impl Iterator<Item = &PredKey> {
        self.tabled.iter()
    }

    pub fn predicate(&self, key: &PredKey) -> Option<&Arc<Predicate>> {
        self.preds.get(key)
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&PredKey, &Arc<Predicate>)> {
        self.preds.iter()
    }

    pub fn is_defined(&self, key: &PredKey) -> bool {
        self.preds.contains_key(key) || self.tabled.contains(key)
    }

    pub fn clauses(&self, key: &PredKey) -> &[Clause] {
        self.preds.get(key).map(|p| p.clauses()).unwrap_or(&[])
    }
}
