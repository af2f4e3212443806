//! Logic terms, the binding store, and store-independent frozen copies.
//!
//! A [`Term`] is an immutable, cheaply clonable tree. Variables are store
//! cells: a `Term::Var` carries only an identifier and its value (if any)
//! lives in a [`BindingStore`]. Anything that must outlive backtracking
//! (answers, suspended continuations, clauses) is kept as a [`FrozenTerm`],
//! whose variables are numbered locally and instantiated with fresh cells on
//! demand.

pub(crate) mod display;
mod frozen;
mod store;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, LazyLock, RwLock};

use num_bigint::BigInt;

pub use display::{TermDisplay, VarNaming};
pub use frozen::{FrozenTerm, Token, VariantKey};
pub use store::{BindingStore, TrailMark};

struct Interner {
    names: Vec<&'static str>,
    ids: HashMap<&'static str, u32>,
}

static INTERNER: LazyLock<RwLock<Interner>> = LazyLock::new(|| {
    let mut interner = Interner { names: Vec::new(), ids: HashMap::new() };
    for name in KNOWN_NAMES {
        let id = interner.names.len() as u32;
        interner.names.push(name);
        interner.ids.insert(name, id);
    }
    RwLock::new(interner)
});

/// An interned symbol. Symbols are global to the process and never freed.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom(u32);

macro_rules! well_known {
    ($($konst:ident => $text:literal,)*) => {
        #[allow(non_camel_case_types, clippy::upper_case_acronyms)]
        #[repr(u32)]
        enum Known { $($konst,)* }

        const KNOWN_NAMES: &[&str] = &[$($text,)*];

        impl Atom {
            $(pub const $konst: Atom = Atom(Known::$konst as u32);)*
        }
    };
}

well_known! {
    NIL => "[]",
    DOT => ".",
    COMMA => ",",
    NECK => ":-",
    TRUE => "true",
    FAIL => "fail",
    FALSE => "false",
    EQ => "=",
    IS => "is",
    LT => "<",
    LE => "=<",
    GT => ">",
    GE => ">=",
    ARITH_EQ => "=:=",
    ARITH_NE => "=\\=",
    PLUS => "+",
    MINUS => "-",
    TIMES => "*",
    INT_DIV => "//",
    MOD => "mod",
    MIN => "min",
    MAX => "max",
    ABS => "abs",
    SLASH => "/",
    TABLE => "table",
    WRITELN => "writeln",
    CALL => "call",
    RESET => "reset",
    SHIFT => "shift",
    CALL_INFO => "call_info",
    CONT => "$cont$",
    RESET_MARK => "$reset",
    DELIM_MARK => "$delim",
    ACTIVATE => "$activate",
    COMPLETION => "$completion",
    ANSWERS => "$answers",
    WORKER => "$worker",
    DEPENDENCY => "dependency",
    SUSPENSION => "$suspension",
    VARS => "$vars",
}

impl Atom {
    pub fn new(name: &str) -> Atom {
        if let Some(&id) = INTERNER.read().unwrap().ids.get(name) {
            return Atom(id);
        }
        let mut interner = INTERNER.write().unwrap();
        if let Some(&id) = interner.ids.get(name) {
            return Atom(id);
        }
        let name: &'static str = Box::leak(name.to_owned().into_boxed_str());
        let id = interner.names.len() as u32;
        interner.names.push(name);
        interner.ids.insert(name, id);
        Atom(id)
    }

    pub fn name(self) -> &'static str {
        INTERNER.read().unwrap().names[self.0 as usize]
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.name())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A store cell identifier.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var(pub(crate) u64);

impl Var {
    pub fn id(self) -> u64 {
        self.0
    }
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub struct Compound {
    pub functor: Atom,
    pub args: Box<[Term]>,
}

impl Compound {
    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Atom(Atom),
    Int(Arc<BigInt>),
    Compound(Arc<Compound>),
}

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::Atom(Atom::new(name))
    }

    pub fn int(value: impl Into<BigInt>) -> Term {
        Term::Int(Arc::new(value.into()))
    }

    /// Builds `functor(args...)`, collapsing to an atom when `args` is empty.
    pub fn compound(functor: Atom, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Atom(functor)
        } else {
            Term::Compound(Arc::new(Compound { functor, args: args.into_boxed_slice() }))
        }
    }

    pub fn app(functor: &str, args: Vec<Term>) -> Term {
        Term::compound(Atom::new(functor), args)
    }

    /// Builds a proper list terminated by `tail`.
    pub fn list(items: impl IntoIterator<Item = Term, IntoIter: DoubleEndedIterator>, tail: Term) -> Term {
        items
            .into_iter()
            .rev()
            .fold(tail, |acc, item| Term::compound(Atom::DOT, vec![item, acc]))
    }

    /// Principal functor and arity of a callable term.
    pub fn indicator(&self) -> Option<(Atom, usize)> {
        match self {
            Term::Atom(a) => Some((*a, 0)),
            Term::Compound(c) => Some((c.functor, c.arity())),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(c) => &c.args,
            _ => &[],
        }
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Term::Var(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_atom(&self) -> Option<Atom> {
        match self {
            Term::Atom(a) => Some(*a),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Term::Int(i) => Some(i),
            _ => None,
        }
    }

    pub fn is_callable(&self) -> bool {
        matches!(self, Term::Atom(_) | Term::Compound(_))
    }
}

/// How [`rebuild`] treats one visited subterm.
pub(crate) enum Visit {
    Keep,
    /// Use this term as is.
    Replace(Term),
    /// Visit this term in place of the current one.
    Descend(Term),
}

/// Rebuilds `root`, visiting subterms in preorder and copying only the
/// compounds on changed paths. `None` if nothing changed. Iterative, so
/// arbitrarily deep terms are fine.
pub(crate) fn rebuild(root: &Term, mut visit: impl FnMut(&Term) -> Visit) -> Option<Term> {
    enum Task {
        Enter(Term),
        Build(Arc<Compound>, bool),
    }
    let mut tasks = vec![Task::Enter(root.clone())];
    let mut out: Vec<(Term, bool)> = Vec::new();
    while let Some(task) = tasks.pop() {
        match task {
            Task::Enter(mut term) => {
                let mut moved = false;
                let replaced = loop {
                    match visit(&term) {
                        Visit::Keep => break None,
                        Visit::Replace(r) => break Some(r),
                        Visit::Descend(next) => {
                            term = next;
                            moved = true;
                        }
                    }
                };
                match (replaced, term) {
                    (Some(r), _) => out.push((r, true)),
                    (None, Term::Compound(c)) => {
                        tasks.push(Task::Build(c.clone(), moved));
                        tasks.extend(c.args.iter().rev().map(|a| Task::Enter(a.clone())));
                    }
                    (None, other) => out.push((other, moved)),
                }
            }
            Task::Build(c, moved) => {
                let kids = out.split_off(out.len() - c.args.len());
                if kids.iter().any(|(_, changed)| *changed) {
                    let args = kids.into_iter().map(|(t, _)| t).collect();
                    out.push((Term::compound(c.functor, args), true));
                } else {
                    out.push((Term::Compound(c), moved));
                }
            }
        }
    }
    let (term, changed) = out.pop().expect("one result");
    changed.then_some(term)
}

impl Drop for Compound {
    // Long right-nested structures (lists, conjunctions) would otherwise be
    // dropped recursively.
    fn drop(&mut self) {
        let unique = |t: &Term| matches!(t, Term::Compound(c) if Arc::strong_count(c) == 1);
        if !self.args.iter().any(unique) {
            return;
        }
        let mut pending: Vec<Arc<Compound>> = Vec::new();
        let take = |args: &mut Box<[Term]>, pending: &mut Vec<Arc<Compound>>| {
            for arg in std::mem::take(args).into_vec() {
                if let Term::Compound(c) = arg {
                    if Arc::strong_count(&c) == 1 {
                        pending.push(c);
                    }
                }
            }
        };
        take(&mut self.args, &mut pending);
        while let Some(c) = pending.pop() {
            if let Ok(mut inner) = Arc::try_unwrap(c) {
                take(&mut inner.args, &mut pending);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_is_stable() {
        assert_eq!(Atom::new("foo"), Atom::new("foo"));
        assert_ne!(Atom::new("foo"), Atom::new("bar"));
        assert_eq!(Atom::new("foo").name(), "foo");
        assert_eq!(Atom::new(","), Atom::COMMA);
        assert_eq!(Atom::DELIM_MARK.name(), "$delim");
    }

    #[test]
    fn zero_arity_compound_is_an_atom() {
        assert_eq!(Term::app("a", vec![]), Term::atom("a"));
    }

    #[test]
    fn dropping_a_long_list_does_not_overflow() {
        let list = Term::list((0..200_000).map(Term::int).collect::<Vec<_>>(), Term::Atom(Atom::NIL));
        drop(list);
    }
}
