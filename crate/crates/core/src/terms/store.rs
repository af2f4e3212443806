use rustc_hash::FxHashMap;

use super::{rebuild, Term, Var, Visit};

/// Position in the trail; undoing to it unbinds every cell bound since.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TrailMark(usize);

/// Variable bindings plus the trail used to undo them on backtracking.
///
/// Cell identifiers come from a monotonic counter and are never reused by
/// the same store. Only bound cells occupy memory.
#[derive(Debug, Default)]
pub struct BindingStore {
    bindings: FxHashMap<Var, Term>,
    trail: Vec<Var>,
    next_var: u64,
    scratch: Vec<(Term, Term)>,
}

impl BindingStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh_var(&mut self) -> Term {
        Term::Var(Var(self.fresh_block(1)))
    }

    /// Reserves `count` consecutive fresh cells and returns the first id.
    pub(crate) fn fresh_block(&mut self, count: u32) -> u64 {
        let base = self.next_var;
        self.next_var += u64::from(count);
        base
    }

    pub fn lookup(&self, var: Var) -> Option<&Term> {
        self.bindings.get(&var)
    }

    pub fn deref<'a>(&'a self, mut term: &'a Term) -> &'a Term {
        while let Term::Var(v) = term {
            match self.bindings.get(v) {
                Some(bound) => term = bound,
                None => break,
            }
        }
        term
    }

    pub fn mark(&self) -> TrailMark {
        TrailMark(self.trail.len())
    }

    pub fn undo_to(&mut self, mark: TrailMark) {
        while self.trail.len() > mark.0 {
            let var = self.trail.pop().unwrap();
            self.bindings.remove(&var);
        }
    }

    pub fn bound_count(&self) -> usize {
        self.bindings.len()
    }

    pub(crate) fn bind(&mut self, var: Var, value: Term) {
        debug_assert!(!self.bindings.contains_key(&var));
        self.bindings.insert(var, value);
        self.trail.push(var);
    }

    /// Unifies `a` and `b` without occurs check. On failure some bindings may
    /// remain; the caller undoes to a mark taken beforehand.
    pub fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let mut work = std::mem::take(&mut self.scratch);
        work.clear();
        work.push((a.clone(), b.clone()));
        let mut ok = true;
        while let Some((x, y)) = work.pop() {
            let x = self.deref(&x).clone();
            let y = self.deref(&y).clone();
            match (&x, &y) {
                (Term::Var(vx), Term::Var(vy)) => {
                    if vx != vy {
                        // Bind the younger cell to the older one.
                        if vx > vy {
                            self.bind(*vx, y);
                        } else {
                            self.bind(*vy, x);
                        }
                    }
                }
                (Term::Var(v), _) => self.bind(*v, y),
                (_, Term::Var(v)) => self.bind(*v, x),
                (Term::Atom(p), Term::Atom(q)) => {
                    if p != q {
                        ok = false;
                        break;
                    }
                }
                (Term::Int(p), Term::Int(q)) => {
                    if p != q {
                        ok = false;
                        break;
                    }
                }
                (Term::Compound(p), Term::Compound(q)) => {
                    if std::sync::Arc::ptr_eq(p, q) {
                        continue;
                    }
                    if p.functor != q.functor || p.args.len() != q.args.len() {
                        ok = false;
                        break;
                    }
                    for (l, r) in p.args.iter().zip(q.args.iter()).rev() {
                        work.push((l.clone(), r.clone()));
                    }
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        work.clear();
        self.scratch = work;
        ok
    }

    /// Fully dereferences `term`, leaving only unbound variables.
    pub fn resolve(&self, term: &Term) -> Term {
        self.resolve_changed(term).unwrap_or_else(|| term.clone())
    }

    // `None` when `term` is already fully dereferenced.
    fn resolve_changed(&self, term: &Term) -> Option<Term> {
        rebuild(term, |t| match t {
            Term::Var(v) => match self.lookup(*v) {
                Some(bound) => Visit::Descend(bound.clone()),
                None => Visit::Keep,
            },
            _ => Visit::Keep,
        })
    }

    /// Copies `term`, replacing each distinct unbound variable by a fresh one
    /// while preserving sharing.
    pub fn copy_term(&mut self, term: &Term) -> Term {
        let frozen = super::FrozenTerm::freeze(term, self);
        frozen.instantiate(self)
    }
}
