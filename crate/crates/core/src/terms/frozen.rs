use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use rustc_hash::FxHashMap;

use super::{rebuild, Atom, BindingStore, Term, TermDisplay, Var, VarNaming, Visit};

/// A term detached from any store. Its variables are numbered `0..var_count`
/// in order of first occurrence (preorder), so two frozen variants of the
/// same term are structurally equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FrozenTerm {
    term: Term,
    var_count: u32,
}

impl FrozenTerm {
    /// Snapshot of `term` under the bindings in `store`.
    pub fn freeze(term: &Term, store: &BindingStore) -> FrozenTerm {
        let mut map = FxHashMap::default();
        let term = freeze_changed(term, store, &mut map).unwrap_or_else(|| term.clone());
        FrozenTerm { term, var_count: map.len() as u32 }
    }

    pub fn ground(term: Term) -> FrozenTerm {
        FrozenTerm { term, var_count: 0 }
    }

    /// Wraps a term whose variables are already local indices `0..var_count`.
    pub(crate) fn from_local(term: Term, var_count: u32) -> FrozenTerm {
        FrozenTerm { term, var_count }
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    pub fn is_ground(&self) -> bool {
        self.var_count == 0
    }

    /// The underlying term; its variables are local indices, not store cells.
    pub fn local_term(&self) -> &Term {
        &self.term
    }

    /// A copy of the term over fresh store cells.
    pub fn instantiate(&self, store: &mut BindingStore) -> Term {
        if self.var_count == 0 {
            return self.term.clone();
        }
        let base = store.fresh_block(self.var_count);
        offset_vars(&self.term, base)
    }

    pub(crate) fn instantiate_at(term: &Term, base: u64) -> Term {
        offset_vars(term, base)
    }

    pub fn variant_key(&self) -> VariantKey {
        // Local numbering is already first-occurrence order.
        let mut tokens = Vec::new();
        let mut stack = vec![&self.term];
        while let Some(t) = stack.pop() {
            match t {
                Term::Var(v) => tokens.push(Token::Var(v.0 as u32)),
                Term::Atom(a) => tokens.push(Token::Atom(*a)),
                Term::Int(i) => tokens.push(Token::Int(i.clone())),
                Term::Compound(c) => {
                    tokens.push(Token::Functor(c.functor, c.args.len() as u32));
                    stack.extend(c.args.iter().rev());
                }
            }
        }
        VariantKey(tokens)
    }

    /// Rebuilds the canonical term spelled by a complete token sequence.
    pub fn from_tokens(tokens: &[Token]) -> FrozenTerm {
        let mut var_count = 0u32;
        let term = build_from_tokens(tokens, &mut var_count);
        FrozenTerm { term, var_count }
    }
}

impl fmt::Display for FrozenTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        TermDisplay::new(&self.term, VarNaming::Local).quoted(true).fmt(f)
    }
}

fn freeze_changed(term: &Term, store: &BindingStore, map: &mut FxHashMap<Var, u32>) -> Option<Term> {
    rebuild(term, |t| match t {
        Term::Var(v) => match store.lookup(*v) {
            Some(bound) => Visit::Descend(bound.clone()),
            None => {
                let next = map.len() as u32;
                let local = *map.entry(*v).or_insert(next);
                Visit::Replace(Term::Var(Var(u64::from(local))))
            }
        },
        _ => Visit::Keep,
    })
}

fn offset_vars(term: &Term, base: u64) -> Term {
    rebuild(term, |t| match t {
        Term::Var(v) => Visit::Replace(Term::Var(Var(base + v.0))),
        _ => Visit::Keep,
    })
    .unwrap_or_else(|| term.clone())
}

fn build_from_tokens(tokens: &[Token], var_count: &mut u32) -> Term {
    // (functor, arity) of each open compound; finished arguments on `done`.
    let mut open: Vec<(Atom, usize, usize)> = Vec::new();
    let mut done: Vec<Term> = Vec::new();
    for token in tokens {
        let term = match token {
            Token::Var(i) => {
                *var_count = (*var_count).max(i + 1);
                Term::Var(Var(u64::from(*i)))
            }
            Token::Atom(a) => Term::Atom(*a),
            Token::Int(i) => Term::Int(i.clone()),
            Token::Functor(f, n) => {
                open.push((*f, *n as usize, done.len()));
                continue;
            }
        };
        done.push(term);
        while let Some(&(f, n, start)) = open.last() {
            if done.len() - start < n {
                break;
            }
            open.pop();
            let args = done.split_off(start);
            done.push(Term::compound(f, args));
        }
    }
    debug_assert!(open.is_empty() && done.len() == 1);
    done.pop().expect("complete token sequence")
}

/// One symbol of a canonical preorder term encoding.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Token {
    Functor(Atom, u32),
    Atom(Atom),
    Int(Arc<BigInt>),
    /// Index of the variable's first occurrence.
    Var(u32),
}

/// Canonical encoding of a term up to variable renaming: equal keys iff the
/// terms are variants.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VariantKey(Vec<Token>);

impl VariantKey {
    pub fn of(term: &Term, store: &BindingStore) -> VariantKey {
        let mut tokens = Vec::new();
        let mut vars: FxHashMap<Var, u32> = FxHashMap::default();
        let mut stack = vec![term];
        while let Some(t) = stack.pop() {
            match store.deref(t) {
                Term::Var(v) => {
                    let next = vars.len() as u32;
                    tokens.push(Token::Var(*vars.entry(*v).or_insert(next)));
                }
                Term::Atom(a) => tokens.push(Token::Atom(*a)),
                Term::Int(i) => tokens.push(Token::Int(i.clone())),
                Term::Compound(c) => {
                    tokens.push(Token::Functor(c.functor, c.args.len() as u32));
                    stack.extend(c.args.iter().rev());
                }
            }
        }
        VariantKey(tokens)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn to_term(&self) -> FrozenTerm {
        FrozenTerm::from_tokens(&self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn var(s: &mut BindingStore) -> Term {
        s.fresh_var()
    }

    #[test]
    fn renamed_terms_share_a_key() {
        let mut s = BindingStore::new();
        let (x, y, a, b) = (var(&mut s), var(&mut s), var(&mut s), var(&mut s));
        assert_eq!(
            VariantKey::of(&Term::app("p", vec![x, y]), &s),
            VariantKey::of(&Term::app("p", vec![a, b]), &s)
        );
    }

    #[test]
    fn sharing_changes_the_key() {
        let mut s = BindingStore::new();
        let (x, y) = (var(&mut s), var(&mut s));
        assert_ne!(
            VariantKey::of(&Term::app("p", vec![x.clone(), x.clone()]), &s),
            VariantKey::of(&Term::app("p", vec![x, y]), &s)
        );
    }

    #[test]
    fn constant_differs_from_variable() {
        let mut s = BindingStore::new();
        let (x, y) = (var(&mut s), var(&mut s));
        assert_ne!(
            VariantKey::of(&Term::app("p", vec![Term::atom("a"), y.clone()]), &s),
            VariantKey::of(&Term::app("p", vec![x, y]), &s)
        );
    }

    #[test]
    fn key_round_trips_through_tokens() {
        let mut s = BindingStore::new();
        let (x, y) = (var(&mut s), var(&mut s));
        let t = Term::app("f", vec![y.clone(), Term::app("g", vec![x, y]), Term::int(-7)]);
        let key = VariantKey::of(&t, &s);
        let rebuilt = key.to_term();
        assert_eq!(rebuilt, FrozenTerm::freeze(&t, &s));
        assert_eq!(rebuilt.var_count(), 2);
        assert_eq!(rebuilt.variant_key(), key);
    }

    #[test]
    fn instantiation_uses_fresh_cells() {
        let mut s = BindingStore::new();
        let x = var(&mut s);
        let frozen = FrozenTerm::freeze(&Term::app("f", vec![x.clone(), x.clone()]), &s);
        let one = frozen.instantiate(&mut s);
        let two = frozen.instantiate(&mut s);
        assert!(s.unify(&one.args()[0], &Term::atom("a")));
        assert_eq!(s.resolve(&one.args()[1]), Term::atom("a"));
        assert!(s.resolve(&two).args()[0].as_var().is_some());
        assert!(s.lookup(x.as_var().unwrap()).is_none());
    }

    /// Random terms over a small signature; variables drawn from a pool so
    /// that sharing occurs.
    #[derive(Clone, Debug)]
    enum Shape {
        Var(usize),
        Atom(u8),
        Int(i8),
        App(u8, Vec<Shape>),
    }

    fn shape() -> impl Strategy<Value = Shape> {
        let leaf = prop_oneof![
            (0usize..4).prop_map(Shape::Var),
            (0u8..3).prop_map(Shape::Atom),
            any::<i8>().prop_map(Shape::Int),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            ((0u8..2), prop::collection::vec(inner, 1..4)).prop_map(|(f, args)| Shape::App(f, args))
        })
    }

    // Unification has no occurs check; cyclic bindings do not resolve.
    fn finite(s: &BindingStore, t: &Term) -> bool {
        let mut budget = 100_000;
        let mut stack = vec![t.clone()];
        while let Some(t) = stack.pop() {
            budget -= 1;
            if budget == 0 {
                return false;
            }
            if let Term::Compound(c) = s.deref(&t) {
                stack.extend(c.args.iter().cloned());
            }
        }
        true
    }

    fn build(shape: &Shape, pool: &[Term]) -> Term {
        match shape {
            Shape::Var(i) => pool[*i].clone(),
            Shape::Atom(a) => Term::atom(["a", "b", "c"][*a as usize]),
            Shape::Int(i) => Term::int(*i),
            Shape::App(f, args) => Term::app(["f", "g"][*f as usize], args.iter().map(|a| build(a, pool)).collect()),
        }
    }

    proptest! {
        #[test]
        fn copy_preserves_variant_key(sh in shape()) {
            let mut s = BindingStore::new();
            let pool: Vec<Term> = (0..4).map(|_| s.fresh_var()).collect();
            let t = build(&sh, &pool);
            let copy = s.copy_term(&t);
            prop_assert_eq!(VariantKey::of(&copy, &s), VariantKey::of(&t, &s));
        }

        #[test]
        fn unify_success_is_symmetric(a in shape(), b in shape()) {
            let mut s = BindingStore::new();
            let pool: Vec<Term> = (0..4).map(|_| s.fresh_var()).collect();
            let (ta, tb) = (build(&a, &pool), build(&b, &pool));
            let mark = s.mark();
            let forward = s.unify(&ta, &tb);
            if forward && finite(&s, &ta) && finite(&s, &tb) {
                let unified_a = s.resolve(&ta);
                let unified_b = s.resolve(&tb);
                prop_assert_eq!(VariantKey::of(&unified_a, &s), VariantKey::of(&unified_b, &s));
            }
            s.undo_to(mark);
            let backward = s.unify(&tb, &ta);
            prop_assert_eq!(forward, backward);
        }

        #[test]
        fn undo_restores_keys(a in shape(), b in shape()) {
            let mut s = BindingStore::new();
            let pool: Vec<Term> = (0..4).map(|_| s.fresh_var()).collect();
            let (ta, tb) = (build(&a, &pool), build(&b, &pool));
            let before = (VariantKey::of(&ta, &s), VariantKey::of(&tb, &s));
            let mark = s.mark();
            s.unify(&ta, &tb);
            s.undo_to(mark);
            prop_assert_eq!((VariantKey::of(&ta, &s), VariantKey::of(&tb, &s)), before);
        }

        #[test]
        fn keys_equal_iff_frozen_equal(a in shape(), b in shape()) {
            let mut s = BindingStore::new();
            let pool_a: Vec<Term> = (0..4).map(|_| s.fresh_var()).collect();
            let pool_b: Vec<Term> = (0..4).map(|_| s.fresh_var()).collect();
            let (ta, tb) = (build(&a, &pool_a), build(&b, &pool_b));
            let keys_equal = VariantKey::of(&ta, &s) == VariantKey::of(&tb, &s);
            prop_assert_eq!(keys_equal, FrozenTerm::freeze(&ta, &s) == FrozenTerm::freeze(&tb, &s));
            prop_assert_eq!(keys_equal, is_variant(&ta, &tb));
        }
    }

    // Independent variant check: a consistent bijection between variables.
    fn is_variant(a: &Term, b: &Term) -> bool {
        fn walk(a: &Term, b: &Term, fwd: &mut FxHashMap<Var, Var>, bwd: &mut FxHashMap<Var, Var>) -> bool {
            match (a, b) {
                (Term::Var(x), Term::Var(y)) => {
                    *fwd.entry(*x).or_insert(*y) == *y && *bwd.entry(*y).or_insert(*x) == *x
                }
                (Term::Atom(x), Term::Atom(y)) => x == y,
                (Term::Int(x), Term::Int(y)) => x == y,
                (Term::Compound(x), Term::Compound(y)) => {
                    x.functor == y.functor
                        && x.args.len() == y.args.len()
                        && x.args.iter().zip(y.args.iter()).all(|(p, q)| walk(p, q, fwd, bwd))
                }
                _ => false,
            }
        }
        walk(a, b, &mut FxHashMap::default(), &mut FxHashMap::default())
    }
}
