use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{EngineError, Result};
use crate::terms::{Atom, BindingStore, FrozenTerm, Term};

pub(crate) fn eval(term: &Term, store: &BindingStore) -> Result<BigInt> {
    match store.deref(term) {
        Term::Int(i) => Ok((**i).clone()),
        Term::Var(_) => Err(EngineError::Instantiation("arithmetic expression is not sufficiently instantiated")),
        Term::Compound(c) => {
            let f = c.functor;
            match &c.args[..] {
                [x] => {
                    let x = eval(x, store)?;
                    match f {
                        Atom::MINUS => Ok(-x),
                        Atom::PLUS => Ok(x),
                        Atom::ABS => Ok(x.abs()),
                        _ => Err(not_evaluable(term, store)),
                    }
                }
                [x, y] => {
                    let (x, y) = (eval(x, store)?, eval(y, store)?);
                    match f {
                        Atom::PLUS => Ok(x + y),
                        Atom::MINUS => Ok(x - y),
                        Atom::TIMES => Ok(x * y),
                        Atom::INT_DIV | Atom::MOD if y.is_zero() => Err(EngineError::Evaluation("zero_divisor")),
                        // Truncating division, flooring modulus.
                        Atom::INT_DIV => Ok(x / y),
                        Atom::MOD => Ok(x.mod_floor(&y)),
                        Atom::MIN => Ok(x.min(y)),
                        Atom::MAX => Ok(x.max(y)),
                        _ => Err(not_evaluable(term, store)),
                    }
                }
                _ => Err(not_evaluable(term, store)),
            }
        }
        Term::Atom(_) => Err(not_evaluable(term, store)),
    }
}

fn not_evaluable(term: &Term, store: &BindingStore) -> EngineError {
    let shown = match store.deref(term).indicator() {
        Some((name, arity)) => format!("{}/{arity}", FrozenTerm::ground(Term::Atom(name))),
        None => FrozenTerm::freeze(term, store).to_string(),
    };
    EngineError::NotEvaluable(shown)
}

pub(crate) fn compare(op: Atom, ordering: Ordering) -> bool {
    match op {
        Atom::LT => ordering.is_lt(),
        Atom::LE => ordering.is_le(),
        Atom::GT => ordering.is_gt(),
        Atom::GE => ordering.is_ge(),
        Atom::ARITH_EQ => ordering.is_eq(),
        Atom::ARITH_NE => ordering.is_ne(),
        _ => unreachable!("not a comparison"),
    }
}
