use std::fmt::{self, Write as _};

use super::{Atom, BindingStore, Term};

/// How unbound variables are spelled when printing.
#[derive(Clone, Copy)]
pub enum VarNaming<'a> {
    /// Variables of a frozen term: `_0`, `_1`, ...
    Local,
    /// Live store cells, dereferenced through the given store: `_G<id>`.
    Store(&'a BindingStore),
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Assoc {
    Xfx,
    Xfy,
    Yfx,
}

pub(crate) fn infix_op(name: &str) -> Option<(u32, Assoc)> {
    Some(match name {
        ":-" => (1200, Assoc::Xfx),
        "," => (1000, Assoc::Xfy),
        "=" | "is" | "<" | "=<" | ">" | ">=" | "=:=" | "=\\=" => (700, Assoc::Xfx),
        "+" | "-" => (500, Assoc::Yfx),
        "*" | "//" | "/" | "mod" => (400, Assoc::Yfx),
        _ => return None,
    })
}

pub(crate) fn prefix_op(name: &str) -> Option<u32> {
    match name {
        "-" => Some(200),
        ":-" => Some(1200),
        _ => None,
    }
}

pub(crate) fn is_symbol_char(c: char) -> bool {
    "+-*/\\^<>=~:.?@#&$".contains(c)
}

fn atom_needs_quotes(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        None => true,
        Some(c) if c.is_ascii_lowercase() => !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'),
        Some(_) if name == "[]" => false,
        Some(_) if name == "." => true,
        Some(_) => !name.chars().all(is_symbol_char),
    }
}

pub(crate) fn write_atom(out: &mut impl fmt::Write, name: &str, quoted: bool) -> fmt::Result {
    if !quoted || !atom_needs_quotes(name) {
        return out.write_str(name);
    }
    out.write_char('\'')?;
    for c in name.chars() {
        match c {
            '\'' => out.write_str("\\'")?,
            '\\' => out.write_str("\\\\")?,
            '\n' => out.write_str("\\n")?,
            '\t' => out.write_str("\\t")?,
            c => out.write_char(c)?,
        }
    }
    out.write_char('\'')
}

/// Operator-aware term printer.
pub struct TermDisplay<'a> {
    term: &'a Term,
    naming: VarNaming<'a>,
    quoted: bool,
}

impl<'a> TermDisplay<'a> {
    pub fn new(term: &'a Term, naming: VarNaming<'a>) -> Self {
        TermDisplay { term, naming, quoted: false }
    }

    /// Quote atoms that would not read back as themselves.
    pub fn quoted(mut self, quoted: bool) -> Self {
        self.quoted = quoted;
        self
    }

    fn deref<'t>(&self, term: &'t Term) -> &'t Term
    where
        'a: 't,
    {
        match self.naming {
            VarNaming::Store(store) => store.deref(term),
            VarNaming::Local => term,
        }
    }

    fn write(&self, out: &mut fmt::Formatter<'_>, term: &Term, max_prio: u32) -> fmt::Result {
        let term = self.deref(term);
        match term {
            Term::Var(v) => match self.naming {
                VarNaming::Local => write!(out, "_{}", v.0),
                VarNaming::Store(_) => write!(out, "_G{}", v.0),
            },
            Term::Int(i) => write!(out, "{i}"),
            Term::Atom(a) => write_atom(out, a.name(), self.quoted),
            Term::Compound(c) => {
                if c.functor == Atom::DOT && c.args.len() == 2 {
                    return self.write_list(out, term);
                }
                let name = c.functor.name();
                if c.args.len() == 2 {
                    if let Some((prio, assoc)) = infix_op(name) {
                        let (lmax, rmax) = match assoc {
                            Assoc::Xfx => (prio - 1, prio - 1),
                            Assoc::Xfy => (prio - 1, prio),
                            Assoc::Yfx => (prio, prio - 1),
                        };
                        let open = prio > max_prio;
                        if open {
                            out.write_char('(')?;
                        }
                        self.write_operand(out, &c.args[0], lmax)?;
                        if name.chars().all(|ch| ch.is_ascii_alphabetic()) {
                            write!(out, " {name} ")?;
                        } else if name == "," {
                            out.write_char(',')?;
                        } else {
                            out.write_str(name)?;
                        }
                        self.write_operand(out, &c.args[1], rmax)?;
                        if open {
                            out.write_char(')')?;
                        }
                        return Ok(());
                    }
                }
                if c.args.len() == 1 {
                    if let Some(prio) = prefix_op(name) {
                        let open = prio > max_prio;
                        if open {
                            out.write_char('(')?;
                        }
                        out.write_str(name)?;
                        let arg = self.deref(&c.args[0]);
                        let needs_parens = matches!(arg, Term::Int(_))
                            || matches!(arg, Term::Atom(a) if is_operator_atom(*a))
                            || matches!(arg, Term::Compound(ac) if is_operator_term(ac.functor, ac.args.len()));
                        if needs_parens {
                            out.write_char('(')?;
                            self.write(out, arg, 1200)?;
                            out.write_char(')')?;
                        } else {
                            self.write(out, arg, prio)?;
                        }
                        if open {
                            out.write_char(')')?;
                        }
                        return Ok(());
                    }
                }
                write_atom(out, name, self.quoted)?;
                out.write_char('(')?;
                for (i, arg) in c.args.iter().enumerate() {
                    if i > 0 {
                        out.write_char(',')?;
                    }
                    self.write(out, arg, 999)?;
                }
                out.write_char(')')
            }
        }
    }

    // Operands of operators: negative numbers and prefix-operator terms are
    // bracketed so that adjacent symbol characters never fuse when re-read.
    fn write_operand(&self, out: &mut fmt::Formatter<'_>, term: &Term, max_prio: u32) -> fmt::Result {
        let term = self.deref(term);
        let bracket = match term {
            Term::Int(i) => i.sign() == num_bigint::Sign::Minus,
            Term::Atom(a) => is_operator_atom(*a),
            Term::Compound(c) => c.args.len() == 1 && prefix_op(c.functor.name()).is_some(),
            Term::Var(_) => false,
        };
        if bracket {
            out.write_char('(')?;
            self.write(out, term, 1200)?;
            out.write_char(')')
        } else {
            self.write(out, term, max_prio)
        }
    }

    fn write_list<'t>(&self, out: &mut fmt::Formatter<'_>, mut term: &'t Term) -> fmt::Result
    where
        'a: 't,
    {
        out.write_char('[')?;
        let mut first = true;
        loop {
            match self.deref(term) {
                Term::Compound(c) if c.functor == Atom::DOT && c.args.len() == 2 => {
                    if !first {
                        out.write_char(',')?;
                    }
                    first = false;
                    self.write(out, &c.args[0], 999)?;
                    term = &c.args[1];
                }
                Term::Atom(Atom::NIL) => break,
                tail => {
                    out.write_char('|')?;
                    self.write(out, tail, 999)?;
                    break;
                }
            }
        }
        out.write_char(']')
    }
}

fn is_operator_atom(a: Atom) -> bool {
    let name = a.name();
    infix_op(name).is_some() || prefix_op(name).is_some()
}

fn is_operator_term(functor: Atom, arity: usize) -> bool {
    let name = functor.name();
    (arity == 2 && infix_op(name).is_some()) || (arity == 1 && prefix_op(name).is_some())
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.term, 1200)
    }
}
