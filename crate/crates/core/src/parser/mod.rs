//! Reader for program files and queries.
//!
//! Supported syntax: atoms (plain and quoted), variables, integers, compound
//! terms, lists, `%` and `/* */` comments, and a fixed operator table
//! (`:-`, `,`, `=`, `is`, the arithmetic comparisons, `+`, `-`, `*`, `//`,
//! `/`, `mod`). The only directive is `:- table Name/Arity, ...`.

mod lexer;

use crate::error::ParseError;
use crate::program::{Clause, PredKey, Program};
use crate::terms::display::{infix_op, prefix_op, Assoc};
use crate::terms::{Atom, FrozenTerm, Term, Var};

use lexer::{Lexer, Spanned, Tok};

/// A parsed query: goals over local variables `0..var_count`.
#[derive(Clone, Debug)]
pub struct Query {
    pub(crate) goals: Vec<Term>,
    pub(crate) var_count: u32,
    pub(crate) var_names: Vec<(String, u32)>,
}

impl Query {
    pub fn parse(text: &str) -> Result<Query, ParseError> {
        parse_query(text)
    }

    /// The goals as one frozen conjunction.
    pub fn goals(&self) -> Vec<FrozenTerm> {
        self.goals.iter().map(|g| FrozenTerm::from_local(g.clone(), self.var_count)).collect()
    }

    pub fn goal_count(&self) -> usize {
        self.goals.len()
    }

    /// Named variables in order of first appearance, excluding `_`-prefixed
    /// ones.
    pub fn answer_vars(&self) -> impl Iterator<Item = &str> {
        self.var_names.iter().map(|(n, _)| n.as_str()).filter(|n| !n.starts_with('_'))
    }
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut parser = Parser::new(text)?;
    let mut program = Program::new();
    while !matches!(parser.peek().tok, Tok::Eof) {
        parser.reset_scope();
        if let Tok::Atom { name, quoted: false } = &parser.peek().tok {
            if name == ":-" {
                parser.directive(&mut program)?;
                continue;
            }
        }
        let start = parser.peek().clone();
        let term = parser.expr(1200)?;
        parser.expect_end()?;
        program.add_clause(parser.clause(term, &start)?);
    }
    Ok(program)
}

pub fn parse_query(text: &str) -> Result<Query, ParseError> {
    let mut parser = Parser::new(text)?;
    let start = parser.peek().clone();
    if matches!(start.tok, Tok::Eof) {
        return Err(ParseError::new(start.line, start.column, "empty query"));
    }
    let term = parser.expr(1200)?;
    if matches!(parser.peek().tok, Tok::End) {
        parser.advance();
    }
    let trailing = parser.peek();
    if !matches!(trailing.tok, Tok::Eof) {
        return Err(ParseError::new(trailing.line, trailing.column, "unexpected text after query"));
    }
    let goals = body_goals(term, &start)?;
    Ok(Query { goals, var_count: parser.var_count, var_names: parser.var_names })
}

/// Parses a single term (optionally terminated by `.`).
pub fn parse_term(text: &str) -> Result<FrozenTerm, ParseError> {
    let mut parser = Parser::new(text)?;
    let term = parser.expr(1200)?;
    if matches!(parser.peek().tok, Tok::End) {
        parser.advance();
    }
    let trailing = parser.peek();
    if !matches!(trailing.tok, Tok::Eof) {
        return Err(ParseError::new(trailing.line, trailing.column, "unexpected text after term"));
    }
    Ok(FrozenTerm::from_local(term, parser.var_count))
}

fn flatten_conjunction(term: Term, out: &mut Vec<Term>) {
    let mut term = term;
    loop {
        match &term {
            Term::Compound(c) if c.functor == Atom::COMMA && c.args.len() == 2 => {
                let (l, r) = (c.args[0].clone(), c.args[1].clone());
                flatten_conjunction(l, out);
                term = r;
            }
            _ => {
                out.push(term);
                return;
            }
        }
    }
}

fn body_goals(body: Term, at: &Spanned) -> Result<Vec<Term>, ParseError> {
    let mut goals = Vec::new();
    flatten_conjunction(body, &mut goals);
    if goals.iter().any(|g| matches!(g, Term::Int(_))) {
        return Err(ParseError::new(at.line, at.column, "body goal is not callable"));
    }
    Ok(goals)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    var_names: Vec<(String, u32)>,
    var_count: u32,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        let toks = Lexer::new(text).tokenize()?;
        Ok(Parser { toks, pos: 0, var_names: Vec::new(), var_count: 0 })
    }

    fn reset_scope(&mut self) {
        self.var_names.clear();
        self.var_count = 0;
    }

    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Spanned {
        &self.toks[(self.pos + offset).min(self.toks.len() - 1)]
    }

    fn advance(&mut self) -> Spanned {
        let tok = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let t = self.peek();
        ParseError::new(t.line, t.column, message)
    }

    fn expect_end(&mut self) -> Result<(), ParseError> {
        match self.peek().tok {
            Tok::End => {
                self.advance();
                Ok(())
            }
            _ => Err(self.error_here(format!("expected '.' at end of clause, found {}", describe(&self.peek().tok)))),
        }
    }

    fn variable(&mut self, name: &str) -> Term {
        if name == "_" {
            let idx = self.var_count;
            self.var_count += 1;
            return Term::Var(Var(u64::from(idx)));
        }
        if let Some((_, idx)) = self.var_names.iter().find(|(n, _)| n == name) {
            return Term::Var(Var(u64::from(*idx)));
        }
        let idx = self.var_count;
        self.var_count += 1;
        self.var_names.push((name.to_owned(), idx));
        Term::Var(Var(u64::from(idx)))
    }

    fn directive(&mut self, program: &mut Program) -> Result<(), ParseError> {
        let neck = self.advance();
        let head = self.peek().clone();
        let spec = match &head.tok {
            Tok::Atom { name, .. } if name == "table" => {
                if matches!(self.peek_at(1).tok, Tok::Open) && !self.peek_at(1).spaced {
                    let t = self.expr(1199)?;
                    let args = t.args();
                    args.iter()
                        .skip(1)
                        .fold(args[0].clone(), |acc, a| Term::compound(Atom::COMMA, vec![acc, a.clone()]))
                } else {
                    self.advance();
                    self.expr(1199)?
                }
            }
            Tok::Atom { name, .. } => {
                return Err(ParseError::new(head.line, head.column, format!("unknown directive {name}")));
            }
            _ => return Err(ParseError::new(neck.line, neck.column, "unknown directive")),
        };
        self.expect_end()?;
        let mut specs = Vec::new();
        flatten_conjunction(spec, &mut specs);
        for spec in specs {
            match spec.indicator() {
                Some((Atom::SLASH, 2)) => {
                    let (name, arity) = (&spec.args()[0], &spec.args()[1]);
                    let Some(name) = name.as_atom() else {
                        return Err(ParseError::new(head.line, head.column, "table directive: predicate name must be an atom"));
                    };
                    let arity = arity.as_int().and_then(|a| u32::try_from(a).ok()).ok_or_else(|| {
                        ParseError::new(head.line, head.column, "table directive: arity must be a non-negative integer")
                    })?;
                    program.add_table(PredKey { name, arity });
                }
                _ => {
                    return Err(ParseError::new(head.line, head.column, "table directive expects Name/Arity"));
                }
            }
        }
        Ok(())
    }

    fn clause(&self, term: Term, at: &Spanned) -> Result<Clause, ParseError> {
        let (head, body) = match &term {
            Term::Compound(c) if c.functor == Atom::NECK && c.args.len() == 2 => {
                (c.args[0].clone(), body_goals(c.args[1].clone(), at)?)
            }
            _ => (term, Vec::new()),
        };
        if !head.is_callable() {
            return Err(ParseError::new(at.line, at.column, "clause head must be an atom or compound term"));
        }
        Ok(Clause::new(head, body, self.var_count))
    }

    fn expr(&mut self, max: u32) -> Result<Term, ParseError> {
        let (mut left, mut left_prio) = self.primary(max)?;
        loop {
            let name = match &self.peek().tok {
                Tok::Atom { name, quoted: false } => name.clone(),
                Tok::Comma => ",".to_owned(),
                _ => break,
            };
            let Some((prio, assoc)) = infix_op(&name) else { break };
            if prio > max {
                break;
            }
            let (lmax, rmax) = match assoc {
                Assoc::Xfx => (prio - 1, prio - 1),
                Assoc::Xfy => (prio - 1, prio),
                Assoc::Yfx => (prio, prio - 1),
            };
            if left_prio > lmax {
                break;
            }
            self.advance();
            let right = self.expr(rmax)?;
            left = Term::compound(Atom::new(&name), vec![left, right]);
            left_prio = prio;
        }
        Ok(left)
    }

    fn can_start_term(&self) -> bool {
        match &self.peek().tok {
            Tok::Int(_) | Tok::Var(_) | Tok::Open | Tok::OpenList => true,
            Tok::Atom { name, quoted } => *quoted || infix_op(name).is_none() || prefix_op(name).is_some(),
            _ => false,
        }
    }

    fn primary(&mut self, max: u32) -> Result<(Term, u32), ParseError> {
        let tok = self.advance();
        match tok.tok {
            Tok::Int(n) => Ok((Term::int(n), 0)),
            Tok::Var(name) => Ok((self.variable(&name), 0)),
            Tok::Open => {
                let inner = self.expr(1200)?;
                self.expect(Tok::Close, "')'")?;
                Ok((inner, 0))
            }
            Tok::OpenList => {
                if matches!(self.peek().tok, Tok::CloseList) {
                    self.advance();
                    return Ok((Term::Atom(Atom::NIL), 0));
                }
                let mut items = vec![self.expr(999)?];
                while matches!(self.peek().tok, Tok::Comma) {
                    self.advance();
                    items.push(self.expr(999)?);
                }
                let tail = if matches!(self.peek().tok, Tok::Bar) {
                    self.advance();
                    self.expr(999)?
                } else {
                    Term::Atom(Atom::NIL)
                };
                self.expect(Tok::CloseList, "']' or ','")?;
                Ok((Term::list(items, tail), 0))
            }
            Tok::Atom { name, quoted } => {
                let next = self.peek();
                if matches!(next.tok, Tok::Open) && !next.spaced {
                    self.advance();
                    let mut args = vec![self.expr(999)?];
                    while matches!(self.peek().tok, Tok::Comma) {
                        self.advance();
                        args.push(self.expr(999)?);
                    }
                    self.expect(Tok::Close, "',' or ')' in argument list")?;
                    return Ok((Term::app(&name, args), 0));
                }
                if !quoted && name == "-" && !next.spaced {
                    if let Tok::Int(n) = &next.tok {
                        let n = -n.clone();
                        self.advance();
                        return Ok((Term::int(n), 0));
                    }
                }
                if !quoted {
                    if let Some(prio) = prefix_op(&name) {
                        let operand_max = if name == "-" { prio } else { prio - 1 };
                        if prio <= max && self.can_start_term() && !self.next_is_infix_use() {
                            let operand = self.expr(operand_max)?;
                            return Ok((Term::app(&name, vec![operand]), prio));
                        }
                    }
                }
                Ok((Term::atom(&name), 0))
            }
            Tok::End => Err(ParseError::new(tok.line, tok.column, "unexpected end of clause")),
            Tok::Eof => Err(ParseError::new(tok.line, tok.column, "unexpected end of input")),
            other => Err(ParseError::new(tok.line, tok.column, format!("unexpected {}", describe(&other)))),
        }
    }

    // `- = x` style: the prefix-operator atom is itself an operand.
    fn next_is_infix_use(&self) -> bool {
        match &self.peek().tok {
            Tok::Atom { name, quoted: false } => {
                infix_op(name).is_some()
                    && prefix_op(name).is_none()
                    && !matches!(self.peek_at(1).tok, Tok::Open)
            }
            _ => false,
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek().tok == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {what}, found {}", describe(&self.peek().tok))))
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Atom { name, .. } => format!("'{name}'"),
        Tok::Var(name) => format!("variable {name}"),
        Tok::Int(n) => format!("number {n}"),
        Tok::Open => "'('".into(),
        Tok::Close => "')'".into(),
        Tok::OpenList => "'['".into(),
        Tok::CloseList => "']'".into(),
        Tok::Bar => "'|'".into(),
        Tok::Comma => "','".into(),
        Tok::End => "end of clause".into(),
        Tok::Eof => "end of input".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{BindingStore, TermDisplay, VarNaming, VariantKey};
    use proptest::prelude::*;

    fn show(t: &FrozenTerm) -> String {
        t.to_string()
    }

    #[test]
    fn running_example_program() {
        let text = ":- table p/2.\np(X,Y) :- p(X,Z), e(Z,Y).\np(X,Y) :- e(X,Y).\ne(a,b). e(b,c).";
        let program = parse_program(text).unwrap();
        let p = PredKey::new("p", 2);
        assert!(program.is_tabled(&p));
        assert_eq!(program.tabled().count(), 1);
        assert_eq!(program.clauses(&p).len(), 2);
        assert_eq!(program.clauses(&p)[0].body().len(), 2);
        assert_eq!(program.clauses(&PredKey::new("e", 2)).len(), 2);
        assert!(program.clauses(&PredKey::new("e", 2)).iter().all(|c| c.is_fact()));
        assert_eq!(show(&program.clauses(&p)[0].to_term()), "p(_0,_1):-p(_0,_2),e(_2,_1)");
    }

    #[test]
    fn fact_has_empty_body() {
        let program = parse_program("p(a).").unwrap();
        let clauses = program.clauses(&PredKey::new("p", 1));
        assert_eq!(clauses.len(), 1);
        assert!(clauses[0].is_fact());
    }

    #[test]
    fn unclosed_argument_list_is_a_syntax_error() {
        let err = parse_program("p(X :- q.").unwrap_err();
        assert_eq!((err.line, err.column), (1, 5));
        assert!(err.message.contains("argument list"), "{err}");
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_program("p(a).\nq(b) :- .\n").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn unknown_directive_is_rejected() {
        let err = parse_program(":- dynamic p/1.").unwrap_err();
        assert!(err.message.contains("unknown directive"), "{err}");
    }

    #[test]
    fn table_arity_must_be_an_integer() {
        let err = parse_program(":- table p/x.").unwrap_err();
        assert!(err.message.contains("arity"), "{err}");
        assert!(parse_program(":- table p/2, q/1.").unwrap().is_tabled(&PredKey::new("q", 1)));
        assert!(parse_program(":- table(p/2).").unwrap().is_tabled(&PredKey::new("p", 2)));
    }

    #[test]
    fn integer_head_is_rejected() {
        assert!(parse_program("3 :- true.").is_err());
        assert!(parse_program("X :- true.").is_err());
    }

    #[test]
    fn queries() {
        let q = parse_query("p(X,Y).").unwrap();
        assert_eq!(q.goal_count(), 1);
        assert_eq!(q.answer_vars().collect::<Vec<_>>(), ["X", "Y"]);
        let q = parse_query("p(X,Z), e(Z,Y).").unwrap();
        assert_eq!(q.goals().iter().map(show).collect::<Vec<_>>(), ["p(_0,_1)", "e(_1,_2)"]);
        let err = parse_query("").unwrap_err();
        assert_eq!(err.message, "empty query");
        assert!(parse_query("   % nothing\n").is_err());
    }

    #[test]
    fn operators_and_numbers() {
        let t = parse_term("X is 1 + 2 * -3").unwrap();
        assert_eq!(show(&t), "_0 is 1+2*(-3)");
        let t = parse_term("N1 is N - 1").unwrap();
        assert_eq!(show(&t), "_0 is _1-1");
        let t = parse_term("a - (-1)").unwrap();
        assert_eq!(show(&t), "a-(-1)");
        let t = parse_term("- a").unwrap();
        assert_eq!(show(&t), "-a");
        let t = parse_term("1 - 2 - 3").unwrap();
        assert_eq!(t.local_term().args()[1], Term::int(3));
        let t = parse_term("X =< 3, Y =\\= Z").unwrap();
        assert_eq!(show(&t), "_0=<3,_1=\\=_2");
        let t = parse_term("f(+, -)").unwrap();
        assert_eq!(t.local_term().args().len(), 2);
    }

    #[test]
    fn lists_and_quoted_atoms() {
        let t = parse_term("[a, 'b c' | T]").unwrap();
        assert_eq!(show(&t), "[a,'b c'|_0]");
        let t = parse_term("'it''s'").unwrap();
        assert_eq!(t.local_term(), &Term::atom("it's"));
        assert_eq!(show(&parse_term("[]").unwrap()), "[]");
    }

    #[test]
    fn comments_are_skipped() {
        let program = parse_program("% header\np(a). /* block\ncomment */ p(b). % trailing").unwrap();
        assert_eq!(program.clauses(&PredKey::new("p", 1)).len(), 2);
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let q = parse_query("p(_, _).").unwrap();
        assert_eq!(q.var_count, 2);
        assert_eq!(q.answer_vars().count(), 0);
    }

    // Random clause generator for the print/re-read property.
    fn term_strategy() -> impl Strategy<Value = String> {
        let leaf = prop_oneof![
            prop::sample::select(vec!["a", "b", "'x y'", "[]", "foo_1"]).prop_map(str::to_owned),
            prop::sample::select(vec!["X", "Y", "Z", "_"]).prop_map(str::to_owned),
            (-50i64..50).prop_map(|n| n.to_string()),
        ];
        leaf.prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                (prop::sample::select(vec!["f", "g"]), prop::collection::vec(inner.clone(), 1..4))
                    .prop_map(|(f, args)| format!("{f}({})", args.join(", "))),
                (inner.clone(), prop::sample::select(vec!["+", "-", "*", "=", "<"]), inner.clone())
                    .prop_map(|(l, op, r)| format!("({l} {op} {r})")),
                prop::collection::vec(inner, 0..3).prop_map(|items| format!("[{}]", items.join(", "))),
            ]
        })
    }

    proptest! {
        #[test]
        fn printed_clauses_read_back_as_variants(
            head in term_strategy(),
            body in prop::collection::vec(term_strategy(), 0..3),
        ) {
            let text = if body.is_empty() {
                format!("h({head}).")
            } else {
                let goals: Vec<String> = body.iter().map(|g| format!("g({g})")).collect();
                format!("h({head}) :- {}.", goals.join(", "))
            };
            let program = parse_program(&text).unwrap();
            let clause = &program.clauses(&PredKey::new("h", 1))[0];
            let printed = format!("{}.", clause.to_term());
            let reread = parse_program(&printed).unwrap();
            let clause2 = &reread.clauses(&PredKey::new("h", 1))[0];
            let store = BindingStore::new();
            let key = |c: &Clause| {
                let t = c.to_term();
                VariantKey::of(t.local_term(), &store)
            };
            prop_assert_eq!(key(clause), key(clause2), "printed as {}", printed);
            prop_assert_eq!(clause.body().len(), clause2.body().len());
            let _ = TermDisplay::new(clause.to_term().local_term(), VarNaming::Local).to_string();
        }
    }
}
