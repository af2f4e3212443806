use num_bigint::BigInt;

use crate::error::ParseError;
use crate::terms::display::is_symbol_char;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Atom { name: String, quoted: bool },
    Var(String),
    Int(BigInt),
    Open,
    Close,
    OpenList,
    CloseList,
    Bar,
    Comma,
    End,
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
    /// Whitespace or a comment separates this token from the previous one.
    pub spaced: bool,
}

pub(crate) struct Lexer<'s> {
    chars: std::iter::Peekable<std::str::Chars<'s>>,
    line: usize,
    column: usize,
}

impl<'s> Lexer<'s> {
    pub fn new(text: &'s str) -> Self {
        Lexer { chars: text.chars().peekable(), line: 1, column: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.column, message)
    }

    // Returns whether anything was skipped.
    fn skip_layout(&mut self) -> Result<bool, ParseError> {
        let mut skipped = false;
        loop {
            match self.chars.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                    skipped = true;
                }
                Some('%') => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                    skipped = true;
                }
                Some('/') => {
                    let mut ahead = self.chars.clone();
                    ahead.next();
                    if ahead.peek() != Some(&'*') {
                        return Ok(skipped);
                    }
                    let (line, column) = (self.line, self.column);
                    self.bump();
                    self.bump();
                    let mut prev = ' ';
                    loop {
                        match self.bump() {
                            Some('/') if prev == '*' => break,
                            Some(c) => prev = c,
                            None => return Err(ParseError::new(line, column, "unterminated block comment")),
                        }
                    }
                    skipped = true;
                }
                _ => return Ok(skipped),
            }
        }
    }

    pub fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        loop {
            let spaced = self.skip_layout()?;
            let (line, column) = (self.line, self.column);
            let Some(&c) = self.chars.peek() else {
                out.push(Spanned { tok: Tok::Eof, line, column, spaced: true });
                return Ok(out);
            };
            let tok = match c {
                '(' => {
                    self.bump();
                    Tok::Open
                }
                ')' => {
                    self.bump();
                    Tok::Close
                }
                '[' => {
                    self.bump();
                    Tok::OpenList
                }
                ']' => {
                    self.bump();
                    Tok::CloseList
                }
                '|' => {
                    self.bump();
                    Tok::Bar
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '!' | ';' => {
                    self.bump();
                    Tok::Atom { name: c.to_string(), quoted: false }
                }
                '\'' => self.quoted_atom()?,
                c if c.is_ascii_digit() => self.number()?,
                c if c.is_alphabetic() || c == '_' => {
                    let mut name = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c.is_alphanumeric() || c == '_' {
                            name.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    if c.is_uppercase() || c == '_' {
                        Tok::Var(name)
                    } else {
                        Tok::Atom { name, quoted: false }
                    }
                }
                c if is_symbol_char(c) => {
                    let mut name = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if is_symbol_char(c) {
                            name.push(c);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    if name == "." && self.at_end_boundary() {
                        Tok::End
                    } else {
                        Tok::Atom { name, quoted: false }
                    }
                }
                other => return Err(self.error(format!("unexpected character {other:?}"))),
            };
            out.push(Spanned { tok, line, column, spaced });
        }
    }

    fn at_end_boundary(&mut self) -> bool {
        match self.chars.peek() {
            None => true,
            Some(c) => c.is_whitespace() || *c == '%',
        }
    }

    fn number(&mut self) -> Result<Tok, ParseError> {
        let mut digits = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_ascii_digit() {
                digits.push(c);
                self.bump();
            } else if c == '_' {
                // digit group separator
                self.bump();
            } else {
                break;
            }
        }
        if let Some(c) = self.chars.peek() {
            if c.is_alphabetic() {
                return Err(self.error("malformed number"));
            }
        }
        Ok(Tok::Int(digits.parse().expect("digits")))
    }

    fn quoted_atom(&mut self) -> Result<Tok, ParseError> {
        let (line, column) = (self.line, self.column);
        self.bump();
        let mut name = String::new();
        loop {
            match self.bump() {
                None => return Err(ParseError::new(line, column, "unterminated quoted atom")),
                Some('\'') => {
                    if self.chars.peek() == Some(&'\'') {
                        self.bump();
                        name.push('\'');
                    } else {
                        break;
                    }
                }
                Some('\\') => match self.bump() {
                    Some('n') => name.push('\n'),
                    Some('t') => name.push('\t'),
                    Some('\\') => name.push('\\'),
                    Some('\'') => name.push('\''),
                    Some('"') => name.push('"'),
                    Some('\n') => {}
                    _ => return Err(self.error("unknown escape sequence in quoted atom")),
                },
                Some(c) => name.push(c),
            }
        }
        Ok(Tok::Atom { name, quoted: true })
    }
}
