use thiserror::Error;

use super::{Arg, Formula, Program};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    True,
    False,
    Ident(String),
    Prop(String),
    Hash,
    Var(String),
    Str(String),
    Not,
    And,
    Or,
    Implies,
    Equiv,
    Modal(Program),
    AttrTest(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Eq,
    Let,
    In,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::True => "`T`".into(),
            Tok::False => "`F`".into(),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Prop(s) => format!("proposition `{s}`"),
            Tok::Hash => "`#`".into(),
            Tok::Var(s) => format!("variable `${s}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Not => "`~`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`=>`".into(),
            Tok::Equiv => "`<=>`".into(),
            Tok::Modal(p) => format!("`<{p}>`"),
            Tok::AttrTest(s) => format!("`<{s}>`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Let => "`let`".into(),
            Tok::In => "`in`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | ':' | '-')
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> ParseError {
        ParseError { line, column, message: message.into() }
    }

    fn ident(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if is_ident_char(c) {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn tokens(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
                if c.is_whitespace() {
                    self.bump();
                } else if c == '/' && self.peek2() == Some('/') {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                } else {
                    break;
                }
            }
            let (line, column) = (self.line, self.column);
            let Some(c) = self.peek() else {
                out.push(Token { tok: Tok::Eof, line, column });
                return Ok(out);
            };
            let tok = match c {
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                ';' => {
                    self.bump();
                    Tok::Semi
                }
                '~' | '!' => {
                    self.bump();
                    Tok::Not
                }
                '&' => {
                    self.bump();
                    Tok::And
                }
                '|' => {
                    self.bump();
                    Tok::Or
                }
                '#' => {
                    self.bump();
                    Tok::Hash
                }
                '=' => {
                    self.bump();
                    if self.peek() == Some('>') {
                        self.bump();
                        Tok::Implies
                    } else {
                        Tok::Eq
                    }
                }
                '<' => {
                    self.bump();
                    if self.peek() == Some('=') {
                        self.bump();
                        if self.bump() != Some('>') {
                            return Err(self.error(line, column, "expected `<=>`"));
                        }
                        Tok::Equiv
                    } else {
                        let mut inner = String::new();
                        loop {
                            match self.bump() {
                                Some('>') => break,
                                Some(c) if !c.is_whitespace() => inner.push(c),
                                Some(_) => {}
                                None => {
                                    return Err(self.error(line, column, "unterminated `<`"))
                                }
                            }
                        }
                        if let Some(p) = Program::from_label(&inner) {
                            Tok::Modal(p)
                        } else if inner.starts_with(is_ident_start)
                            && inner.chars().all(is_ident_char)
                        {
                            Tok::AttrTest(inner)
                        } else {
                            return Err(self.error(
                                line,
                                column,
                                format!("invalid modality `<{inner}>`"),
                            ));
                        }
                    }
                }
                '$' => {
                    self.bump();
                    let name = self.ident();
                    if name.is_empty() {
                        return Err(self.error(line, column, "expected variable name after `$`"));
                    }
                    Tok::Var(name)
                }
                '"' | '\'' => {
                    let quote = c;
                    self.bump();
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            Some(c) if c == quote => break,
                            Some('\\') => match self.bump() {
                                Some(c) => s.push(c),
                                None => break,
                            },
                            Some(c) => s.push(c),
                            None => {
                                return Err(self.error(line, column, "unterminated string literal"))
                            }
                        }
                    }
                    Tok::Str(s)
                }
                c if is_ident_start(c) => {
                    let name = self.ident();
                    match name.as_str() {
                        "T" => Tok::True,
                        "F" => Tok::False,
                        "let" => Tok::Let,
                        "in" => Tok::In,
                        _ if name.starts_with('_') => Tok::Prop(name),
                        _ => Tok::Ident(name),
                    }
                }
                other => {
                    return Err(self.error(line, column, format!("unexpected character `{other}`")))
                }
            };
            out.push(Token { tok, line, column });
        }
    }
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    Lexer { chars: src.char_indices().peekable(), line: 1, column: 1 }.tokens()
}

/// A `name(p1, ..., pn) = body;` definition of a problem file.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RawDefinition {
    pub name: String,
    pub params: Vec<String>,
    pub body: Formula,
}

pub(crate) struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { tokens: tokenize(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let t = &self.tokens[self.pos];
        ParseError { line: t.line, column: t.column, message: message.into() }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error_here(format!("expected {expected}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn expect_eof(&self) -> Result<(), ParseError> {
        if self.at_eof() {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    pub fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.implication()?;
        if *self.peek() == Tok::Equiv {
            let mut acc = lhs;
            while *self.peek() == Tok::Equiv {
                self.next();
                let rhs = self.implication()?;
                acc = Formula::equiv(acc, rhs);
            }
            Ok(acc)
        } else {
            Ok(lhs)
        }
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.next();
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.next();
            let rhs = self.conjunction()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::And {
            self.next();
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.next();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Modal(p) => {
                self.next();
                Ok(Formula::modal(p, self.unary()?))
            }
            Tok::AttrTest(name) => {
                self.next();
                if *self.peek() != Tok::True {
                    return Err(self.error_here(format!(
                        "attribute test `<{name}>` must be followed by `T`"
                    )));
                }
                self.next();
                Ok(Formula::Attribute(name))
            }
            Tok::Let => self.let_formula(),
            _ => self.primary(),
        }
    }

    fn let_formula(&mut self) -> Result<Formula, ParseError> {
        self.expect(Tok::Let)?;
        let mut bindings = Vec::new();
        loop {
            let name = match self.next() {
                Tok::Var(n) => n,
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected("variable"));
                }
            };
            if bindings.iter().any(|(n, _)| *n == name) {
                return Err(self.error_here(format!("variable `${name}` bound twice")));
            }
            self.expect(Tok::Eq)?;
            let def = self.formula()?;
            bindings.push((name, def));
            match self.peek() {
                Tok::Comma => {
                    self.next();
                }
                Tok::In => {
                    self.next();
                    break;
                }
                _ => return Err(self.unexpected("`,` or `in`")),
            }
        }
        let body = self.formula()?;
        Ok(Formula::let_in(bindings, body))
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::True => {
                self.next();
                Ok(Formula::True)
            }
            Tok::False => {
                self.next();
                Ok(Formula::False)
            }
            Tok::Hash => {
                self.next();
                Ok(Formula::Start)
            }
            Tok::Prop(name) => {
                self.next();
                Ok(Formula::Prop(name))
            }
            Tok::Var(name) => {
                self.next();
                Ok(Formula::Var(name))
            }
            Tok::Ident(name) => {
                self.next();
                if *self.peek() == Tok::LParen {
                    self.next();
                    let args = self.arguments()?;
                    Ok(Formula::Call(name, args))
                } else {
                    Ok(Formula::Element(name))
                }
            }
            Tok::LParen => {
                self.next();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            _ => Err(self.unexpected("formula")),
        }
    }

    fn arguments(&mut self) -> Result<Vec<Arg>, ParseError> {
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.next();
            return Ok(args);
        }
        loop {
            if let Tok::Str(s) = self.peek().clone() {
                self.next();
                args.push(Arg::Text(s));
            } else {
                args.push(Arg::Formula(self.formula()?));
            }
            match self.next() {
                Tok::Comma => {}
                Tok::RParen => return Ok(args),
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected("`,` or `)`"));
                }
            }
        }
    }

    /// Tries to read a definition header `name(p1, ..., pn) =`.
    fn definition_header(&mut self) -> Option<(String, Vec<String>)> {
        let start = self.pos;
        let result = (|| {
            let Tok::Ident(name) = self.next() else { return None };
            if self.next() != Tok::LParen {
                return None;
            }
            let mut params = Vec::new();
            if *self.peek() == Tok::RParen {
                self.next();
            } else {
                loop {
                    match self.next() {
                        Tok::Ident(p) | Tok::Var(p) | Tok::Prop(p) => params.push(p),
                        _ => return None,
                    }
                    match self.next() {
                        Tok::Comma => {}
                        Tok::RParen => break,
                        _ => return None,
                    }
                }
            }
            if self.next() != Tok::Eq {
                return None;
            }
            Some((name, params))
        })();
        if result.is_none() {
            self.pos = start;
        }
        result
    }

    /// Parses a problem file: zero or more definitions followed by the goal.
    pub fn problem(&mut self) -> Result<(Vec<RawDefinition>, Formula), ParseError> {
        let mut defs = Vec::new();
        while let Some((name, params)) = self.definition_header() {
            let body = self.formula()?;
            self.expect(Tok::Semi)?;
            defs.push(RawDefinition { name, params, body });
        }
        let goal = self.formula()?;
        if *self.peek() == Tok::Semi {
            self.next();
        }
        self.expect_eof()?;
        Ok((defs, goal))
    }
}

/// Parses a formula in the concrete syntax
/// (`T F | & => <=> ~ <1> <2> <-1> <-2> <attr>T let $X = ... in ... #`).
pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser::new(src)?;
    let f = parser.formula()?;
    parser.expect_eof()?;
    Ok(f)
}
