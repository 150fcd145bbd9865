//! Parser for the XPath fragment, with abbreviated syntax.

use super::{Axis, NodeTest, Position, Qualifier, Query, Step, XPathError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Slash,
    DoubleSlash,
    Pipe,
    Intersect,
    LBracket,
    RBracket,
    LParen,
    RParen,
    At,
    Axis,
    Dot,
    DotDot,
    Star,
    Eq,
    Gt,
    Name(String),
    Number(usize),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, XPathError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |position: usize, message: String| XPathError::Parse { position, message };
    while i < chars.len() {
        let (pos, c) = chars[i];
        let next = chars.get(i + 1).map(|&(_, c)| c);
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '/' if next == Some('/') => {
                i += 1;
                Tok::DoubleSlash
            }
            '/' => Tok::Slash,
            '|' => Tok::Pipe,
            '∩' => Tok::Intersect,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '@' => Tok::At,
            '*' => Tok::Star,
            '=' => Tok::Eq,
            '>' => Tok::Gt,
            ':' if next == Some(':') => {
                i += 1;
                Tok::Axis
            }
            '.' if next == Some('.') => {
                i += 1;
                Tok::DotDot
            }
            '.' => Tok::Dot,
            c if c.is_ascii_digit() => {
                let start = i;
                while i + 1 < chars.len() && chars[i + 1].1.is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..=i].iter().map(|&(_, c)| c).collect();
                let n = text.parse().map_err(|_| err(pos, format!("number too large: {text}")))?;
                Tok::Number(n)
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while let Some(&(_, d)) = chars.get(i + 1) {
                    let axis_sep = d == ':' && chars.get(i + 2).map(|&(_, c)| c) == Some(':');
                    if axis_sep || !(d.is_alphanumeric() || matches!(d, '_' | '-' | '.' | ':')) {
                        break;
                    }
                    i += 1;
                }
                Tok::Name(chars[start..=i].iter().map(|&(_, c)| c).collect())
            }
            c => return Err(err(pos, format!("unexpected character '{c}'"))),
        };
        out.push((pos, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

/// Parses a query. Positional and counting sugar is kept in the result;
/// see [`super::desugar`].
pub fn parse_xpath(src: &str) -> Result<Query, XPathError> {
    let mut p = Parser { toks: tokenize(src)?, pos: 0, end: src.len() };
    let q = p.query()?;
    if p.pos < p.toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(q)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |&(p, _)| p)
    }

    fn error(&self, message: &str) -> XPathError {
        let found = match self.peek() {
            Some(t) => format!("{t:?}"),
            None => "end of input".to_string(),
        };
        XPathError::Parse { position: self.offset(), message: format!("{message}, found {found}") }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), XPathError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {t:?}")))
        }
    }

    fn is_name(&self, k: usize, name: &str) -> bool {
        matches!(self.peek_at(k), Some(Tok::Name(n)) if n == name)
    }

    fn query(&mut self) -> Result<Query, XPathError> {
        let mut q = self.intersection()?;
        while self.eat(&Tok::Pipe) {
            q = Query::Union(Box::new(q), Box::new(self.intersection()?));
        }
        Ok(q)
    }

    fn intersection(&mut self) -> Result<Query, XPathError> {
        let mut q = self.path()?;
        while self.eat(&Tok::Intersect) || (self.is_name(0, "intersect") && {
            self.pos += 1;
            true
        }) {
            q = Query::Intersection(Box::new(q), Box::new(self.path()?));
        }
        Ok(q)
    }

    fn path(&mut self) -> Result<Query, XPathError> {
        if self.eat(&Tok::LParen) {
            let q = self.query()?;
            self.expect(Tok::RParen)?;
            return Ok(q);
        }
        match self.peek() {
            Some(Tok::Slash) => {
                self.pos += 1;
                let steps = if self.starts_step() { self.relative(false)?.0 } else { Vec::new() };
                Ok(Query::absolute(steps))
            }
            Some(Tok::DoubleSlash) => {
                self.pos += 1;
                let mut steps = vec![Step::new(Axis::DescendantOrSelf, NodeTest::Node)];
                steps.extend(self.relative(false)?.0);
                Ok(Query::absolute(steps))
            }
            _ => Ok(Query::relative(self.relative(false)?.0)),
        }
    }

    fn starts_step(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Name(_) | Tok::Star | Tok::Dot | Tok::DotDot | Tok::At)
        )
    }

    /// A relative path. With `attr_end`, a final `@name` step is allowed
    /// and returned separately.
    fn relative(&mut self, attr_end: bool) -> Result<(Vec<Step>, Option<Option<String>>), XPathError> {
        let mut steps = Vec::new();
        loop {
            if attr_end && self.peek() == Some(&Tok::At) {
                self.pos += 1;
                return Ok((steps, Some(self.attribute_name()?)));
            }
            steps.push(self.step()?);
            match self.peek() {
                Some(Tok::Slash) => self.pos += 1,
                Some(Tok::DoubleSlash) => {
                    self.pos += 1;
                    steps.push(Step::new(Axis::DescendantOrSelf, NodeTest::Node));
                }
                _ => return Ok((steps, None)),
            }
        }
    }

    fn attribute_name(&mut self) -> Result<Option<String>, XPathError> {
        match self.peek().cloned() {
            Some(Tok::Star) => {
                self.pos += 1;
                Ok(None)
            }
            Some(Tok::Name(n)) => {
                self.pos += 1;
                Ok(Some(n))
            }
            _ => Err(self.error("expected attribute name")),
        }
    }

    fn step(&mut self) -> Result<Step, XPathError> {
        if self.eat(&Tok::Dot) {
            return Ok(Step::new(Axis::SelfAxis, NodeTest::Node));
        }
        if self.eat(&Tok::DotDot) {
            return Ok(Step::new(Axis::Parent, NodeTest::Node));
        }
        if self.peek() == Some(&Tok::At) {
            return Err(self.error("attribute steps are only allowed at the end of a qualifier path"));
        }
        let axis = match (self.peek().cloned(), self.peek_at(1)) {
            (Some(Tok::Name(n)), Some(Tok::Axis)) => {
                let axis = Axis::from_name(&n).ok_or_else(|| self.error(&format!("unknown axis {n}")))?;
                self.pos += 2;
                axis
            }
            _ => Axis::Child,
        };
        let test = match self.peek().cloned() {
            Some(Tok::Star) => {
                self.pos += 1;
                NodeTest::Star
            }
            Some(Tok::Name(n)) if n == "node" && self.peek_at(1) == Some(&Tok::LParen) => {
                self.pos += 1;
                self.expect(Tok::LParen)?;
                self.expect(Tok::RParen)?;
                NodeTest::Node
            }
            Some(Tok::Name(n)) => {
                self.pos += 1;
                NodeTest::Name(n)
            }
            _ => return Err(self.error("expected node test")),
        };
        let mut step = Step::new(axis, test);
        while self.eat(&Tok::LBracket) {
            step.qualifiers.push(self.or_qualifier()?);
            self.expect(Tok::RBracket)?;
        }
        Ok(step)
    }

    fn or_qualifier(&mut self) -> Result<Qualifier, XPathError> {
        let mut q = self.and_qualifier()?;
        while self.is_name(0, "or") {
            self.pos += 1;
            q = Qualifier::or(q, self.and_qualifier()?);
        }
        Ok(q)
    }

    fn and_qualifier(&mut self) -> Result<Qualifier, XPathError> {
        let mut q = self.unary_qualifier()?;
        while self.is_name(0, "and") {
            self.pos += 1;
            q = Qualifier::and(q, self.unary_qualifier()?);
        }
        Ok(q)
    }

    fn function(&self, name: &str) -> bool {
        self.is_name(0, name) && self.peek_at(1) == Some(&Tok::LParen)
    }

    fn unary_qualifier(&mut self) -> Result<Qualifier, XPathError> {
        if self.eat(&Tok::LParen) {
            let q = self.or_qualifier()?;
            self.expect(Tok::RParen)?;
            return Ok(q);
        }
        if let Some(Tok::Number(k)) = self.peek().cloned() {
            self.pos += 1;
            return self.index(k);
        }
        if self.function("not") {
            self.pos += 2;
            let q = self.or_qualifier()?;
            self.expect(Tok::RParen)?;
            return Ok(Qualifier::not(q));
        }
        if self.function("last") {
            self.pos += 2;
            self.expect(Tok::RParen)?;
            return Ok(Qualifier::Position(Position::Last));
        }
        if self.function("position") {
            self.pos += 2;
            self.expect(Tok::RParen)?;
            self.expect(Tok::Eq)?;
            return match self.peek().cloned() {
                Some(Tok::Number(k)) => {
                    self.pos += 1;
                    self.index(k)
                }
                _ if self.function("last") => {
                    self.pos += 2;
                    self.expect(Tok::RParen)?;
                    Ok(Qualifier::Position(Position::Last))
                }
                _ => Err(self.error("expected a number or last()")),
            };
        }
        if self.function("count") {
            self.pos += 2;
            let (steps, _) = self.relative(false)?;
            self.expect(Tok::RParen)?;
            let zero = match self.peek() {
                Some(Tok::Eq) => true,
                Some(Tok::Gt) => false,
                _ => return Err(self.error("expected '=' or '>' after count()")),
            };
            self.pos += 1;
            let Some(Tok::Number(k)) = self.peek().cloned() else {
                return Err(self.error("expected a number"));
            };
            if zero && k != 0 {
                return Err(self.error("only count(...)=0 is supported"));
            }
            self.pos += 1;
            return Ok(if zero { Qualifier::CountZero(steps) } else { Qualifier::CountAbove(steps, k) });
        }
        if matches!(self.peek(), Some(Tok::Slash | Tok::DoubleSlash)) {
            return Err(self.error("absolute paths are not allowed in qualifiers"));
        }
        if self.eat(&Tok::At) {
            return Ok(Qualifier::Attr(self.attribute_name()?));
        }
        let (steps, attr) = self.relative(true)?;
        Ok(match attr {
            Some(a) => Qualifier::AttrPath(steps, a),
            None => Qualifier::Path(steps),
        })
    }

    fn index(&self, k: usize) -> Result<Qualifier, XPathError> {
        if k == 0 {
            return Err(self.error("positions start at 1"));
        }
        Ok(Qualifier::Position(Position::Index(k)))
    }
}
