//! Parser for the internal tree type syntax:
//!
//! ```text
//! T ::= () | {} | ∅ | T | T | T, T | l[attrs]{T} | l{T} | x
//!     | let x = T; ...; y = T in T | (T)
//! attrs ::= items ('|' items)*      items ::= item (',' item)*
//! item ::= a | a? | ~a
//! ```

use std::collections::HashMap;

use super::{AttrExpr, AttrItem, SchemaError, TreeType};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Bar,
    Comma,
    Semi,
    Eq,
    Question,
    Tilde,
    EmptySet,
    Let,
    In,
    Name(String),
    Eof,
}

struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | ':' | '-')
}

fn tokenize(src: &str) -> Result<Vec<Token>, SchemaError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (l, cl) = (line, col);
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            '|' => Some(Tok::Bar),
            ',' => Some(Tok::Comma),
            ';' => Some(Tok::Semi),
            '=' => Some(Tok::Eq),
            '?' => Some(Tok::Question),
            '~' => Some(Tok::Tilde),
            '∅' => Some(Tok::EmptySet),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, line: l, column: cl });
            i += 1;
            col += 1;
            continue;
        }
        if is_name_start(c) {
            let start = i;
            while i < chars.len() && is_name_char(chars[i]) {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match name.as_str() {
                "let" => Tok::Let,
                "in" => Tok::In,
                _ => Tok::Name(name),
            };
            out.push(Token { tok, line: l, column: cl });
            continue;
        }
        return Err(SchemaError::Parse {
            line,
            column: col,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> SchemaError {
        let t = &self.tokens[self.pos];
        SchemaError::Parse { line: t.line, column: t.column, message: message.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), SchemaError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!("expected {what}, found {:?}", self.peek())))
        }
    }

    fn name(&mut self) -> Result<String, SchemaError> {
        match self.next() {
            Tok::Name(n) => Ok(n),
            other => {
                self.pos -= 1;
                Err(self.error(format!("expected a name, found {other:?}")))
            }
        }
    }

    fn union(&mut self) -> Result<TreeType, SchemaError> {
        if *self.peek() == Tok::Let {
            return self.binding();
        }
        let mut acc = self.sequence()?;
        while *self.peek() == Tok::Bar {
            self.next();
            let rhs = self.sequence()?;
            acc = TreeType::or(acc, rhs);
        }
        Ok(acc)
    }

    fn sequence(&mut self) -> Result<TreeType, SchemaError> {
        let mut items = vec![self.atom()?];
        while *self.peek() == Tok::Comma {
            self.next();
            items.push(self.atom()?);
        }
        // Right nested so that the last item is the tail.
        let mut acc = items.pop().unwrap();
        while let Some(item) = items.pop() {
            acc = TreeType::concat(item, acc);
        }
        Ok(acc)
    }

    fn binding(&mut self) -> Result<TreeType, SchemaError> {
        self.expect(Tok::Let, "`let`")?;
        let mut bindings: Vec<(String, TreeType)> = Vec::new();
        loop {
            let name = self.name()?;
            if bindings.iter().any(|(n, _)| *n == name) {
                return Err(self.error(format!("type variable `{name}` bound twice")));
            }
            self.expect(Tok::Eq, "`=`")?;
            let def = self.union()?;
            bindings.push((name, def));
            match self.next() {
                Tok::Semi => {}
                Tok::In => break,
                other => {
                    self.pos -= 1;
                    return Err(self.error(format!("expected `;` or `in`, found {other:?}")));
                }
            }
        }
        let body = self.union()?;
        Ok(TreeType::Bind(bindings, Box::new(body)))
    }

    fn atom(&mut self) -> Result<TreeType, SchemaError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.next();
                if *self.peek() == Tok::RParen {
                    self.next();
                    return Ok(TreeType::EmptySeq);
                }
                let t = self.union()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::LBrace => {
                self.next();
                self.expect(Tok::RBrace, "`}` of the empty set")?;
                Ok(TreeType::EmptySet)
            }
            Tok::EmptySet => {
                self.next();
                Ok(TreeType::EmptySet)
            }
            Tok::Let => self.binding(),
            Tok::Name(name) => {
                self.next();
                match self.peek() {
                    Tok::LBracket | Tok::LBrace => {
                        let attrs = if *self.peek() == Tok::LBracket {
                            self.next();
                            let a = self.attributes()?;
                            self.expect(Tok::RBracket, "`]`")?;
                            a
                        } else {
                            AttrExpr::Empty
                        };
                        self.expect(Tok::LBrace, "`{`")?;
                        let content = if *self.peek() == Tok::RBrace {
                            TreeType::EmptySeq
                        } else {
                            self.union()?
                        };
                        self.expect(Tok::RBrace, "`}`")?;
                        Ok(TreeType::Element(name, attrs, Box::new(content)))
                    }
                    _ => Ok(TreeType::Var(name)),
                }
            }
            other => Err(self.error(format!("expected a tree type, found {other:?}"))),
        }
    }

    fn attributes(&mut self) -> Result<AttrExpr, SchemaError> {
        if *self.peek() == Tok::RBracket {
            return Ok(AttrExpr::Empty);
        }
        let mut lists = vec![self.attribute_list()?];
        while *self.peek() == Tok::Bar {
            self.next();
            lists.push(self.attribute_list()?);
        }
        Ok(lists
            .into_iter()
            .rev()
            .fold(AttrExpr::Empty, |rest, items| AttrExpr::Choice(items, Box::new(rest))))
    }

    fn attribute_list(&mut self) -> Result<Vec<AttrItem>, SchemaError> {
        let mut items = Vec::new();
        if matches!(self.peek(), Tok::Bar | Tok::RBracket) {
            return Ok(items);
        }
        loop {
            let item = if *self.peek() == Tok::Tilde {
                self.next();
                AttrItem::Prohibited(self.name()?)
            } else {
                let n = self.name()?;
                if *self.peek() == Tok::Question {
                    self.next();
                    AttrItem::Optional(n)
                } else {
                    AttrItem::Required(n)
                }
            };
            items.push(item);
            if *self.peek() == Tok::Comma && matches!(self.peek2(), Tok::Name(_) | Tok::Tilde) {
                self.next();
            } else {
                return Ok(items);
            }
        }
    }
}

/// Checks that every type variable is bound and that recursion through
/// sequences only happens in tail position (or under an element).
pub(crate) fn check_well_formed(t: &TreeType) -> Result<(), SchemaError> {
    struct Edge {
        from: usize,
        to: usize,
        tail: bool,
    }
    fn collect(
        t: &TreeType,
        owner: Option<usize>,
        tail: bool,
        scopes: &mut Vec<HashMap<String, usize>>,
        names: &mut Vec<String>,
        edges: &mut Vec<Edge>,
    ) -> Result<(), SchemaError> {
        match t {
            TreeType::EmptySet | TreeType::EmptySeq => Ok(()),
            TreeType::Var(v) => {
                let id = scopes
                    .iter()
                    .rev()
                    .find_map(|s| s.get(v).copied())
                    .ok_or_else(|| SchemaError::UnboundVariable(v.clone()))?;
                if let Some(from) = owner {
                    edges.push(Edge { from, to: id, tail });
                }
                Ok(())
            }
            TreeType::Or(a, b) => {
                collect(a, owner, tail, scopes, names, edges)?;
                collect(b, owner, tail, scopes, names, edges)
            }
            TreeType::Concat(a, b) => {
                collect(a, owner, false, scopes, names, edges)?;
                collect(b, owner, tail, scopes, names, edges)
            }
            // Recursion under an element constructor is always allowed.
            TreeType::Element(_, _, c) => collect(c, None, true, scopes, names, edges),
            TreeType::Bind(bindings, body) => {
                let mut scope = HashMap::new();
                let mut ids = Vec::new();
                for (n, _) in bindings {
                    let id = names.len();
                    names.push(n.clone());
                    scope.insert(n.clone(), id);
                    ids.push(id);
                }
                scopes.push(scope);
                for ((_, def), id) in bindings.iter().zip(ids) {
                    collect(def, Some(id), true, scopes, names, edges)?;
                }
                let r = collect(body, owner, tail, scopes, names, edges);
                scopes.pop();
                r
            }
        }
    }
    let mut names = Vec::new();
    let mut edges = Vec::new();
    collect(t, None, true, &mut Vec::new(), &mut names, &mut edges)?;
    // A non-tail edge u -> v is bad when v reaches u again.
    let n = names.len();
    let mut succ = vec![Vec::new(); n];
    for e in &edges {
        succ[e.from].push(e.to);
    }
    for e in edges.iter().filter(|e| !e.tail) {
        let mut seen = vec![false; n];
        let mut stack = vec![e.to];
        while let Some(v) = stack.pop() {
            if v == e.from {
                return Err(SchemaError::NonTailRecursion(names[e.from].clone()));
            }
            if !seen[v] {
                seen[v] = true;
                stack.extend(succ[v].iter().copied());
            }
        }
    }
    Ok(())
}

/// Parses a tree type in the internal syntax.
pub fn parse_internal(src: &str) -> Result<TreeType, SchemaError> {
    let mut p = Parser { tokens: tokenize(src)?, pos: 0 };
    let t = p.union()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(format!("unexpected {:?}", p.peek())));
    }
    check_well_formed(&t)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_elements_and_attributes() {
        let t = parse_internal("a[x?, y | ~z]{b{}, c{()}} | ()").unwrap();
        let TreeType::Or(a, empty) = t else { panic!("expected union") };
        assert_eq!(*empty, TreeType::EmptySeq);
        let TreeType::Element(name, attrs, content) = *a else { panic!("expected element") };
        assert_eq!(name, "a");
        assert_eq!(attrs.to_string(), "x?, y | ~z");
        assert_eq!(content.to_string(), "b{}, c{}");
    }

    #[test]
    fn printing_round_trips() {
        for src in [
            "let x = a{x}, x | (); y = b[c?]{} in x, y",
            "{} | a{b{} | c{}}",
            "(a{} | b{}), c{}",
        ] {
            let t = parse_internal(src).unwrap();
            assert_eq!(parse_internal(&t.to_string()).unwrap(), t, "{src}");
        }
    }

    #[test]
    fn rejects_non_tail_recursion() {
        assert_eq!(
            parse_internal("let x = x, a{} | () in x"),
            Err(SchemaError::NonTailRecursion("x".into()))
        );
        assert!(parse_internal("let x = (x | b{}), a{} in x").is_err());
        assert!(parse_internal("let x = a{x}, b{} | () in x").is_ok());
        assert!(parse_internal("let x = a{}, x | () in x").is_ok());
    }

    #[test]
    fn rejects_unbound_variables() {
        assert_eq!(parse_internal("a{y}"), Err(SchemaError::UnboundVariable("y".into())));
    }
}
