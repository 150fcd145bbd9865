//! DTD reader producing tree types.
//!
//! Parameter entities (internal and external), conditional sections,
//! comments and processing instructions are handled. General entities are
//! skipped since text content is not modelled.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use super::{AttrExpr, AttrItem, SchemaError, TreeType};

/// Content particle of an element declaration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Particle {
    Name(String),
    Seq(Vec<Particle>),
    Choice(Vec<Particle>),
    Optional(Box<Particle>),
    Star(Box<Particle>),
    Plus(Box<Particle>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContentModel {
    Empty,
    Any,
    /// Mixed content; only the element names are kept.
    Mixed(Vec<String>),
    Children(Particle),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeDecl {
    pub name: String,
    pub required: bool,
}

/// Element and attribute declarations of a DTD.
#[derive(Debug, Clone, Default)]
pub struct Dtd {
    elements: Vec<(String, ContentModel)>,
    index: HashMap<String, usize>,
    attributes: HashMap<String, Vec<AttributeDecl>>,
}

impl Dtd {
    /// Declared element names in declaration order.
    pub fn element_names(&self) -> Vec<&str> {
        self.elements.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn content_model(&self, element: &str) -> Option<&ContentModel> {
        self.index.get(element).map(|&i| &self.elements[i].1)
    }

    pub fn attributes_of(&self, element: &str) -> &[AttributeDecl] {
        self.attributes.get(element).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Distinct attribute names declared for declared elements.
    pub fn attribute_names(&self) -> BTreeSet<String> {
        self.attributes
            .iter()
            .filter(|(e, _)| self.index.contains_key(*e))
            .flat_map(|(_, attrs)| attrs.iter().map(|a| a.name.clone()))
            .collect()
    }

    /// The tree type of documents rooted at `root`. Only elements reachable
    /// from the root are bound.
    pub fn tree_type(&self, root: &str) -> Result<TreeType, SchemaError> {
        if !self.index.contains_key(root) {
            return Err(SchemaError::UnknownRoot(root.to_string()));
        }
        let mut reachable = vec![root.to_string()];
        let mut seen: HashSet<String> = HashSet::from([root.to_string()]);
        let mut pos = 0;
        while pos < reachable.len() {
            let name = reachable[pos].clone();
            pos += 1;
            let mut refs = Vec::new();
            match self.content_model(&name) {
                Some(ContentModel::Children(p)) => particle_names(p, &mut refs),
                Some(ContentModel::Mixed(names)) => refs.extend(names.iter().cloned()),
                Some(ContentModel::Any) => refs.extend(self.elements.iter().map(|(n, _)| n.clone())),
                Some(ContentModel::Empty) | None => {}
            }
            for r in refs {
                if self.index.contains_key(&r) && seen.insert(r.clone()) {
                    reachable.push(r);
                }
            }
        }

        let mut builder = TypeBuilder { dtd: self, stars: HashMap::new(), star_defs: Vec::new(), counter: 0 };
        let mut bindings = Vec::new();
        for name in &reachable {
            let content = match self.content_model(name).unwrap() {
                ContentModel::Empty => TreeType::EmptySeq,
                ContentModel::Any => {
                    let all = self.elements.iter().map(|(n, _)| TreeType::var(n.clone()));
                    builder.star(choice(all))
                }
                ContentModel::Mixed(names) if names.is_empty() => TreeType::EmptySeq,
                ContentModel::Mixed(names) => {
                    let items = names.iter().map(|n| builder.reference(n));
                    builder.star(choice(items))
                }
                ContentModel::Children(p) => builder.particle(p),
            };
            let attrs = self.attributes_of(name);
            let expr = if attrs.is_empty() {
                AttrExpr::Empty
            } else {
                AttrExpr::list(
                    attrs
                        .iter()
                        .map(|a| {
                            if a.required {
                                AttrItem::Required(a.name.clone())
                            } else {
                                AttrItem::Optional(a.name.clone())
                            }
                        })
                        .collect(),
                )
            };
            bindings.push((name.clone(), TreeType::element(name.clone(), expr, content)));
        }
        bindings.extend(builder.star_defs);
        Ok(TreeType::Bind(bindings, Box::new(TreeType::var(root))))
    }
}

fn particle_names(p: &Particle, out: &mut Vec<String>) {
    match p {
        Particle::Name(n) => out.push(n.clone()),
        Particle::Seq(ps) | Particle::Choice(ps) => ps.iter().for_each(|p| particle_names(p, out)),
        Particle::Optional(p) | Particle::Star(p) | Particle::Plus(p) => particle_names(p, out),
    }
}

fn choice(items: impl IntoIterator<Item = TreeType>) -> TreeType {
    items.into_iter().reduce(TreeType::or).unwrap_or(TreeType::EmptySet)
}

struct TypeBuilder<'a> {
    dtd: &'a Dtd,
    stars: HashMap<TreeType, String>,
    star_defs: Vec<(String, TreeType)>,
    counter: usize,
}

impl TypeBuilder<'_> {
    fn reference(&self, name: &str) -> TreeType {
        // Undeclared elements have no valid instance.
        if self.dtd.index.contains_key(name) {
            TreeType::var(name)
        } else {
            TreeType::EmptySet
        }
    }

    /// A variable for `body*`, shared between identical bodies.
    fn star(&mut self, body: TreeType) -> TreeType {
        if let Some(v) = self.stars.get(&body) {
            return TreeType::var(v.clone());
        }
        let name = loop {
            self.counter += 1;
            let candidate = format!("_s{}", self.counter);
            if !self.dtd.index.contains_key(&candidate) {
                break candidate;
            }
        };
        let def = TreeType::or(TreeType::concat(body.clone(), TreeType::var(name.clone())), TreeType::EmptySeq);
        self.stars.insert(body, name.clone());
        self.star_defs.push((name.clone(), def));
        TreeType::var(name)
    }

    fn particle(&mut self, p: &Particle) -> TreeType {
        match p {
            Particle::Name(n) => self.reference(n),
            Particle::Seq(ps) => {
                let items: Vec<TreeType> = ps.iter().map(|p| self.particle(p)).collect();
                items.into_iter().rev().reduce(|acc, t| TreeType::concat(t, acc)).unwrap_or(TreeType::EmptySeq)
            }
            Particle::Choice(ps) => {
                let items: Vec<TreeType> = ps.iter().map(|p| self.particle(p)).collect();
                choice(items)
            }
            Particle::Optional(p) => TreeType::or(self.particle(p), TreeType::EmptySeq),
            Particle::Star(p) => {
                let body = self.particle(p);
                self.star(body)
            }
            Particle::Plus(p) => {
                let body = self.particle(p);
                let rest = self.star(body.clone());
                TreeType::concat(body, rest)
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Entity {
    Internal(String),
    External(PathBuf),
}

struct Reader {
    entities: HashMap<String, Entity>,
    dtd: Dtd,
    /// Entities currently being expanded, to reject recursion.
    active: Vec<String>,
}

/// Position-tracking cursor over one text entity.
struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    origin: &'a str,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn starts_with(&self, s: &str) -> bool {
        self.rest().starts_with(s)
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn error(&self, message: impl Into<String>) -> SchemaError {
        let before = &self.text[..self.pos];
        let line = before.matches('\n').count() + 1;
        let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
        SchemaError::Parse { line, column, message: format!("{}: {}", self.origin, message.into()) }
    }

    /// Advances past the next occurrence of `end`.
    fn skip_past(&mut self, end: &str) -> Result<(), SchemaError> {
        match self.rest().find(end) {
            Some(i) => {
                self.pos += i + end.len();
                Ok(())
            }
            None => Err(self.error(format!("missing `{end}`"))),
        }
    }

    /// Reads a markup declaration up to its closing `>`, honouring quotes.
    fn declaration(&mut self) -> Result<&'a str, SchemaError> {
        let start = self.pos;
        let mut quote: Option<char> = None;
        for (i, c) in self.rest().char_indices() {
            match quote {
                Some(q) if c == q => quote = None,
                Some(_) => {}
                None if c == '"' || c == '\'' => quote = Some(c),
                None if c == '>' => {
                    self.pos += i + 1;
                    return Ok(&self.text[start..self.pos - 1]);
                }
                None => {}
            }
        }
        Err(self.error("unterminated declaration"))
    }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | ':' | '.' | '-')
}

/// Splits off a leading name.
fn take_name(s: &str) -> (&str, &str) {
    let end = s.find(|c: char| !is_name_char(c)).unwrap_or(s.len());
    (&s[..end], &s[end..])
}

/// Splits off a leading quoted literal, returning its content.
fn take_literal(s: &str) -> Option<(&str, &str)> {
    let q = s.chars().next().filter(|&c| c == '"' || c == '\'')?;
    let end = s[1..].find(q)? + 1;
    Some((&s[1..end], &s[end + 1..]))
}

fn decode_char_refs(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find("&#") {
        out.push_str(&rest[..i]);
        let tail = &rest[i + 2..];
        let decoded = tail.find(';').and_then(|end| {
            let code = &tail[..end];
            let value = match code.strip_prefix('x') {
                Some(hex) => u32::from_str_radix(hex, 16).ok(),
                None => code.parse().ok(),
            };
            value.and_then(char::from_u32).map(|c| (c, end))
        });
        match decoded {
            Some((c, end)) => {
                out.push(c);
                rest = &tail[end + 1..];
            }
            None => {
                out.push_str("&#");
                rest = tail;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Resolves a system identifier against the directory of the referencing
/// file. Absolute URLs are mapped to a file with the same base name.
fn resolve_system_id(base: &Path, sysid: &str) -> PathBuf {
    if sysid.contains("://") {
        let file = sysid.rsplit('/').next().unwrap_or(sysid);
        base.join(file)
    } else {
        base.join(sysid)
    }
}

impl Reader {
    fn entity_text(&self, name: &str) -> Result<(String, PathBuf, String), SchemaError> {
        match self.entities.get(name) {
            Some(Entity::Internal(v)) => Ok((v.clone(), PathBuf::new(), format!("%{name};"))),
            Some(Entity::External(path)) => {
                let text = fs::read_to_string(path).map_err(|e| SchemaError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
                Ok((text, dir, path.display().to_string()))
            }
            None => Err(SchemaError::Parse {
                line: 0,
                column: 0,
                message: format!("undeclared parameter entity `%{name};`"),
            }),
        }
    }

    /// Expands parameter entity references. Outside literals the
    /// replacement is padded with spaces.
    fn expand(&mut self, s: &str, in_literal: bool, pad: bool) -> Result<String, SchemaError> {
        let mut out = String::with_capacity(s.len());
        let mut quote: Option<char> = None;
        let mut chars = s.char_indices().peekable();
        while let Some((i, c)) = chars.next() {
            match c {
                '"' | '\'' if !in_literal => {
                    match quote {
                        Some(q) if q == c => quote = None,
                        None => quote = Some(c),
                        _ => {}
                    }
                    out.push(c);
                }
                '%' if quote.is_none() => {
                    let (name, rest) = take_name(&s[i + 1..]);
                    if name.is_empty() || !rest.starts_with(';') {
                        out.push(c);
                        continue;
                    }
                    if self.active.iter().any(|a| a == name) {
                        return Err(SchemaError::Parse {
                            line: 0,
                            column: 0,
                            message: format!("recursive parameter entity `%{name};`"),
                        });
                    }
                    let (text, _, _) = self.entity_text(name)?;
                    self.active.push(name.to_string());
                    let expanded = self.expand(&text, in_literal, pad);
                    self.active.pop();
                    if pad {
                        out.push(' ');
                    }
                    out.push_str(&expanded?);
                    if pad {
                        out.push(' ');
                    }
                    for _ in 0..name.chars().count() + 1 {
                        chars.next();
                    }
                }
                _ => out.push(c),
            }
        }
        Ok(out)
    }

    /// Processes declarations until the end of the text, or until the `]]>`
    /// closing an included section when `nested`.
    fn process(&mut self, cur: &mut Cursor<'_>, base: &Path, nested: bool) -> Result<(), SchemaError> {
        loop {
            cur.skip_ws();
            if cur.rest().is_empty() {
                if nested {
                    return Err(cur.error("unterminated conditional section"));
                }
                return Ok(());
            }
            if cur.starts_with("<!--") {
                cur.skip_past("-->")?;
            } else if cur.starts_with("<?") {
                cur.skip_past("?>")?;
            } else if cur.starts_with("<![") {
                cur.pos += 3;
                let open = cur.rest().find('[').ok_or_else(|| cur.error("malformed conditional section"))?;
                let keyword = cur.rest()[..open].to_string();
                cur.pos += open + 1;
                let keyword = self.expand(&keyword, false, false)?;
                match keyword.trim() {
                    "INCLUDE" => self.process(cur, base, true)?,
                    "IGNORE" => Self::skip_ignored(cur)?,
                    other => return Err(cur.error(format!("unknown conditional section `{other}`"))),
                }
            } else if cur.starts_with("]]>") {
                if nested {
                    cur.pos += 3;
                    return Ok(());
                }
                return Err(cur.error("unexpected `]]>`"));
            } else if cur.starts_with("%") {
                let (name, rest) = take_name(&cur.rest()[1..]);
                if name.is_empty() || !rest.starts_with(';') {
                    return Err(cur.error("malformed parameter entity reference"));
                }
                let name = name.to_string();
                cur.pos += name.len() + 2;
                if self.active.contains(&name) {
                    return Err(cur.error(format!("recursive parameter entity `%{name};`")));
                }
                let (text, dir, origin) = self.entity_text(&name).map_err(|e| match e {
                    SchemaError::Parse { message, .. } => cur.error(message),
                    other => other,
                })?;
                let dir = if dir.as_os_str().is_empty() { base.to_path_buf() } else { dir };
                self.active.push(name);
                let mut inner = Cursor { text: &text, pos: 0, origin: &origin };
                let r = self.process(&mut inner, &dir, false);
                self.active.pop();
                r?;
            } else if cur.starts_with("<!") {
                let decl = cur.declaration()?;
                self.declaration(&decl[2..], base).map_err(|e| match e {
                    SchemaError::Parse { message, .. } => cur.error(message),
                    other => other,
                })?;
            } else {
                return Err(cur.error("unexpected text in DTD"));
            }
        }
    }

    fn skip_ignored(cur: &mut Cursor<'_>) -> Result<(), SchemaError> {
        let mut depth = 1;
        while depth > 0 {
            let rest = cur.rest();
            let open = rest.find("<![");
            let close = rest.find("]]>").ok_or_else(|| cur.error("unterminated IGNORE section"))?;
            match open {
                Some(o) if o < close => {
                    depth += 1;
                    cur.pos += o + 3;
                }
                _ => {
                    depth -= 1;
                    cur.pos += close + 3;
                }
            }
        }
        Ok(())
    }

    fn declaration(&mut self, decl: &str, base: &Path) -> Result<(), SchemaError> {
        let (kind, rest) = take_name(decl);
        match kind {
            "ENTITY" => self.entity(rest, base),
            "ELEMENT" => {
                let body = self.expand(rest, false, true)?;
                self.element(&body)
            }
            "ATTLIST" => {
                let body = self.expand(rest, false, true)?;
                self.attlist(&body)
            }
            "NOTATION" => Err(SchemaError::UnsupportedDtdFeature("NOTATION declaration".into())),
            other => Err(SchemaError::Parse {
                line: 0,
                column: 0,
                message: format!("unknown declaration `<!{other}`"),
            }),
        }
    }

    fn entity(&mut self, rest: &str, base: &Path) -> Result<(), SchemaError> {
        let bad = |m: &str| SchemaError::Parse { line: 0, column: 0, message: m.to_string() };
        let rest = rest.trim_start();
        let Some(rest) = rest.strip_prefix('%') else {
            // General entities carry text only.
            return Ok(());
        };
        let rest = self.expand(rest, false, true)?;
        let (name, rest) = take_name(rest.trim_start());
        if name.is_empty() {
            return Err(bad("missing entity name"));
        }
        let name = name.to_string();
        let rest = rest.trim_start();
        let entity = if let Some((value, _)) = take_literal(rest) {
            let value = self.expand(value, true, false)?;
            Entity::Internal(decode_char_refs(&value))
        } else {
            let (keyword, rest) = take_name(rest);
            let rest = rest.trim_start();
            let sysid = match keyword {
                "SYSTEM" => take_literal(rest).map(|(s, _)| s),
                "PUBLIC" => take_literal(rest)
                    .and_then(|(_, r)| take_literal(r.trim_start()))
                    .map(|(s, _)| s),
                _ => None,
            }
            .ok_or_else(|| bad(&format!("malformed declaration of entity `{name}`")))?;
            Entity::External(resolve_system_id(base, sysid))
        };
        // The first declaration is binding.
        self.entities.entry(name).or_insert(entity);
        Ok(())
    }

    fn element(&mut self, body: &str) -> Result<(), SchemaError> {
        let (name, rest) = take_name(body.trim_start());
        if name.is_empty() {
            return Err(SchemaError::Parse { line: 0, column: 0, message: "missing element name".into() });
        }
        let mut p = ContentParser { s: rest.trim(), pos: 0 };
        let model = p.content_model().map_err(|message| SchemaError::Parse {
            line: 0,
            column: 0,
            message: format!("element `{name}`: {message}"),
        })?;
        if self.dtd.index.contains_key(name) {
            log::warn!("element `{name}` declared twice; keeping the first declaration");
            return Ok(());
        }
        self.dtd.index.insert(name.to_string(), self.dtd.elements.len());
        self.dtd.elements.push((name.to_string(), model));
        Ok(())
    }

    fn attlist(&mut self, body: &str) -> Result<(), SchemaError> {
        let bad = |m: String| SchemaError::Parse { line: 0, column: 0, message: m };
        let (element, mut rest) = take_name(body.trim_start());
        let element = element.to_string();
        loop {
            rest = rest.trim_start();
            if rest.is_empty() {
                return Ok(());
            }
            let (name, r) = take_name(rest);
            if name.is_empty() {
                return Err(bad(format!("malformed attribute list of `{element}`")));
            }
            let name = name.to_string();
            let r = r.trim_start();
            // Attribute type: a keyword, NOTATION (...), or an enumeration.
            let r = if r.starts_with('(') {
                let end = r.find(')').ok_or_else(|| bad(format!("unterminated enumeration in `{element}`")))?;
                &r[end + 1..]
            } else {
                let (ty, r) = take_name(r);
                match ty {
                    "CDATA" | "ID" | "IDREF" | "IDREFS" | "ENTITY" | "ENTITIES" | "NMTOKEN" | "NMTOKENS" => r,
                    "NOTATION" => {
                        let r = r.trim_start();
                        let end = r.find(')').ok_or_else(|| bad(format!("malformed NOTATION type in `{element}`")))?;
                        &r[end + 1..]
                    }
                    other => return Err(bad(format!("unknown attribute type `{other}` in `{element}`"))),
                }
            };
            let r = r.trim_start();
            let (required, r) = if let Some(r) = r.strip_prefix("#REQUIRED") {
                (true, r)
            } else if let Some(r) = r.strip_prefix("#IMPLIED") {
                (false, r)
            } else if let Some(r) = r.strip_prefix("#FIXED") {
                let (_, r) = take_literal(r.trim_start()).ok_or_else(|| bad(format!("missing #FIXED value in `{element}`")))?;
                (true, r)
            } else {
                let (_, r) = take_literal(r).ok_or_else(|| bad(format!("missing default of `{name}` in `{element}`")))?;
                (false, r)
            };
            // Namespace declarations are not attributes of the data model.
            let is_namespace = name == "xmlns" || name.starts_with("xmlns:");
            let list = self.dtd.attributes.entry(element.clone()).or_default();
            if !is_namespace && !list.iter().any(|a| a.name == name) {
                list.push(AttributeDecl { name, required });
            }
            rest = r;
        }
    }
}

struct ContentParser<'a> {
    s: &'a str,
    pos: usize,
}

impl ContentParser<'_> {
    fn ws(&mut self) {
        let rest = &self.s[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.ws();
        if self.s[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn content_model(&mut self) -> Result<ContentModel, String> {
        let (word, _) = take_name(self.s);
        let model = match word {
            "EMPTY" => {
                self.pos = 5;
                ContentModel::Empty
            }
            "ANY" => {
                self.pos = 3;
                ContentModel::Any
            }
            _ => {
                if !self.eat('(') {
                    return Err("expected `(`".into());
                }
                self.ws();
                if self.s[self.pos..].starts_with("#PCDATA") {
                    self.pos += 7;
                    let mut names = Vec::new();
                    while self.eat('|') {
                        self.ws();
                        let (n, _) = take_name(&self.s[self.pos..]);
                        if n.is_empty() {
                            return Err("expected a name in mixed content".into());
                        }
                        self.pos += n.len();
                        if !names.iter().any(|m| m == n) {
                            names.push(n.to_string());
                        }
                    }
                    if !self.eat(')') {
                        return Err("expected `)` after mixed content".into());
                    }
                    self.eat('*');
                    ContentModel::Mixed(names)
                } else {
                    ContentModel::Children(self.group_rest()?)
                }
            }
        };
        self.ws();
        if self.pos != self.s.len() {
            return Err(format!("unexpected `{}`", &self.s[self.pos..]));
        }
        Ok(model)
    }

    /// Parses a group after its opening parenthesis, with its suffix.
    fn group_rest(&mut self) -> Result<Particle, String> {
        let mut items = vec![self.particle()?];
        let mut sep = None;
        loop {
            self.ws();
            let c = self.s[self.pos..].chars().next().ok_or("unterminated group")?;
            match c {
                ')' => {
                    self.pos += 1;
                    break;
                }
                ',' | '|' => {
                    if sep.is_some_and(|s| s != c) {
                        return Err("mixed `,` and `|` in one group".into());
                    }
                    sep = Some(c);
                    self.pos += 1;
                    items.push(self.particle()?);
                }
                other => return Err(format!("unexpected `{other}` in content model")),
            }
        }
        let group = if items.len() == 1 {
            items.pop().unwrap()
        } else if sep == Some('|') {
            Particle::Choice(items)
        } else {
            Particle::Seq(items)
        };
        Ok(self.suffix(group))
    }

    fn particle(&mut self) -> Result<Particle, String> {
        if self.eat('(') {
            return self.group_rest();
        }
        self.ws();
        let (n, _) = take_name(&self.s[self.pos..]);
        if n.is_empty() {
            return Err("expected an element name".into());
        }
        self.pos += n.len();
        Ok(self.suffix(Particle::Name(n.to_string())))
    }

    fn suffix(&mut self, p: Particle) -> Particle {
        match self.s[self.pos..].chars().next() {
            Some('?') => {
                self.pos += 1;
                Particle::Optional(Box::new(p))
            }
            Some('*') => {
                self.pos += 1;
                Particle::Star(Box::new(p))
            }
            Some('+') => {
                self.pos += 1;
                Particle::Plus(Box::new(p))
            }
            _ => p,
        }
    }
}

/// Parses DTD text. External entities resolve relative to `base`.
pub fn parse_dtd(text: &str, base: &Path) -> Result<Dtd, SchemaError> {
    let mut reader = Reader { entities: HashMap::new(), dtd: Dtd::default(), active: Vec::new() };
    let mut cur = Cursor { text, pos: 0, origin: "DTD" };
    reader.process(&mut cur, base, false)?;
    Ok(reader.dtd)
}

/// Reads and parses a DTD file.
pub fn parse_dtd_file(path: &Path) -> Result<Dtd, SchemaError> {
    let text = fs::read_to_string(path)
        .map_err(|e| SchemaError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut reader = Reader { entities: HashMap::new(), dtd: Dtd::default(), active: Vec::new() };
    let origin = path.display().to_string();
    let mut cur = Cursor { text: &text, pos: 0, origin: &origin };
    reader.process(&mut cur, base, false)?;
    Ok(reader.dtd)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dtd(text: &str) -> Dtd {
        parse_dtd(text, Path::new(".")).unwrap()
    }

    #[test]
    fn content_models() {
        let d = dtd("<!ELEMENT a (b?, (c | d)*, e+)> <!ELEMENT b EMPTY> <!ELEMENT m (#PCDATA | b)*>");
        assert_eq!(d.element_count(), 3);
        assert_eq!(
            d.content_model("a"),
            Some(&ContentModel::Children(Particle::Seq(vec![
                Particle::Optional(Box::new(Particle::Name("b".into()))),
                Particle::Star(Box::new(Particle::Choice(vec![
                    Particle::Name("c".into()),
                    Particle::Name("d".into())
                ]))),
                Particle::Plus(Box::new(Particle::Name("e".into()))),
            ])))
        );
        assert_eq!(d.content_model("m"), Some(&ContentModel::Mixed(vec!["b".into()])));
    }

    #[test]
    fn parameter_entities_and_sections() {
        let d = dtd(r#"
            <!-- comment with <!ELEMENT x EMPTY> inside -->
            <!ENTITY % inc "INCLUDE">
            <!ENTITY % skip "IGNORE">
            <!ENTITY % names "b | c">
            <!ENTITY % inc "IGNORE">
            <![%inc;[ <!ELEMENT a (%names;)*> ]]>
            <![%skip;[ <!ELEMENT z EMPTY> <![INCLUDE[ <!ELEMENT y EMPTY> ]]> ]]>
            <!ELEMENT b EMPTY>
            <!ATTLIST b id ID #REQUIRED class CDATA #IMPLIED kind (x|y) "x">
        "#);
        assert_eq!(d.element_names(), vec!["a", "b"]);
        assert_eq!(
            d.attributes_of("b"),
            &[
                AttributeDecl { name: "id".into(), required: true },
                AttributeDecl { name: "class".into(), required: false },
                AttributeDecl { name: "kind".into(), required: false },
            ]
        );
    }

    #[test]
    fn optional_child_type() {
        let t = dtd("<!ELEMENT a (b?)><!ELEMENT b EMPTY>").tree_type("a").unwrap();
        assert_eq!(t.to_string(), "let a = a{b | ()}; b = b{} in a");
    }

    #[test]
    fn unknown_root() {
        assert_eq!(dtd("<!ELEMENT a EMPTY>").tree_type("b"), Err(SchemaError::UnknownRoot("b".into())));
    }

    #[test]
    fn notation_is_rejected() {
        assert!(matches!(
            parse_dtd("<!NOTATION n SYSTEM \"x\">", Path::new(".")),
            Err(SchemaError::UnsupportedDtdFeature(_))
        ));
    }
}
