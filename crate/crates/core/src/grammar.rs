//! Element grammars: a small line-oriented schema language and its validator.
//!
//! Every XML dialect this crate reads or writes (HPM-XML, the UEML subset and
//! the two B2MML subsets) is described by a grammar file under `schemas/`.
//! The files are compiled into the crate and are the normative definition of
//! the documents' structure.
//!
//! ```text
//! # comment
//! namespace urn:hpm:model:1
//! root model
//! holon  @id:id @kind=Elementary|Composite : informationalPart physicalPart? property* history
//! entry  @key @value
//! ID     : #text:id
//! ```
//!
//! Lines starting with `#` are comments. A declaration line is an element
//! name, zero or more attribute specs and an optional content model after a
//! standalone `:`.
//!
//! * `@name` is a required string attribute; a trailing `?` makes it optional.
//!   `@name:type` constrains the lexical space (`string`, `token`, `id`,
//!   `datetime`, `decimal`, `boolean`, `duration`); `@name=A|B` enumerates it.
//! * Content is `#empty` (the default), `#text`, `#text:type` or `#text=A|B`, or a sequence
//!   of child element particles with an optional `?`, `*` or `+` suffix.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use crate::ids::is_ncname;
use crate::value::{parse_number, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueType {
    String,
    Token,
    Id,
    DateTime,
    Decimal,
    Boolean,
    Duration,
}

impl ValueType {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "string" => ValueType::String,
            "token" => ValueType::Token,
            "id" => ValueType::Id,
            "datetime" => ValueType::DateTime,
            "decimal" => ValueType::Decimal,
            "boolean" => ValueType::Boolean,
            "duration" => ValueType::Duration,
            _ => return None,
        })
    }

    fn accepts(self, v: &str) -> bool {
        match self {
            ValueType::String => true,
            ValueType::Token => !v.is_empty() && v.trim() == v,
            ValueType::Id => is_ncname(v),
            ValueType::DateTime => v.parse::<Timestamp>().is_ok(),
            ValueType::Decimal => parse_number(v).is_ok(),
            ValueType::Boolean => v == "true" || v == "false",
            ValueType::Duration => is_duration(v),
        }
    }

    fn name(self) -> &'static str {
        match self {
            ValueType::String => "string",
            ValueType::Token => "token",
            ValueType::Id => "id",
            ValueType::DateTime => "datetime",
            ValueType::Decimal => "decimal",
            ValueType::Boolean => "boolean",
            ValueType::Duration => "duration",
        }
    }
}

// `PT` followed by optional hours, minutes and (possibly fractional) seconds, in that order.
fn is_duration(v: &str) -> bool {
    let Some(rest) = v.strip_prefix("PT") else { return false };
    if rest.is_empty() {
        return false;
    }
    let mut order = 0;
    let mut digits = String::new();
    for c in rest.chars() {
        match c {
            '0'..='9' | '.' => digits.push(c),
            'H' | 'M' | 'S' => {
                let rank = match c {
                    'H' => 1,
                    'M' => 2,
                    _ => 3,
                };
                let ok_digits = if c == 'S' {
                    let mut parts = digits.splitn(2, '.');
                    let int = parts.next().unwrap_or_default();
                    let frac = parts.next();
                    !int.is_empty() && int.chars().all(|d| d.is_ascii_digit()) && frac.is_none_or(|f| !f.is_empty() && f.chars().all(|d| d.is_ascii_digit()))
                } else {
                    !digits.is_empty() && digits.chars().all(|d| d.is_ascii_digit())
                };
                if rank <= order || !ok_digits {
                    return false;
                }
                order = rank;
                digits.clear();
            }
            _ => return false,
        }
    }
    digits.is_empty()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttrType {
    Typed(ValueType),
    Enum(Vec<String>),
}

impl AttrType {
    fn check(&self, v: &str) -> Result<(), String> {
        match self {
            AttrType::Typed(t) if !t.accepts(v) => Err(format!("is not a valid {}", t.name())),
            AttrType::Enum(opts) if !opts.iter().any(|o| o == v) => Err(format!("must be one of {}", opts.join("|"))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrDecl {
    pub name: String,
    pub required: bool,
    pub ty: AttrType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Occurs {
    One,
    Optional,
    Many,
    OneOrMore,
}

impl Occurs {
    fn bounds(self) -> (usize, usize) {
        match self {
            Occurs::One => (1, 1),
            Occurs::Optional => (0, 1),
            Occurs::Many => (0, usize::MAX),
            Occurs::OneOrMore => (1, usize::MAX),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Content {
    Empty,
    Text(AttrType),
    Sequence(Vec<(String, Occurs)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementDecl {
    pub name: String,
    pub attributes: Vec<AttrDecl>,
    pub content: Content,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    pub namespace: String,
    pub root: String,
    pub elements: BTreeMap<String, ElementDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("grammar line {line}: {message}")]
pub struct GrammarError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaErrorKind {
    UnknownNamespace,
    Violation,
}

/// One structural problem found while validating a document against a grammar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    pub kind: SchemaErrorKind,
    pub path: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl Grammar {
    pub fn parse(src: &str) -> Result<Self, GrammarError> {
        let mut namespace = None;
        let mut root = None;
        let mut elements = BTreeMap::new();
        for (idx, raw) in src.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| GrammarError { line, message };
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = text.split_whitespace().collect();
            let (head, content) = match tokens.iter().position(|t| *t == ":") {
                Some(pos) => (&tokens[..pos], Some(tokens[pos + 1..].join(" "))),
                None => (&tokens[..], None),
            };
            let mut words = head.iter().copied();
            let name = words.next().ok_or_else(|| err("empty declaration".into()))?;
            match name {
                "namespace" => {
                    namespace = Some(words.next().ok_or_else(|| err("namespace needs a URI".into()))?.to_string());
                    continue;
                }
                "root" => {
                    root = Some(words.next().ok_or_else(|| err("root needs an element name".into()))?.to_string());
                    continue;
                }
                _ => {}
            }
            let mut attributes = Vec::new();
            for w in words {
                attributes.push(parse_attr(w).map_err(err)?);
            }
            let content = match content.as_deref() {
                None | Some("") | Some("#empty") => Content::Empty,
                Some(c) if c.starts_with("#text") => {
                    let ty = if c == "#text" {
                        AttrType::Typed(ValueType::String)
                    } else if let Some(t) = c.strip_prefix("#text:") {
                        AttrType::Typed(ValueType::parse(t).ok_or_else(|| err(format!("unknown type {t:?}")))?)
                    } else if let Some(opts) = c.strip_prefix("#text=") {
                        AttrType::Enum(opts.split('|').map(str::to_string).collect())
                    } else {
                        return Err(err(format!("bad text content {c:?}")));
                    };
                    Content::Text(ty)
                }
                Some(c) => Content::Sequence(c.split_whitespace().map(parse_particle).collect()),
            };
            let decl = ElementDecl { name: name.to_string(), attributes, content };
            if elements.insert(name.to_string(), decl).is_some() {
                return Err(err(format!("element {name} declared twice")));
            }
        }
        let namespace = namespace.ok_or(GrammarError { line: 0, message: "missing namespace".into() })?;
        let root = root.ok_or(GrammarError { line: 0, message: "missing root".into() })?;
        let grammar = Grammar { namespace, root, elements };
        grammar.check_closed()?;
        Ok(grammar)
    }

    fn check_closed(&self) -> Result<(), GrammarError> {
        let undeclared = |n: &str| GrammarError { line: 0, message: format!("element {n} is referenced but not declared") };
        if !self.elements.contains_key(&self.root) {
            return Err(undeclared(&self.root));
        }
        for decl in self.elements.values() {
            if let Content::Sequence(ps) = &decl.content {
                for (p, _) in ps {
                    if !self.elements.contains_key(p) {
                        return Err(undeclared(p));
                    }
                }
            }
        }
        Ok(())
    }

    /// Parses `xml` and validates it. Syntax errors are returned as `Err`.
    pub fn validate_str(&self, xml: &str) -> Result<Vec<SchemaError>, roxmltree::Error> {
        let doc = roxmltree::Document::parse(xml)?;
        Ok(self.validate(&doc))
    }

    pub fn validate(&self, doc: &roxmltree::Document<'_>) -> Vec<SchemaError> {
        let mut errors = Vec::new();
        let root = doc.root_element();
        let root_path = format!("/{}", root.tag_name().name());
        if root.tag_name().namespace() != Some(self.namespace.as_str()) {
            errors.push(SchemaError {
                kind: SchemaErrorKind::UnknownNamespace,
                path: root_path,
                message: format!(
                    "root element namespace {:?} is not {:?}",
                    root.tag_name().namespace().unwrap_or(""),
                    self.namespace
                ),
            });
            return errors;
        }
        if root.tag_name().name() != self.root {
            errors.push(violation(&root_path, format!("root element must be {}", self.root)));
            return errors;
        }
        self.validate_element(root, &root_path, &mut errors);
        errors
    }

    fn validate_element(&self, node: roxmltree::Node<'_, '_>, path: &str, errors: &mut Vec<SchemaError>) {
        let name = node.tag_name().name();
        let Some(decl) = self.elements.get(name) else {
            errors.push(violation(path, format!("element {name} is not allowed here")));
            return;
        };

        for attr in node.attributes() {
            if attr.namespace().is_some() {
                errors.push(violation(path, format!("unexpected qualified attribute {}", attr.name())));
                continue;
            }
            match decl.attributes.iter().find(|a| a.name == attr.name()) {
                None => errors.push(violation(path, format!("unexpected attribute {}", attr.name()))),
                Some(a) => {
                    if let Err(why) = a.ty.check(attr.value()) {
                        errors.push(violation(path, format!("attribute {}={:?} {why}", a.name, attr.value())));
                    }
                }
            }
        }
        for a in decl.attributes.iter().filter(|a| a.required) {
            if node.attribute(a.name.as_str()).is_none() {
                errors.push(violation(path, format!("missing required attribute {}", a.name)));
            }
        }

        let children: Vec<roxmltree::Node<'_, '_>> = node.children().filter(|c| c.is_element()).collect();
        let text: String = node.children().filter(|c| c.is_text()).filter_map(|c| c.text()).collect();
        for c in &children {
            if c.tag_name().namespace() != Some(self.namespace.as_str()) {
                errors.push(violation(path, format!("child {} is outside namespace {}", c.tag_name().name(), self.namespace)));
                return;
            }
        }

        match &decl.content {
            Content::Empty => {
                if !children.is_empty() || !text.trim().is_empty() {
                    errors.push(violation(path, "element must be empty".to_string()));
                }
            }
            Content::Text(t) => {
                if !children.is_empty() {
                    errors.push(violation(path, "element must contain text only".to_string()));
                } else if let Err(why) = t.check(&text) {
                    errors.push(violation(path, format!("text {text:?} {why}")));
                }
            }
            Content::Sequence(particles) => {
                if !text.trim().is_empty() {
                    errors.push(violation(path, "unexpected text in element-only content".to_string()));
                }
                let mut i = 0;
                for (pname, occurs) in particles {
                    let (min, max) = occurs.bounds();
                    let mut count = 0;
                    while i < children.len() && count < max && children[i].tag_name().name() == pname {
                        i += 1;
                        count += 1;
                    }
                    if count < min {
                        let found = children.get(i).map_or("end of element".to_string(), |c| c.tag_name().name().to_string());
                        errors.push(violation(path, format!("expected {pname}, found {found}")));
                        return;
                    }
                }
                if let Some(extra) = children.get(i) {
                    errors.push(violation(path, format!("unexpected element {}", extra.tag_name().name())));
                    return;
                }
                let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
                for c in children {
                    let n = c.tag_name().name();
                    let k = seen.entry(n).or_default();
                    *k += 1;
                    self.validate_element(c, &format!("{path}/{n}[{k}]"), errors);
                }
            }
        }
    }
}

fn violation(path: &str, message: String) -> SchemaError {
    SchemaError { kind: SchemaErrorKind::Violation, path: path.to_string(), message }
}

fn parse_attr(w: &str) -> Result<AttrDecl, String> {
    let body = w.strip_prefix('@').ok_or_else(|| format!("expected attribute spec, found {w:?}"))?;
    let (body, required) = match body.strip_suffix('?') {
        Some(b) => (b, false),
        None => (body, true),
    };
    let (name, ty) = if let Some((n, opts)) = body.split_once('=') {
        (n, AttrType::Enum(opts.split('|').map(str::to_string).collect()))
    } else if let Some((n, t)) = body.split_once(':') {
        (n, AttrType::Typed(ValueType::parse(t).ok_or_else(|| format!("unknown type {t:?}"))?))
    } else {
        (body, AttrType::Typed(ValueType::String))
    };
    if name.is_empty() {
        return Err(format!("attribute without name in {w:?}"));
    }
    Ok(AttrDecl { name: name.to_string(), required, ty })
}

fn parse_particle(w: &str) -> (String, Occurs) {
    let (name, occurs) = match w.chars().last() {
        Some('?') => (&w[..w.len() - 1], Occurs::Optional),
        Some('*') => (&w[..w.len() - 1], Occurs::Many),
        Some('+') => (&w[..w.len() - 1], Occurs::OneOrMore),
        _ => (w, Occurs::One),
    };
    (name.to_string(), occurs)
}

macro_rules! bundled {
    ($fn:ident, $file:literal) => {
        pub fn $fn() -> &'static Grammar {
            static G: OnceLock<Grammar> = OnceLock::new();
            G.get_or_init(|| Grammar::parse(include_str!($file)).expect(concat!("bundled grammar ", $file)))
        }
    };
}

bundled!(hpm, "../schemas/hpm-xml.grammar");
bundled!(ueml, "../schemas/ueml-subset.grammar");
bundled!(b2mml_material, "../schemas/b2mml-material.grammar");
bundled!(b2mml_product_definition, "../schemas/b2mml-product-definition.grammar");

pub const HPM_GRAMMAR_SOURCE: &str = include_str!("../schemas/hpm-xml.grammar");
