//! Minimal element tree with a deterministic writer.
//!
//! Attributes are kept sorted by name and written in that order; children are
//! written in insertion order with two-space indentation. Text content is
//! written inline so whitespace inside text survives a round trip.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub name: String,
    pub attrs: BTreeMap<String, String>,
    pub body: Body,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Body {
    Empty,
    Text(String),
    Children(Vec<Element>),
}

impl Element {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), attrs: BTreeMap::new(), body: Body::Empty }
    }

    /// Leaf element holding only text.
    pub fn text(name: impl Into<String>, text: impl Into<String>) -> Self {
        Self { name: name.into(), attrs: BTreeMap::new(), body: Body::Text(text.into()) }
    }

    pub fn attr(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.attrs.insert(name.into(), value.into());
        self
    }

    pub fn opt_attr(self, name: impl Into<String>, value: Option<impl Into<String>>) -> Self {
        match value {
            Some(v) => self.attr(name, v),
            None => self,
        }
    }

    pub fn child(mut self, child: Element) -> Self {
        self.push(child);
        self
    }

    pub fn children(mut self, children: impl IntoIterator<Item = Element>) -> Self {
        for c in children {
            self.push(c);
        }
        self
    }

    pub fn push(&mut self, child: Element) {
        match &mut self.body {
            Body::Children(v) => v.push(child),
            body => *body = Body::Children(vec![child]),
        }
    }

    /// Serializes as a standalone UTF-8 document with an XML declaration.
    pub fn to_document(&self) -> String {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        self.write(&mut out, 0);
        out
    }

    fn write(&self, out: &mut String, depth: usize) {
        for _ in 0..depth {
            out.push_str("  ");
        }
        out.push('<');
        out.push_str(&self.name);
        for (k, v) in &self.attrs {
            out.push(' ');
            out.push_str(k);
            out.push_str("=\"");
            escape_attr(v, out);
            out.push('"');
        }
        match &self.body {
            Body::Empty => out.push_str("/>\n"),
            Body::Text(t) if t.is_empty() => out.push_str("/>\n"),
            Body::Text(t) => {
                out.push('>');
                escape_text(t, out);
                out.push_str("</");
                out.push_str(&self.name);
                out.push_str(">\n");
            }
            Body::Children(children) => {
                out.push_str(">\n");
                for c in children {
                    c.write(out, depth + 1);
                }
                for _ in 0..depth {
                    out.push_str("  ");
                }
                out.push_str("</");
                out.push_str(&self.name);
                out.push_str(">\n");
            }
        }
    }
}

fn escape_text(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\r' => out.push_str("&#13;"),
            _ => out.push(c),
        }
    }
}

// Whitespace characters are written as references so attribute-value normalization keeps them.
fn escape_attr(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            _ => out.push(c),
        }
    }
}

/// Text content of an element, empty when it has none.
pub(crate) fn text_of(node: roxmltree::Node<'_, '_>) -> String {
    node.children().filter(|c| c.is_text()).filter_map(|c| c.text()).collect()
}

/// Child elements with the given local name.
pub(crate) fn elements<'a, 'input: 'a>(
    node: roxmltree::Node<'a, 'input>,
    name: &'a str,
) -> impl Iterator<Item = roxmltree::Node<'a, 'input>> + 'a {
    node.children().filter(move |c| c.is_element() && c.tag_name().name() == name)
}

/// First child element with the given local name.
pub(crate) fn element<'a, 'input: 'a>(node: roxmltree::Node<'a, 'input>, name: &'a str) -> Option<roxmltree::Node<'a, 'input>> {
    elements(node, name).next()
}
