//! Syntax highlighting driven by woven `group` attributes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::Range;

use thiserror::Error;

use crate::annotations::{AnnotationStore, Value};
use crate::runtime::ParseTree;

/// Group given to tokens nothing annotates.
pub const PLAIN: &str = "plain";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HighlightSpan {
    pub span: Range<usize>,
    pub group: String,
}

/// The group named by a `group` attribute on `node`, if it has a usable one.
fn group_of(store: &AnnotationStore, node: crate::NodeId) -> Option<&str> {
    match store.value(node, "group")? {
        Value::Name(s) | Value::Str(s) => Some(s),
        _ => None,
    }
}

/// One span per token. A token's group comes from its grammar leaf, or else
/// from the innermost enclosing node that derives nothing but this token.
pub fn assign_groups(tree: &ParseTree, store: &AnnotationStore) -> Vec<HighlightSpan> {
    tree.leaves()
        .into_iter()
        .map(|leaf| {
            let k = tree.nodes[leaf].token.expect("leaf carries a token");
            let group = std::iter::once(leaf)
                .chain(tree.ancestors(leaf))
                .take_while(|&n| tree.nodes[n].tokens == (k..k + 1))
                .find_map(|n| group_of(store, tree.nodes[n].gt))
                .unwrap_or(PLAIN);
            HighlightSpan {
                span: tree.tokens[k].span.clone(),
                group: group.to_string(),
            }
        })
        .collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpanError {
    #[error("span {0:?} lies outside the input")]
    OutOfBounds(Range<usize>),
    #[error("span {0:?} does not fall on character boundaries")]
    NotCharBoundary(Range<usize>),
    #[error("span {1:?} overlaps or precedes span {0:?}")]
    Overlap(Range<usize>, Range<usize>),
}

/// Spans must be ascending, non-overlapping and inside `input`.
pub fn validate_spans(input: &str, spans: &[HighlightSpan]) -> Result<(), SpanError> {
    let mut prev: Option<&Range<usize>> = None;
    for s in spans {
        let r = &s.span;
        if r.start > r.end || r.end > input.len() {
            return Err(SpanError::OutOfBounds(r.clone()));
        }
        if !input.is_char_boundary(r.start) || !input.is_char_boundary(r.end) {
            return Err(SpanError::NotCharBoundary(r.clone()));
        }
        if let Some(p) = prev {
            if r.start < p.end {
                return Err(SpanError::Overlap(p.clone(), r.clone()));
            }
        }
        prev = Some(r);
    }
    Ok(())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Color {
    Black,
    Red,
    Green,
    Yellow,
    Blue,
    Magenta,
    Cyan,
    White,
}

const COLORS: [(&str, Color); 8] = [
    ("black", Color::Black),
    ("red", Color::Red),
    ("green", Color::Green),
    ("yellow", Color::Yellow),
    ("blue", Color::Blue),
    ("magenta", Color::Magenta),
    ("cyan", Color::Cyan),
    ("white", Color::White),
];

impl Color {
    pub fn name(self) -> &'static str {
        COLORS.iter().find(|(_, c)| *c == self).expect("all colors listed").0
    }

    fn sgr(self) -> u8 {
        30 + COLORS.iter().position(|(_, c)| *c == self).expect("all colors listed") as u8
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct Style {
    pub color: Option<Color>,
    pub bold: bool,
    pub underline: bool,
}

impl Style {
    pub fn is_plain(&self) -> bool {
        *self == Style::default()
    }

    fn sgr(&self) -> String {
        let mut codes = Vec::new();
        if self.bold {
            codes.push("1".to_string());
        }
        if self.underline {
            codes.push("4".to_string());
        }
        if let Some(c) = self.color {
            codes.push(c.sgr().to_string());
        }
        format!("\x1b[{}m", codes.join(";"))
    }

    fn css(&self) -> String {
        let mut out = String::new();
        if let Some(c) = self.color {
            let _ = write!(out, " color: {};", c.name());
        }
        if self.bold {
            out.push_str(" font-weight: bold;");
        }
        if self.underline {
            out.push_str(" text-decoration: underline;");
        }
        out
    }
}

pub const SGR_RESET: &str = "\x1b[0m";

/// Display styles per group. Groups without an entry render plain.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Palette {
    styles: BTreeMap<String, Style>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct PaletteError {
    pub line: usize,
    pub message: String,
}

impl Palette {
    /// Parse `group = color [bold] [underline]` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, PaletteError> {
        let mut styles = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| PaletteError { line, message };
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let (group, rest) = l
                .split_once('=')
                .ok_or_else(|| err("expected `group = style`".into()))?;
            let group = group.trim();
            if group.is_empty() || !group.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(err(format!("bad group name `{group}`")));
            }
            let mut style = Style::default();
            for word in rest.split_whitespace() {
                match word {
                    "bold" => style.bold = true,
                    "underline" => style.underline = true,
                    w => match COLORS.iter().find(|(n, _)| *n == w) {
                        Some((_, c)) if style.color.is_none() => style.color = Some(*c),
                        Some(_) => return Err(err(format!("`{group}` has two colors"))),
                        None => return Err(err(format!("unknown style `{w}`"))),
                    },
                }
            }
            if styles.insert(group.to_string(), style).is_some() {
                return Err(err(format!("group `{group}` is styled twice")));
            }
        }
        Ok(Palette { styles })
    }

    pub fn insert(&mut self, group: &str, style: Style) {
        self.styles.insert(group.to_string(), style);
    }

    pub fn style(&self, group: &str) -> Style {
        self.styles.get(group).copied().unwrap_or_default()
    }

    pub fn groups(&self) -> impl Iterator<Item = (&str, &Style)> {
        self.styles.iter().map(|(g, s)| (g.as_str(), s))
    }

    /// CSS rules for every styled group, keyed by class name.
    pub fn stylesheet(&self) -> String {
        let mut out = String::new();
        for (g, s) in self.groups().filter(|(_, s)| !s.is_plain()) {
            let _ = writeln!(out, "pre.weft .{g} {{{} }}", s.css());
        }
        out
    }
}

/// Wrap each styled span in SGR codes; everything else is copied verbatim.
pub fn render_ansi(input: &str, spans: &[HighlightSpan], palette: &Palette) -> Result<String, SpanError> {
    validate_spans(input, spans)?;
    let mut out = String::with_capacity(input.len());
    let mut pos = 0;
    for s in spans {
        out.push_str(&input[pos..s.span.start]);
        let text = &input[s.span.clone()];
        let style = palette.style(&s.group);
        if style.is_plain() || text.is_empty() {
            out.push_str(text);
        } else {
            out.push_str(&style.sgr());
            out.push_str(text);
            out.push_str(SGR_RESET);
        }
        pos = s.span.end;
    }
    out.push_str(&input[pos..]);
    Ok(out)
}

pub fn escape_html(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
}

/// A `<pre>` element with every non-plain token in a `<span>` classed by its group.
pub fn render_html(input: &str, spans: &[HighlightSpan]) -> Result<String, SpanError> {
    validate_spans(input, spans)?;
    let mut out = String::from("<pre class=\"weft\">");
    let mut pos = 0;
    for s in spans {
        escape_html(&input[pos..s.span.start], &mut out);
        let text = &input[s.span.clone()];
        if s.group == PLAIN || text.is_empty() {
            escape_html(text, &mut out);
        } else {
            out.push_str("<span class=\"");
            escape_html(&s.group, &mut out);
            out.push_str("\">");
            escape_html(text, &mut out);
            out.push_str("</span>");
        }
        pos = s.span.end;
    }
    escape_html(&input[pos..], &mut out);
    out.push_str("</pre>");
    Ok(out)
}

/// A standalone page around a [`render_html`] fragment.
pub fn html_document(fragment: &str, palette: &Palette) -> String {
    format!(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<style>\n{}</style>\n</head>\n<body>\n{fragment}\n</body>\n</html>\n",
        palette.stylesheet()
    )
}
