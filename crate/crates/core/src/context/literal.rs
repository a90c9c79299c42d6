//! Constant context literals as written on the command line and in
//! fixtures: `{d:1, e:"x"}`, `{{d:1},{d:2}}`, `{app:{cfg:{lang:"en"}}}`.
//!
//! A subtree may carry a default tag written just before its braces:
//! `{cfg:"v1" {lang:"en"}}`.

use std::fmt;

use thiserror::Error;

use super::{Child, ContextSet, DimensionName, SimpleContext, TagValue, TreeNode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("context literal, column {column}: {message}")]
pub struct LiteralError {
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContextLiteral {
    Point(SimpleContext),
    Set(ContextSet),
    Tree(TreeNode),
}

impl ContextLiteral {
    /// The point this literal denotes, if it is one. A tree made only of
    /// leaves is not produced by the parser, so trees never qualify.
    pub fn into_point(self) -> Option<SimpleContext> {
        match self {
            ContextLiteral::Point(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for ContextLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextLiteral::Point(c) => c.fmt(f),
            ContextLiteral::Set(s) => s.fmt(f),
            ContextLiteral::Tree(t) => t.fmt(f),
        }
    }
}

pub fn parse_context_literal(src: &str) -> Result<ContextLiteral, LiteralError> {
    let mut p = Parser {
        chars: src.chars().collect(),
        pos: 0,
    };
    let lit = p.literal()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error("trailing input after literal"));
    }
    Ok(lit)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn error(&self, message: &str) -> LiteralError {
        LiteralError {
            column: self.pos + 1,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<(), LiteralError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn literal(&mut self) -> Result<ContextLiteral, LiteralError> {
        self.expect('{')?;
        if self.peek() == Some('{') {
            let mut set = ContextSet::new();
            loop {
                match self.braced_node()? {
                    node if node_is_flat(&node) => {
                        set.insert(node.effective_context());
                    }
                    _ => return Err(self.error("set elements must be points")),
                }
                match self.peek() {
                    Some(',') => self.pos += 1,
                    Some('}') => {
                        self.pos += 1;
                        return Ok(ContextLiteral::Set(set));
                    }
                    _ => return Err(self.error("expected `,` or `}` in context set")),
                }
            }
        }
        let node = self.node_body()?;
        if node_is_flat(&node) {
            Ok(ContextLiteral::Point(node.effective_context()))
        } else {
            Ok(ContextLiteral::Tree(node))
        }
    }

    fn braced_node(&mut self) -> Result<TreeNode, LiteralError> {
        self.expect('{')?;
        self.node_body()
    }

    // after the opening brace
    fn node_body(&mut self) -> Result<TreeNode, LiteralError> {
        let mut node = TreeNode::new();
        if self.peek() == Some('}') {
            self.pos += 1;
            return Ok(node);
        }
        loop {
            let d = self.dimension()?;
            self.expect(':')?;
            let child = match self.peek() {
                Some('{') => Child::Node(self.braced_node()?),
                _ => {
                    let tag = self.tag()?;
                    if self.peek() == Some('{') {
                        let mut sub = self.braced_node()?;
                        sub.default = Some(tag);
                        Child::Node(sub)
                    } else {
                        Child::Leaf(tag)
                    }
                }
            };
            node.children.insert(d, child);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some('}') => {
                    self.pos += 1;
                    return Ok(node);
                }
                _ => return Err(self.error("expected `,` or `}`")),
            }
        }
    }

    fn dimension(&mut self) -> Result<DimensionName, LiteralError> {
        self.skip_ws();
        let start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_')
        {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        DimensionName::new(name).map_err(|_| LiteralError {
            column: start + 1,
            message: "expected a dimension name".into(),
        })
    }

    fn tag(&mut self) -> Result<TagValue, LiteralError> {
        match self.peek() {
            Some('"') => self.string().map(TagValue::Str),
            Some(c) if c == '-' || c.is_ascii_digit() => {
                let start = self.pos;
                self.pos += 1;
                while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let text: String = self.chars[start..self.pos].iter().collect();
                text.parse().map(TagValue::Int).map_err(|_| LiteralError {
                    column: start + 1,
                    message: format!("`{text}` is not a 64-bit integer tag"),
                })
            }
            _ => Err(self.error("expected an integer or string tag")),
        }
    }

    fn string(&mut self) -> Result<String, LiteralError> {
        self.pos += 1;
        let mut out = String::new();
        loop {
            let c = *self
                .chars
                .get(self.pos)
                .ok_or_else(|| self.error("unterminated string"))?;
            self.pos += 1;
            match c {
                '"' => return Ok(out),
                '\\' => {
                    let e = *self
                        .chars
                        .get(self.pos)
                        .ok_or_else(|| self.error("unterminated escape"))?;
                    self.pos += 1;
                    out.push(match e {
                        'n' => '\n',
                        't' => '\t',
                        other => other,
                    });
                }
                c => out.push(c),
            }
        }
    }
}

fn node_is_flat(node: &TreeNode) -> bool {
    node.default.is_none() && node.children.values().all(|c| matches!(c, Child::Leaf(_)))
}
