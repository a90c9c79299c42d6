use std::fmt;

use super::ast::Location;
use super::SyntaxError;
use crate::types::{LiteralKind, SpecialKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    Int(String),
    Float(String),
    Str(String),
    Char(char),
    Ident(String),
    Keyword(Keyword),
    /// `kind<lexeme>` with no space before `<`.
    Typed(LiteralKind, String),
    /// `special<kind>`
    Special(SpecialKind),
    /// `isspecial` optionally followed by `<kind>`.
    IsSpecial(Option<SpecialKind>),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    If,
    Then,
    Else,
    Where,
    End,
    Dimension,
    True,
    False,
    And,
    Or,
    Not,
    Mod,
    First,
    Next,
    Fby,
    Wvr,
    Asa,
    Upon,
}

const KEYWORDS: [(&str, Keyword); 18] = [
    ("if", Keyword::If),
    ("then", Keyword::Then),
    ("else", Keyword::Else),
    ("where", Keyword::Where),
    ("end", Keyword::End),
    ("dimension", Keyword::Dimension),
    ("true", Keyword::True),
    ("false", Keyword::False),
    ("and", Keyword::And),
    ("or", Keyword::Or),
    ("not", Keyword::Not),
    ("mod", Keyword::Mod),
    ("first", Keyword::First),
    ("next", Keyword::Next),
    ("fby", Keyword::Fby),
    ("wvr", Keyword::Wvr),
    ("asa", Keyword::Asa),
    ("upon", Keyword::Upon),
];

impl Keyword {
    pub fn text(self) -> &'static str {
        KEYWORDS
            .iter()
            .find(|(_, k)| *k == self)
            .map(|(s, _)| *s)
            .unwrap_or("?")
    }
}

pub fn is_keyword(s: &str) -> bool {
    s == "isspecial" || KEYWORDS.iter().any(|(k, _)| *k == s)
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Int(s) | Token::Float(s) => f.write_str(s),
            Token::Str(s) => write!(f, "{s:?}"),
            Token::Char(c) => write!(f, "{c:?}"),
            Token::Ident(s) => f.write_str(s),
            Token::Keyword(k) => f.write_str(k.text()),
            Token::Typed(k, l) => write!(f, "{k}<{l}>"),
            Token::Special(k) => write!(f, "special<{k}>"),
            Token::IsSpecial(None) => f.write_str("isspecial"),
            Token::IsSpecial(Some(k)) => write!(f, "isspecial<{k}>"),
            Token::Punct(p) => f.write_str(p),
            Token::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spanned {
    pub token: Token,
    pub loc: Location,
}

const PUNCTS: [&str; 20] = [
    "!=", "<=", ">=", "+", "-", "*", "/", "=", "<", ">", "(", ")", "{", "}", ",", ":", ";", "@",
    "#", ".",
];

pub fn tokenize(src: &str, first_line: u32) -> Result<Vec<Spanned>, SyntaxError> {
    Lexer {
        chars: src.chars().collect(),
        pos: 0,
        line: first_line,
        col: 1,
    }
    .run()
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
}

impl Lexer {
    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn loc(&self) -> Location {
        Location::new(self.line, self.col)
    }

    fn error(&self, loc: Location, message: impl Into<String>) -> SyntaxError {
        SyntaxError::new(loc, message)
    }

    fn run(mut self) -> Result<Vec<Spanned>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia()?;
            let loc = self.loc();
            let Some(c) = self.peek_at(0) else {
                out.push(Spanned {
                    token: Token::Eof,
                    loc,
                });
                return Ok(out);
            };
            let token = if c.is_ascii_digit() {
                self.number()
            } else if c.is_ascii_alphabetic() || c == '_' {
                self.word(loc)?
            } else if c == '"' {
                Token::Str(self.string(loc)?)
            } else if c == '\'' {
                self.char_literal(loc)?
            } else {
                let p = PUNCTS
                    .iter()
                    .find(|p| {
                        p.chars()
                            .enumerate()
                            .all(|(i, pc)| self.peek_at(i) == Some(pc))
                    })
                    .ok_or_else(|| self.error(loc, format!("unexpected character `{c}`")))?;
                for _ in 0..p.len() {
                    self.bump();
                }
                Token::Punct(p)
            };
            out.push(Spanned { token, loc });
        }
    }

    fn skip_trivia(&mut self) -> Result<(), SyntaxError> {
        loop {
            match (self.peek_at(0), self.peek_at(1)) {
                (Some(c), _) if c.is_whitespace() => {
                    self.bump();
                }
                (Some('/'), Some('/')) => {
                    while self.peek_at(0).is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                (Some('/'), Some('*')) => {
                    let start = self.loc();
                    self.bump();
                    self.bump();
                    loop {
                        match (self.peek_at(0), self.peek_at(1)) {
                            (Some('*'), Some('/')) => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => return Err(self.error(start, "unterminated comment")),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn digits(&mut self, out: &mut String) {
        while let Some(c) = self.peek_at(0).filter(char::is_ascii_digit) {
            out.push(c);
            self.bump();
        }
    }

    fn number(&mut self) -> Token {
        let mut text = String::new();
        self.digits(&mut text);
        let mut is_float = false;
        if self.peek_at(0) == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            is_float = true;
            text.push('.');
            self.bump();
            self.digits(&mut text);
        }
        if matches!(self.peek_at(0), Some('e' | 'E')) {
            let signed = matches!(self.peek_at(1), Some('+' | '-'));
            let digit_at = if signed { 2 } else { 1 };
            if self.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                is_float = true;
                for _ in 0..digit_at {
                    text.push(self.bump().unwrap_or('e'));
                }
                self.digits(&mut text);
            }
        }
        if is_float {
            Token::Float(text)
        } else {
            Token::Int(text)
        }
    }

    fn word(&mut self, loc: Location) -> Result<Token, SyntaxError> {
        let mut w = String::new();
        while let Some(c) = self
            .peek_at(0)
            .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
        {
            w.push(c);
            self.bump();
        }
        let angled = self.peek_at(0) == Some('<');
        if angled && (LiteralKind::from_token(&w).is_some() || w == "special" || w == "isspecial") {
            self.bump();
            let mut inner = String::new();
            loop {
                match self.bump() {
                    Some('>') => break,
                    Some('\n') | None => {
                        return Err(self.error(loc, format!("unterminated `{w}<...>`")))
                    }
                    Some(c) => inner.push(c),
                }
            }
            if let Some(kind) = LiteralKind::from_token(&w) {
                return Ok(Token::Typed(kind, inner));
            }
            let kind = SpecialKind::from_name(inner.trim())
                .ok_or_else(|| self.error(loc, format!("unknown special kind `{inner}`")))?;
            return Ok(if w == "special" {
                Token::Special(kind)
            } else {
                Token::IsSpecial(Some(kind))
            });
        }
        if w == "isspecial" {
            return Ok(Token::IsSpecial(None));
        }
        Ok(match KEYWORDS.iter().find(|(k, _)| *k == w) {
            Some((_, k)) => Token::Keyword(*k),
            None => Token::Ident(w),
        })
    }

    fn escape(&mut self, loc: Location) -> Result<char, SyntaxError> {
        match self.bump() {
            Some('n') => Ok('\n'),
            Some('t') => Ok('\t'),
            Some(c @ ('\\' | '"' | '\'')) => Ok(c),
            _ => Err(self.error(loc, "invalid escape sequence")),
        }
    }

    fn string(&mut self, loc: Location) -> Result<String, SyntaxError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('"') => return Ok(s),
                Some('\\') => s.push(self.escape(loc)?),
                Some(c) => s.push(c),
                None => return Err(self.error(loc, "unterminated string")),
            }
        }
    }

    fn char_literal(&mut self, loc: Location) -> Result<Token, SyntaxError> {
        self.bump();
        let c = match self.bump() {
            Some('\\') => self.escape(loc)?,
            Some(c) if c != '\'' => c,
            _ => return Err(self.error(loc, "empty character literal")),
        };
        if self.bump() != Some('\'') {
            return Err(self.error(loc, "unterminated character literal"));
        }
        Ok(Token::Char(c))
    }
}
