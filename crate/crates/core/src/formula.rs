//! The bimodal language: `bot`, atoms, implication, `[b]` and `[d]`.
//!
//! Concrete syntax accepts the connectives `~`, `&`, `|` and `<->` as sugar;
//! they are expanded while parsing, so a [`Formula`] only ever holds the
//! five primitive constructors.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Reserved keyword for falsum.
pub const BOT_KEYWORD: &str = "bot";

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Bot,
    Atom(Arc<str>),
    Imp(Arc<Formula>, Arc<Formula>),
    /// `[b]A`
    Box(Arc<Formula>),
    /// `[d]A`
    Tri(Arc<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: unexpected character {found:?}")]
    UnexpectedChar { offset: usize, found: char },
    #[error("syntax error at byte {offset}: expected {expected}, found {found}")]
    UnexpectedToken {
        offset: usize,
        expected: &'static str,
        found: String,
    },
    #[error("syntax error at byte {offset}: unexpected end of input, expected {expected}")]
    UnexpectedEnd {
        offset: usize,
        expected: &'static str,
    },
    #[error("syntax error at byte {offset}: unknown modality {found:?} (use [b] or [d])")]
    UnknownModality { offset: usize, found: String },
    #[error("`{0}` is reserved and cannot be used as an atom name")]
    Reserved(String),
    #[error("invalid atom name {0:?}")]
    InvalidAtom(String),
}

impl ParseError {
    /// Byte offset of the error, when it refers to a position in the input.
    pub fn offset(&self) -> Option<usize> {
        match self {
            ParseError::UnexpectedChar { offset, .. }
            | ParseError::UnexpectedToken { offset, .. }
            | ParseError::UnexpectedEnd { offset, .. }
            | ParseError::UnknownModality { offset, .. } => Some(*offset),
            ParseError::Reserved(_) | ParseError::InvalidAtom(_) => None,
        }
    }
}

fn is_ident(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_'))
}

impl Formula {
    /// Builds an atom, panicking on names outside the identifier grammar.
    ///
    /// Use [`Formula::try_atom`] for untrusted input.
    pub fn atom(name: &str) -> Formula {
        Formula::try_atom(name).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn try_atom(name: &str) -> Result<Formula, ParseError> {
        if name == BOT_KEYWORD {
            return Err(ParseError::Reserved(name.to_string()));
        }
        if !is_ident(name) {
            return Err(ParseError::InvalidAtom(name.to_string()));
        }
        Ok(Formula::Atom(Arc::from(name)))
    }

    pub fn imp(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Imp(Arc::new(lhs), Arc::new(rhs))
    }

    pub fn boxed(body: Formula) -> Formula {
        Formula::Box(Arc::new(body))
    }

    pub fn tri(body: Formula) -> Formula {
        Formula::Tri(Arc::new(body))
    }

    /// `A -> bot`
    pub fn negate(body: Formula) -> Formula {
        Formula::imp(body, Formula::Bot)
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Formula::Atom(_))
    }

    /// True for `[b]A` and `[d]A`.
    pub fn is_modal(&self) -> bool {
        matches!(self, Formula::Box(_) | Formula::Tri(_))
    }

    /// Immediate subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Bot | Formula::Atom(_) => Vec::new(),
            Formula::Imp(l, r) => vec![l, r],
            Formula::Box(b) | Formula::Tri(b) => vec![b],
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Height of the AST; a leaf has height 1.
    pub fn height(&self) -> usize {
        1 + self.children().iter().map(|c| c.height()).max().unwrap_or(0)
    }

    /// Maximum nesting of `[b]` and `[d]`.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Bot | Formula::Atom(_) => 0,
            Formula::Imp(l, r) => l.modal_depth().max(r.modal_depth()),
            Formula::Box(b) | Formula::Tri(b) => 1 + b.modal_depth(),
        }
    }

    /// The least set containing `self` and closed under immediate subformulas.
    pub fn subformula_closure(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut BTreeSet<Formula>) {
        if out.insert(self.clone()) {
            for c in self.children() {
                c.collect_subformulas(out);
            }
        }
    }

    /// Atom names occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Arc<str>>) {
        match self {
            Formula::Bot => {}
            Formula::Atom(name) => {
                out.insert(name.clone());
            }
            Formula::Imp(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
            Formula::Box(b) | Formula::Tri(b) => b.collect_atoms(out),
        }
    }
}

/// Subformula closure of a whole collection of formulas.
pub fn closure_of<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> BTreeSet<Formula> {
    let mut out = BTreeSet::new();
    for f in formulas {
        f.collect_subformulas(&mut out);
    }
    out
}

pub fn subformula_closure(f: &Formula) -> BTreeSet<Formula> {
    f.subformula_closure()
}

pub fn modal_depth(f: &Formula) -> usize {
    f.modal_depth()
}

// ---------------------------------------------------------------------------
// Printing

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Bot => f.write_str(BOT_KEYWORD),
            Formula::Atom(name) => f.write_str(name),
            Formula::Imp(l, r) => {
                if matches!(**l, Formula::Imp(..)) {
                    write!(f, "({l}) -> {r}")
                } else {
                    write!(f, "{l} -> {r}")
                }
            }
            Formula::Box(b) => write_unary(f, "[b]", b),
            Formula::Tri(b) => write_unary(f, "[d]", b),
        }
    }
}

fn write_unary(f: &mut fmt::Formatter<'_>, op: &str, body: &Formula) -> fmt::Result {
    if matches!(body, Formula::Imp(..)) {
        write!(f, "{op}({body})")
    } else {
        write!(f, "{op}{body}")
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Formula({self})")
    }
}

/// Canonical text of `f`: minimal parentheses, no sugar.
pub fn print(f: &Formula) -> String {
    f.to_string()
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Bot,
    Not,
    And,
    Or,
    Arrow,
    Iff,
    BoxOp,
    TriOp,
    LParen,
    RParen,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(name) => format!("identifier `{name}`"),
            Token::Bot => "`bot`".into(),
            Token::Not => "`~`".into(),
            Token::And => "`&`".into(),
            Token::Or => "`|`".into(),
            Token::Arrow => "`->`".into(),
            Token::Iff => "`<->`".into(),
            Token::BoxOp => "`[b]`".into(),
            Token::TriOp => "`[d]`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => {
                i += 1;
                Token::LParen
            }
            b')' => {
                i += 1;
                Token::RParen
            }
            b'~' => {
                i += 1;
                Token::Not
            }
            b'&' => {
                i += 1;
                Token::And
            }
            b'|' => {
                i += 1;
                Token::Or
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 2;
                Token::Arrow
            }
            b'<' if text[i..].starts_with("<->") => {
                i += 3;
                Token::Iff
            }
            b'[' => {
                let close = text[i..].find(']').map(|k| i + k);
                match close {
                    Some(end) if &text[i..=end] == "[b]" => {
                        i = end + 1;
                        Token::BoxOp
                    }
                    Some(end) if &text[i..=end] == "[d]" => {
                        i = end + 1;
                        Token::TriOp
                    }
                    Some(end) if end - i <= 8 => {
                        return Err(ParseError::UnknownModality {
                            offset: start,
                            found: text[i..=end].to_string(),
                        })
                    }
                    _ => {
                        return Err(ParseError::UnexpectedChar {
                            offset: start,
                            found: '[',
                        })
                    }
                }
            }
            b'a'..=b'z' => {
                while i < bytes.len()
                    && matches!(bytes[i], b'a'..=b'z' | b'0'..=b'9' | b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                if word == BOT_KEYWORD {
                    Token::Bot
                } else {
                    Token::Ident(word.to_string())
                }
            }
            _ => {
                let found = text[i..].chars().next().unwrap_or('\u{fffd}');
                return Err(ParseError::UnexpectedChar { offset: i, found });
            }
        };
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn eat(&mut self, tok: &Token) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.iff()?;
        if self.eat(&Token::Arrow) {
            let rhs = self.imp()?;
            Ok(Formula::imp(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.disj()?;
        while self.eat(&Token::Iff) {
            let rhs = self.disj()?;
            acc = iff(acc, rhs);
        }
        Ok(acc)
    }

    fn disj(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conj()?;
        while self.eat(&Token::Or) {
            let rhs = self.conj()?;
            acc = or(acc, rhs);
        }
        Ok(acc)
    }

    fn conj(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.eat(&Token::And) {
            let rhs = self.unary()?;
            acc = and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat(&Token::Not) {
            return Ok(Formula::negate(self.unary()?));
        }
        if self.eat(&Token::BoxOp) {
            return Ok(Formula::boxed(self.unary()?));
        }
        if self.eat(&Token::TriOp) {
            return Ok(Formula::tri(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        const EXPECTED: &str = "a formula";
        let offset = self.offset();
        let Some(tok) = self.peek().cloned() else {
            return Err(ParseError::UnexpectedEnd {
                offset,
                expected: EXPECTED,
            });
        };
        self.pos += 1;
        match tok {
            Token::Bot => Ok(Formula::Bot),
            Token::Ident(name) => Ok(Formula::Atom(Arc::from(name.as_str()))),
            Token::LParen => {
                let inner = self.imp()?;
                if self.eat(&Token::RParen) {
                    Ok(inner)
                } else {
                    Err(self.unexpected("`)`"))
                }
            }
            other => Err(ParseError::UnexpectedToken {
                offset,
                expected: EXPECTED,
                found: other.describe(),
            }),
        }
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        match self.peek() {
            Some(tok) => ParseError::UnexpectedToken {
                offset: self.offset(),
                expected,
                found: tok.describe(),
            },
            None => ParseError::UnexpectedEnd {
                offset: self.end,
                expected,
            },
        }
    }
}

fn and(a: Formula, b: Formula) -> Formula {
    Formula::negate(Formula::imp(a, Formula::negate(b)))
}

fn or(a: Formula, b: Formula) -> Formula {
    Formula::imp(Formula::negate(a), b)
}

fn iff(a: Formula, b: Formula) -> Formula {
    and(Formula::imp(a.clone(), b.clone()), Formula::imp(b, a))
}

/// Parses concrete syntax into a desugared formula.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let f = parser.imp()?;
    if parser.pos < parser.tokens.len() {
        return Err(parser.unexpected("end of input"));
    }
    Ok(f)
}
