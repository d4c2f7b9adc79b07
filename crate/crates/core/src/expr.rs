//! Binary union/intersection expressions over named sets.
//!
//! ```text
//! expr := NAME | "(" expr OP expr ")"
//! OP   := "&" | "|"
//! NAME := [A-Za-z0-9_]+
//! ```
//!
//! Every operator needs its own parentheses, so `(A & B & C)` is rejected.
//!
//! ```
//! use mrset::Expr;
//!
//! let e: Expr = "((A & B) | C)".parse().unwrap();
//! assert_eq!(e, (Expr::leaf("A") & Expr::leaf("B")) | Expr::leaf("C"));
//! assert_eq!(e.to_string(), "((A & B) | C)");
//! assert!("(A & B & C)".parse::<Expr>().is_err());
//! ```

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Union,
    Intersect,
}

impl Op {
    pub fn symbol(self) -> char {
        match self {
            Op::Union => '|',
            Op::Intersect => '&',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Leaf(String),
    Node(Op, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn leaf(name: impl Into<String>) -> Expr {
        Expr::Leaf(name.into())
    }

    pub fn op(op: Op, a: Expr, b: Expr) -> Expr {
        Expr::Node(op, Box::new(a), Box::new(b))
    }

    /// Leaf names, left to right (repeats included).
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let Expr::Leaf(n) = e {
                out.push(n.as_str());
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        if let Expr::Node(_, a, b) = self {
            a.walk(f);
            b.walk(f);
        }
    }

    /// True when every internal node is an intersection.
    pub fn is_pure_intersection(&self) -> bool {
        match self {
            Expr::Leaf(_) => true,
            Expr::Node(Op::Union, _, _) => false,
            Expr::Node(Op::Intersect, a, b) => a.is_pure_intersection() && b.is_pure_intersection(),
        }
    }
}

impl std::ops::BitAnd for Expr {
    type Output = Expr;
    fn bitand(self, rhs: Expr) -> Expr {
        Expr::op(Op::Intersect, self, rhs)
    }
}

impl std::ops::BitOr for Expr {
    type Output = Expr;
    fn bitor(self, rhs: Expr) -> Expr {
        Expr::op(Op::Union, self, rhs)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Leaf(n) => f.write_str(n),
            Expr::Node(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Expr, ParseError> {
        let mut p = Parser { s: s.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let a = self.expr()?;
                let op = match self.peek() {
                    Some(b'&') => Op::Intersect,
                    Some(b'|') => Op::Union,
                    Some(_) => return Err(self.err("expected `&` or `|`")),
                    None => return Err(self.err("unexpected end of input, expected `&` or `|`")),
                };
                self.pos += 1;
                let b = self.expr()?;
                match self.peek() {
                    Some(b')') => self.pos += 1,
                    Some(b'&' | b'|') => {
                        return Err(self.err("operator chains need parentheses around each pair"))
                    }
                    Some(_) => return Err(self.err("expected `)`")),
                    None => return Err(self.err("unexpected end of input, expected `)`")),
                }
                Ok(Expr::op(op, a, b))
            }
            Some(c) if c.is_ascii_alphanumeric() || c == b'_' => {
                let start = self.pos;
                while self
                    .s
                    .get(self.pos)
                    .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
                Ok(Expr::leaf(name))
            }
            Some(_) => Err(self.err("expected a set name or `(`")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested() {
        let e: Expr = " ( A&( B_1 |c9 ) ) ".parse().unwrap();
        assert_eq!(e, Expr::leaf("A") & (Expr::leaf("B_1") | Expr::leaf("c9")));
        assert_eq!(e.leaves(), vec!["A", "B_1", "c9"]);
        assert!(!e.is_pure_intersection());
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["(A &", "A & B", "(A & B & C)", "", "()", "(A - B)", "(A & B))", "A B"] {
            assert!(bad.parse::<Expr>().is_err(), "{bad:?}");
        }
        let e = "(A &".parse::<Expr>().unwrap_err();
        assert_eq!(e.pos, 4);
    }
}
