//! Reader for the `.fctr` factored-formula format.
//!
//! ```text
//! # comment
//! var x1 : x;
//! var y1 : y;
//! (!x1 | !y1) & (x1 ^ y1);
//! ```
//!
//! Statements end with `;`. A `var` statement declares an existential (`x`)
//! or free (`y`) variable; every other statement is one factor. Operators,
//! loosest first: `|`, `^`, `&`, then prefix `!`. `0` and `1` are constants.
//! Existential variables are ordered by declaration.

use std::collections::HashMap;

use super::{FactoredSpec, ParseError};
use crate::aig::{AigManager, NodeRef, VarId};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Const(bool),
    Not,
    And,
    Or,
    Xor,
    LParen,
    RParen,
    Colon,
    Semi,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let simple = match c {
                '!' => Some(Tok::Not),
                '&' => Some(Tok::And),
                '|' => Some(Tok::Or),
                '^' => Some(Tok::Xor),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                ':' => Some(Tok::Colon),
                ';' => Some(Tok::Semi),
                _ => None,
            };
            if let Some(tok) = simple {
                out.push(Token { tok, line: li + 1, col });
                i += 1;
            } else if c == '#' {
                break;
            } else if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphanumeric() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '_' | '\'' | '.' | '[' | ']')) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = match word.as_str() {
                    "0" => Tok::Const(false),
                    "1" => Tok::Const(true),
                    w if w.starts_with(|ch: char| ch.is_ascii_digit()) => {
                        return Err(ParseError::at(li + 1, Some(col), format!("identifier `{}` starts with a digit", w)))
                    }
                    _ => Tok::Ident(word),
                };
                out.push(Token { tok, line: li + 1, col });
            } else {
                return Err(ParseError::at(li + 1, Some(col), format!("unexpected character `{}`", c)));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    eof: (usize, usize),
    names: HashMap<String, VarId>,
    mgr: AigManager,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|t| (t.line, t.col)).unwrap_or(self.eof)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (l, c) = self.here();
        ParseError::at(l, Some(c), msg)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {}", what)))
        }
    }

    fn or_expr(&mut self) -> Result<NodeRef, ParseError> {
        let mut acc = self.xor_expr()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            let rhs = self.xor_expr()?;
            acc = self.mgr.mk_or(acc, rhs);
        }
        Ok(acc)
    }

    fn xor_expr(&mut self) -> Result<NodeRef, ParseError> {
        let mut acc = self.and_expr()?;
        while self.peek() == Some(&Tok::Xor) {
            self.pos += 1;
            let rhs = self.and_expr()?;
            acc = self.mgr.mk_xor(acc, rhs);
        }
        Ok(acc)
    }

    fn and_expr(&mut self) -> Result<NodeRef, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = self.mgr.mk_and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<NodeRef, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(!self.unary()?)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.or_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Const(b)) => {
                self.pos += 1;
                Ok(if b { NodeRef::TRUE } else { NodeRef::FALSE })
            }
            Some(Tok::Ident(name)) => {
                let v = *self
                    .names
                    .get(&name)
                    .ok_or_else(|| self.err(format!("undeclared variable `{}`", name)))?;
                self.pos += 1;
                Ok(self.mgr.mk_var(v))
            }
            _ => Err(self.err("expected an expression")),
        }
    }
}

pub fn parse_factored(text: &str) -> Result<FactoredSpec, ParseError> {
    let toks = lex(text)?;
    let eof = (text.lines().count().max(1), text.lines().last().map_or(1, |l| l.chars().count() + 1));
    let mut p = Parser { toks: &toks, pos: 0, eof, names: HashMap::new(), mgr: AigManager::new() };
    let mut x_order = Vec::new();
    let mut y_vars = Vec::new();
    let mut factors = Vec::new();
    while p.pos < toks.len() {
        if matches!(p.peek(), Some(Tok::Ident(w)) if w == "var") {
            p.pos += 1;
            let name = match p.peek().cloned() {
                Some(Tok::Ident(n)) if n != "var" => n,
                _ => return Err(p.err("expected a variable name")),
            };
            if p.names.contains_key(&name) {
                return Err(p.err(format!("variable `{}` declared twice", name)));
            }
            p.pos += 1;
            p.expect(Tok::Colon, "`:`")?;
            let kind = match p.peek().cloned() {
                Some(Tok::Ident(k)) if k == "x" || k == "y" => k,
                _ => return Err(p.err("expected `x` or `y`")),
            };
            p.pos += 1;
            p.expect(Tok::Semi, "`;`")?;
            let id = VarId(p.names.len() as u32 + 1);
            p.mgr.set_name(id, name.clone());
            p.names.insert(name, id);
            if kind == "x" {
                x_order.push(id);
            } else {
                y_vars.push(id);
            }
        } else {
            let f = p.or_expr()?;
            p.expect(Tok::Semi, "`;` after factor")?;
            factors.push(f);
        }
    }
    Ok(FactoredSpec { manager: p.mgr, factors, x_order, y_vars })
}
