use std::f64::consts::PI;
use std::sync::Arc;

use super::{Func, Node};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || c == '_')
}

/// Names that cannot be used as variables.
pub fn is_reserved(s: &str) -> bool {
    s == "pi" || Func::from_name(s).is_some()
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = simple {
            it.next();
            out.push((t, pos));
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut end = pos;
            let mut seen_exp = false;
            let mut prev = ' ';
            while let Some(&(i, d)) = it.peek() {
                let ok = d.is_ascii_digit()
                    || d == '.'
                    || (!seen_exp && (d == 'e' || d == 'E'))
                    || ((d == '+' || d == '-') && (prev == 'e' || prev == 'E'));
                if !ok {
                    break;
                }
                if d == 'e' || d == 'E' {
                    seen_exp = true;
                }
                prev = d;
                end = i + d.len_utf8();
                it.next();
            }
            let text = &src[pos..end];
            let value: f64 = text.parse().map_err(|_| Error::Syntax {
                position: pos,
                message: format!("malformed number `{text}`"),
            })?;
            out.push((Tok::Num(value), pos));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut end = pos;
            while let Some(&(i, d)) = it.peek() {
                if !(d.is_alphanumeric() || d == '_') {
                    break;
                }
                end = i + d.len_utf8();
                it.next();
            }
            out.push((Tok::Ident(src[pos..end].to_string()), pos));
            continue;
        }
        return Err(Error::Syntax {
            position: pos,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.at + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            position: self.pos(),
            message: message.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Add(Arc::new(lhs), Arc::new(rhs));
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Node::Sub(Arc::new(lhs), Arc::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Node::Mul(Arc::new(lhs), Arc::new(rhs));
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = Node::Div(Arc::new(lhs), Arc::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                // A bare literal after the sign becomes a negative constant,
                // unless it is the base of a power (`-2^2 = -(2^2)`).
                if let Tok::Num(v) = *self.peek() {
                    if *self.peek_at(1) != Tok::Caret {
                        self.bump();
                        return Ok(Node::Const(-v));
                    }
                }
                Ok(Node::Neg(Arc::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(Node::Pow(Arc::new(base), Arc::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.bump() {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let Some(f) = Func::from_name(&name) else {
                        return Err(Error::UnknownIdentifier(name));
                    };
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "`)` after function argument")?;
                    return Ok(Node::Call(f, Arc::new(arg)));
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(i));
                }
                if name == "pi" {
                    return Ok(Node::Const(PI));
                }
                if Func::from_name(&name).is_some() {
                    // step back so the error points at the token after the name
                    return self.err(format!("expected `(` after `{name}`"));
                }
                Err(Error::UnknownIdentifier(name))
            }
            Tok::End => self.err("unexpected end of input"),
            t => {
                self.at = self.at.saturating_sub(1);
                self.err(format!("unexpected token {t:?}"))
            }
        }
    }
}

pub(crate) fn parse(src: &str, vars: &[String]) -> Result<Node> {
    if src.trim().is_empty() {
        return Err(Error::Syntax {
            position: 0,
            message: "empty expression".into(),
        });
    }
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, vars };
    let node = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(node)
}
