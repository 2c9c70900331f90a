//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = atom [ "^" exponent ] ;
//! exponent= [ "-" | "+" ] integer | "(" [ "-" | "+" ] integer ")" ;
//! atom    = number | "pi" | variable | call | "(" expr ")" ;
//! call    = unary_fn "(" expr ")"
//!         | "atzero" "(" expr "," expr { "," expr } ")" ;
//! unary_fn= "sin" | "cos" | "exp" | "log" | "sqrt" | "abs" | "relu" ;
//! ```
//!
//! The second argument of `atzero` must be constant. Further arguments are the
//! guard expressions; by default the guards are the free variables of the
//! first argument.

use thiserror::Error;

use super::{Expr, Unary};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(usize, Tok)>, ParseError> {
        let mut lx = Lexer {
            src,
            toks: Vec::new(),
        };
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_ascii_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() || c == '.' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &lx.src[start..i];
                let v: f64 = text.parse().map_err(|_| ParseError {
                    pos: start,
                    msg: format!("malformed number `{text}`"),
                })?;
                lx.toks.push((start, Tok::Num(v)));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                lx.toks
                    .push((start, Tok::Ident(lx.src[start..i].to_string())));
            } else if "+-*/^(),".contains(c) {
                lx.toks.push((i, Tok::Sym(c)));
                i += 1;
            } else {
                let ch = lx.src[i..].chars().next().unwrap_or(c);
                return Err(ParseError {
                    pos: i,
                    msg: format!("unexpected character `{ch}`"),
                });
            }
        }
        lx.toks.push((src.len(), Tok::End));
        Ok(lx.toks)
    }
}

struct Parser<'n> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    names: &'n [String],
}

/// Parses `src` with `names[i]` bound to `Var(i)`.
pub fn parse(src: &str, names: &[String]) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: Lexer::run(src)?,
        at: 0,
        names,
    };
    let e = p.expr()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(p.err(format!("unexpected trailing {}", describe(t)))),
    }
}

/// Parses a comma-separated list such as `t, t^2`. Commas inside
/// parentheses belong to function calls.
pub fn parse_list(src: &str, names: &[String]) -> Result<Vec<Expr>, ParseError> {
    let mut p = Parser {
        toks: Lexer::run(src)?,
        at: 0,
        names,
    };
    let mut out = vec![p.expr()?];
    loop {
        match p.peek() {
            Tok::End => return Ok(out),
            Tok::Sym(',') => {
                p.at += 1;
                out.push(p.expr()?);
            }
            t => return Err(p.err(format!("unexpected {}", describe(t)))),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::End => "end of input".into(),
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            pos: self.pos(),
            msg: msg.into(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`, found {}", describe(self.peek()))))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = lhs + self.term()?;
            } else if self.eat('-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = lhs * self.unary()?;
            } else if self.eat('/') {
                lhs = lhs / self.unary()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(-self.unary()?)
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let paren = self.eat('(');
        let neg = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        let pos = self.pos();
        let n = match self.bump() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => v as i32,
            t => {
                return Err(ParseError {
                    pos,
                    msg: format!(
                        "exponent must be an integer literal, found {}",
                        describe(&t)
                    ),
                })
            }
        };
        if paren {
            self.expect(')')?;
        }
        Ok(base.powi(if neg { -n } else { n }))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(i) = self.names.iter().position(|n| *n == name) {
                    return Ok(Expr::Var(i));
                }
                if name == "pi" {
                    return Ok(Expr::Const(std::f64::consts::PI));
                }
                if name == "atzero" {
                    return self.atzero();
                }
                if let Some(op) = Unary::from_name(&name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::Apply(op, Box::new(arg)));
                }
                Err(ParseError {
                    pos,
                    msg: format!("unknown identifier `{name}`"),
                })
            }
            t => Err(ParseError {
                pos,
                msg: format!("expected an operand, found {}", describe(&t)),
            }),
        }
    }

    fn atzero(&mut self) -> Result<Expr, ParseError> {
        self.expect('(')?;
        let inner = self.expr()?;
        self.expect(',')?;
        let vpos = self.pos();
        let value_expr = self.expr()?;
        let value = match value_expr.eval(&[]) {
            Ok(v) if value_expr.free_vars().is_empty() => v,
            _ => {
                return Err(ParseError {
                    pos: vpos,
                    msg: "atzero value must be a finite constant".into(),
                })
            }
        };
        let mut guards = Vec::new();
        while self.eat(',') {
            guards.push(self.expr()?);
        }
        self.expect(')')?;
        if guards.is_empty() {
            guards = inner.free_vars().into_iter().map(Expr::Var).collect();
        }
        Ok(Expr::AtZero {
            inner: Box::new(inner),
            value,
            guards,
        })
    }
}
