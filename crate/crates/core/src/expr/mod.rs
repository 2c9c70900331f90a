//! Closed-vocabulary expression trees over real variables.
//!
//! Expressions are the only way functions, plaques and curves enter the
//! laboratory. Variables are positional (`Var(i)` is the `i`-th input); the
//! names only matter to the parser and to [`Expr::display`].
//!
//! Guards are strict: evaluating `1/x` at `x = 0` or `log(x)` at `x <= 0` is a
//! [`EvalError::Domain`], never a silent `inf`/`NaN`.

mod diff;
mod parse;

use std::collections::BTreeSet;
use std::fmt;
use std::ops;

use thiserror::Error;

pub use parse::{parse, parse_list, ParseError};

/// Unary primitives.
///
/// `Sign` and `Step` never come out of the parser. They appear only in
/// derivative expressions (`d|u| = sign(u) du`, `d relu(u) = step(u) du`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unary {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Relu,
    Sign,
    Step,
}

impl Unary {
    pub fn name(self) -> &'static str {
        match self {
            Unary::Sin => "sin",
            Unary::Cos => "cos",
            Unary::Exp => "exp",
            Unary::Log => "log",
            Unary::Sqrt => "sqrt",
            Unary::Abs => "abs",
            Unary::Relu => "relu",
            Unary::Sign => "sign",
            Unary::Step => "step",
        }
    }

    pub(crate) fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Unary::Sin,
            "cos" => Unary::Cos,
            "exp" => Unary::Exp,
            "log" => Unary::Log,
            "sqrt" => Unary::Sqrt,
            "abs" => Unary::Abs,
            "relu" => Unary::Relu,
            _ => return None,
        })
    }

    fn apply(self, u: f64) -> Result<f64, EvalError> {
        let op = self.name();
        Ok(match self {
            Unary::Sin => u.sin(),
            Unary::Cos => u.cos(),
            Unary::Exp => u.exp(),
            Unary::Log if u <= 0.0 => return Err(EvalError::Domain { op, arg: u }),
            Unary::Log => u.ln(),
            Unary::Sqrt if u < 0.0 => return Err(EvalError::Domain { op, arg: u }),
            Unary::Sqrt => u.sqrt(),
            Unary::Abs => u.abs(),
            Unary::Relu => u.max(0.0),
            Unary::Sign | Unary::Step if u == 0.0 => return Err(EvalError::Kink { op }),
            Unary::Sign => u.signum(),
            Unary::Step => {
                if u > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer power; the exponent is part of the tree, never a variable.
    Pow(Box<Expr>, i32),
    Apply(Unary, Box<Expr>),
    /// `inner` everywhere except where every guard vanishes exactly, where the
    /// value is `value`. A freshly parsed `atzero(e, v)` guards on the free
    /// variables of `e`; substitution carries the guards along.
    AtZero {
        inner: Box<Expr>,
        value: f64,
        guards: Vec<Expr>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EvalError {
    #[error("{op} is undefined at {arg}")]
    Domain { op: &'static str, arg: f64 },
    #[error("{op} evaluated exactly at its kink")]
    Kink { op: &'static str },
    #[error("variable #{index} is unbound ({len} inputs)")]
    Arity { index: usize, len: usize },
    #[error("non-finite value")]
    Overflow,
}

impl From<EvalError> for crate::Error {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Kink { op } => crate::Error::Kink(format!("{op} evaluated at its kink")),
            EvalError::Arity { index, len } => crate::Error::Arity {
                index,
                available: len,
            },
            other => crate::Error::Domain(other.to_string()),
        }
    }
}

impl Expr {
    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn apply(op: Unary, e: Expr) -> Expr {
        match e {
            Expr::Const(c) if !matches!(op, Unary::Sign | Unary::Step | Unary::Log) => {
                match op.apply(c) {
                    Ok(v) => Expr::Const(v),
                    Err(_) => Expr::Apply(op, Box::new(Expr::Const(c))),
                }
            }
            e => Expr::Apply(op, Box::new(e)),
        }
    }

    pub fn sin(self) -> Expr {
        Expr::apply(Unary::Sin, self)
    }
    pub fn cos(self) -> Expr {
        Expr::apply(Unary::Cos, self)
    }
    pub fn exp(self) -> Expr {
        Expr::apply(Unary::Exp, self)
    }
    pub fn ln(self) -> Expr {
        Expr::apply(Unary::Log, self)
    }
    pub fn sqrt(self) -> Expr {
        Expr::apply(Unary::Sqrt, self)
    }
    pub fn abs(self) -> Expr {
        Expr::apply(Unary::Abs, self)
    }
    pub fn relu(self) -> Expr {
        Expr::apply(Unary::Relu, self)
    }

    pub fn powi(self, n: i32) -> Expr {
        match (self, n) {
            (_, 0) => Expr::Const(1.0),
            (e, 1) => e,
            (Expr::Const(c), n) if c != 0.0 || n > 0 => Expr::Const(c.powi(n)),
            (e, n) => Expr::Pow(Box::new(e), n),
        }
    }

    /// `atzero(inner, value)` guarding on the free variables of `inner`.
    pub fn at_zero(inner: Expr, value: f64) -> Expr {
        let guards = inner.free_vars().into_iter().map(Expr::Var).collect();
        Expr::AtZero {
            inner: Box::new(inner),
            value,
            guards,
        }
    }

    /// Linear form `Σ coeffs[i] · x_i`.
    pub fn linear(coeffs: &[f64]) -> Expr {
        coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, &c)| Expr::Const(c) * Expr::Var(i))
            .reduce(|a, b| a + b)
            .unwrap_or(Expr::Const(0.0))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn free_vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    /// Subexpressions whose zeros may break smoothness of `self`: arguments
    /// of `abs`, `relu`, `sign`, `step`, `sqrt`, `log`, denominators and
    /// `atzero` guards.
    pub fn critical_args(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        self.collect_critical(&mut out);
        out
    }

    fn collect_critical<'a>(&'a self, out: &mut Vec<&'a Expr>) {
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Neg(a) => a.collect_critical(out),
            Expr::Pow(a, n) => {
                if *n < 0 {
                    out.push(a);
                }
                a.collect_critical(out);
            }
            Expr::Apply(op, a) => {
                if !matches!(op, Unary::Sin | Unary::Cos | Unary::Exp) {
                    out.push(a);
                }
                a.collect_critical(out);
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_critical(out);
                b.collect_critical(out);
            }
            Expr::Div(a, b) => {
                out.push(b);
                a.collect_critical(out);
                b.collect_critical(out);
            }
            Expr::AtZero { inner, guards, .. } => {
                out.extend(guards.iter());
                inner.collect_critical(out);
                for g in guards {
                    g.collect_critical(out);
                }
            }
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(i) => {
                out.insert(*i);
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Apply(_, a) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::AtZero { inner, guards, .. } => {
                inner.collect_vars(out);
                for g in guards {
                    g.collect_vars(out);
                }
            }
        }
    }

    /// Number of inputs the expression needs (one past the largest index).
    pub fn arity(&self) -> usize {
        self.free_vars().last().map_or(0, |i| i + 1)
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Apply(_, a) => 1 + a.node_count(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
            Expr::AtZero { inner, guards, .. } => {
                1 + inner.node_count() + guards.iter().map(Expr::node_count).sum::<usize>()
            }
        }
    }

    /// True when the tree contains a primitive with a kink or an override.
    pub fn has_nonsmooth_primitive(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Apply(Unary::Abs | Unary::Relu | Unary::Sign | Unary::Step, _) => true,
            Expr::AtZero { .. } => true,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Apply(_, a) => a.has_nonsmooth_primitive(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.has_nonsmooth_primitive() || b.has_nonsmooth_primitive()
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let v = self.eval_raw(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Overflow)
        }
    }

    fn eval_raw(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => *x.get(*i).ok_or(EvalError::Arity {
                index: *i,
                len: x.len(),
            })?,
            Expr::Neg(a) => -a.eval_raw(x)?,
            Expr::Add(a, b) => a.eval_raw(x)? + b.eval_raw(x)?,
            Expr::Sub(a, b) => a.eval_raw(x)? - b.eval_raw(x)?,
            Expr::Mul(a, b) => a.eval_raw(x)? * b.eval_raw(x)?,
            Expr::Div(a, b) => {
                let num = a.eval_raw(x)?;
                let den = b.eval_raw(x)?;
                if den == 0.0 {
                    return Err(EvalError::Domain { op: "/", arg: den });
                }
                num / den
            }
            Expr::Pow(a, n) => {
                let u = a.eval_raw(x)?;
                if u == 0.0 && *n < 0 {
                    return Err(EvalError::Domain { op: "^", arg: u });
                }
                u.powi(*n)
            }
            Expr::Apply(op, a) => op.apply(a.eval_raw(x)?)?,
            Expr::AtZero {
                inner,
                value,
                guards,
            } => {
                let mut at_origin = true;
                for g in guards {
                    if g.eval_raw(x)? != 0.0 {
                        at_origin = false;
                        break;
                    }
                }
                if at_origin {
                    *value
                } else {
                    inner.eval_raw(x)?
                }
            }
        })
    }

    /// Replace `Var(i)` by `subs[i]`; composition `f ∘ p` is
    /// `f.substitute(&p.exprs)`.
    pub fn substitute(&self, subs: &[Expr]) -> crate::Result<Expr> {
        if let Some(&i) = self.free_vars().last() {
            if i >= subs.len() {
                return Err(crate::Error::Arity {
                    index: i,
                    available: subs.len(),
                });
            }
        }
        Ok(self.subst_unchecked(subs))
    }

    fn subst_unchecked(&self, subs: &[Expr]) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => subs[*i].clone(),
            Expr::Neg(a) => -a.subst_unchecked(subs),
            Expr::Add(a, b) => a.subst_unchecked(subs) + b.subst_unchecked(subs),
            Expr::Sub(a, b) => a.subst_unchecked(subs) - b.subst_unchecked(subs),
            Expr::Mul(a, b) => a.subst_unchecked(subs) * b.subst_unchecked(subs),
            Expr::Div(a, b) => a.subst_unchecked(subs) / b.subst_unchecked(subs),
            Expr::Pow(a, n) => a.subst_unchecked(subs).powi(*n),
            Expr::Apply(op, a) => Expr::Apply(*op, Box::new(a.subst_unchecked(subs))),
            Expr::AtZero {
                inner,
                value,
                guards,
            } => Expr::AtZero {
                inner: Box::new(inner.subst_unchecked(subs)),
                value: *value,
                guards: guards.iter().map(|g| g.subst_unchecked(subs)).collect(),
            },
        }
    }

    /// Renders with the given variable names; unnamed indices print as `_i`.
    pub fn display<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl ExprDisplay<'_> {
    fn write(&self, e: &Expr, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let own = precedence(e);
        let paren = own < prec;
        if paren {
            f.write_str("(")?;
        }
        match e {
            Expr::Const(c) => write!(f, "{c}")?,
            Expr::Var(i) => match self.names.get(*i) {
                Some(n) => f.write_str(n)?,
                None => write!(f, "_{i}")?,
            },
            Expr::Neg(a) => {
                f.write_str("-")?;
                self.write(a, 3, f)?;
            }
            Expr::Add(a, b) => {
                self.write(a, 1, f)?;
                f.write_str(" + ")?;
                self.write(b, 2, f)?;
            }
            Expr::Sub(a, b) => {
                self.write(a, 1, f)?;
                f.write_str(" - ")?;
                self.write(b, 2, f)?;
            }
            Expr::Mul(a, b) => {
                self.write(a, 2, f)?;
                f.write_str("*")?;
                self.write(b, 3, f)?;
            }
            Expr::Div(a, b) => {
                self.write(a, 2, f)?;
                f.write_str("/")?;
                self.write(b, 3, f)?;
            }
            Expr::Pow(a, n) => {
                self.write(a, 5, f)?;
                if *n < 0 {
                    write!(f, "^({n})")?;
                } else {
                    write!(f, "^{n}")?;
                }
            }
            Expr::Apply(op, a) => {
                write!(f, "{}(", op.name())?;
                self.write(a, 0, f)?;
                f.write_str(")")?;
            }
            Expr::AtZero {
                inner,
                value,
                guards,
            } => {
                f.write_str("atzero(")?;
                self.write(inner, 0, f)?;
                write!(f, ", {value}")?;
                let default: Vec<Expr> = inner.free_vars().into_iter().map(Expr::Var).collect();
                if *guards != default {
                    for g in guards {
                        f.write_str(", ")?;
                        self.write(g, 0, f)?;
                    }
                }
                f.write_str(")")?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(_) => 3,
        Expr::Const(c) if *c < 0.0 || c.is_sign_negative() => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(self.expr, 0, f)
    }
}

// Light constant folding keeps derivative trees from ballooning; it is not a
// simplifier.
impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Const(a), Expr::Const(b)) => Expr::Const(a + b),
            (a, b) if b.is_zero() => a,
            (a, b) if a.is_zero() => b,
            (a, b) => Expr::Add(Box::new(a), Box::new(b)),
        }
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Const(a), Expr::Const(b)) => Expr::Const(a - b),
            (a, b) if b.is_zero() => a,
            (a, b) if a.is_zero() => -b,
            (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Const(a), Expr::Const(b)) => Expr::Const(a * b),
            (a, _) if a.is_zero() => Expr::Const(0.0),
            (_, b) if b.is_zero() => Expr::Const(0.0),
            (a, b) if a.as_const() == Some(1.0) => b,
            (a, b) if b.as_const() == Some(1.0) => a,
            (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        match (self, rhs) {
            (Expr::Const(a), Expr::Const(b)) if b != 0.0 => Expr::Const(a / b),
            (a, b) if b.as_const() == Some(1.0) => a,
            (a, b) => Expr::Div(Box::new(a), Box::new(b)),
        }
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(a) => *a,
            e => Expr::Neg(Box::new(e)),
        }
    }
}

/// Conventional names for `n` inputs: `t` for curves, `x, y, z` up to three
/// ambient coordinates, `x1 … xn` beyond.
pub fn ambient_names(m: usize) -> Vec<String> {
    match m {
        0..=3 => ["x", "y", "z"][..m].iter().map(|s| s.to_string()).collect(),
        _ => (1..=m).map(|i| format!("x{i}")).collect(),
    }
}

/// Parameter names for an `n`-plaque: `t`, then `r, s`, then `u1 … un`.
pub fn param_names(n: usize) -> Vec<String> {
    match n {
        1 => vec!["t".into()],
        2 => vec!["r".into(), "s".into()],
        _ => (1..=n).map(|i| format!("u{i}")).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn guards_raise_domain_errors() {
        let xy = names(&["x", "y"]);
        let e = parse("1/x", &xy).unwrap();
        assert!(matches!(e.eval(&[0.0, 1.0]), Err(EvalError::Domain { .. })));
        let e = parse("log(x)", &xy).unwrap();
        assert!(matches!(e.eval(&[0.0, 1.0]), Err(EvalError::Domain { .. })));
        let e = parse("sqrt(x)", &xy).unwrap();
        assert!(matches!(
            e.eval(&[-1e-300, 1.0]),
            Err(EvalError::Domain { .. })
        ));
        assert_eq!(e.eval(&[0.0, 1.0]), Ok(0.0));
        let e = parse("x^-2", &xy).unwrap();
        assert!(e.eval(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn atzero_only_at_exact_origin() {
        let xy = names(&["x", "y"]);
        let f = parse("atzero(x*y^2/(x^2+y^2), 0)", &xy).unwrap();
        assert_eq!(f.eval(&[0.0, 0.0]), Ok(0.0));
        assert_eq!(f.eval(&[1.0, 1.0]), Ok(0.5));
        // Off the origin the guarded quotient is evaluated, so 1/x still fails
        // on the y axis.
        let g = parse("atzero(y/x, 7)", &xy).unwrap();
        assert_eq!(g.eval(&[0.0, 0.0]), Ok(7.0));
        assert!(g.eval(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn substitution_composes() {
        let f = parse("x*y", &names(&["x", "y"])).unwrap();
        let p = vec![
            parse("t", &names(&["t"])).unwrap(),
            parse("t^2", &names(&["t"])).unwrap(),
        ];
        let fp = f.substitute(&p).unwrap();
        assert_eq!(fp.eval(&[3.0]), Ok(27.0));
        assert!(f.substitute(&p[..1]).is_err());
    }

    #[test]
    fn display_round_trips() {
        let xy = names(&["x", "y"]);
        for src in [
            "atzero(x*y^2/(x^2 + y^4), 0)",
            "-(x - y)^3 + sin(x*y)/exp(-x)",
            "x^(-2) - 2.5*relu(x - 1)",
            "sqrt(abs(x*y))",
        ] {
            let e = parse(src, &xy).unwrap();
            let shown = e.display(&xy).to_string();
            let again = parse(&shown, &xy).unwrap();
            assert_eq!(e, again, "{src} -> {shown}");
        }
    }
}
