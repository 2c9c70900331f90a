//! Symbolic directional derivatives.
//!
//! `e.directional(v)` is the expression `Σ v_i ∂e/∂x_i`. The rules are the
//! textbook ones; the only special case is `atzero`, whose value at the
//! origin of its guards is replaced by the one-sided limit of the difference
//! quotient along `v`, computed with exact jets.

use super::{Expr, Unary};
use crate::jet::{taylor_eval, PolyPath};
use crate::{Error, Result};

impl Expr {
    pub fn directional(&self, dir: &[f64]) -> Result<Expr> {
        Ok(match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(i) => Expr::Const(*dir.get(*i).ok_or(Error::Arity {
                index: *i,
                available: dir.len(),
            })?),
            Expr::Neg(a) => -a.directional(dir)?,
            Expr::Add(a, b) => a.directional(dir)? + b.directional(dir)?,
            Expr::Sub(a, b) => a.directional(dir)? - b.directional(dir)?,
            Expr::Mul(a, b) => {
                a.directional(dir)? * (**b).clone() + (**a).clone() * b.directional(dir)?
            }
            Expr::Div(a, b) => {
                let da = a.directional(dir)?;
                let db = b.directional(dir)?;
                da / (**b).clone() - (**a).clone() * db / (**b).clone().powi(2)
            }
            Expr::Pow(a, n) => {
                Expr::Const(*n as f64) * (**a).clone().powi(n - 1) * a.directional(dir)?
            }
            Expr::Apply(op, a) => {
                let u = (**a).clone();
                let du = a.directional(dir)?;
                let outer = match op {
                    Unary::Sin => u.cos(),
                    Unary::Cos => -u.sin(),
                    Unary::Exp => u.exp(),
                    Unary::Log => Expr::Const(1.0) / u,
                    Unary::Sqrt => Expr::Const(0.5) / u.sqrt(),
                    Unary::Abs => Expr::Apply(Unary::Sign, Box::new(u)),
                    Unary::Relu => Expr::Apply(Unary::Step, Box::new(u)),
                    // Zero away from the jump, but kept unfolded so that
                    // evaluating at the jump still reports the kink.
                    Unary::Sign | Unary::Step => {
                        return Ok(Expr::Mul(
                            Box::new(Expr::Const(0.0)),
                            Box::new(Expr::Apply(*op, Box::new(u))),
                        ))
                    }
                };
                outer * du
            }
            Expr::AtZero {
                inner,
                value,
                guards,
            } => {
                let gvars: Vec<usize> = guards
                    .iter()
                    .map(|g| match g {
                        Expr::Var(i) => Ok(*i),
                        _ => Err(Error::invalid(
                            "symbolic derivative of atzero needs variable guards",
                        )),
                    })
                    .collect::<Result<_>>()?;
                if !inner.free_vars().iter().all(|v| gvars.contains(v)) {
                    return Err(Error::invalid(
                        "atzero body depends on variables outside its guards",
                    ));
                }
                let n = dir.len().max(self.arity());
                let mut v = vec![0.0; n];
                for &i in &gvars {
                    v[i] = *dir.get(i).ok_or(Error::Arity {
                        index: i,
                        available: dir.len(),
                    })?;
                }
                let origin_slope = if v.iter().all(|c| *c == 0.0) {
                    0.0
                } else {
                    let line = PolyPath::line(&vec![0.0; n], &v);
                    let base = Expr::AtZero {
                        inner: inner.clone(),
                        value: *value,
                        guards: guards.clone(),
                    };
                    taylor_eval(&base, &line, 1)
                        .map_err(|e| {
                            Error::NotDifferentiable(format!("at the atzero origin: {e}"))
                        })?
                        .coeffs[1]
                };
                Expr::AtZero {
                    inner: Box::new(inner.directional(dir)?),
                    value: origin_slope,
                    guards: guards.clone(),
                }
            }
        })
    }

    /// `∂e/∂x_i` over `n` inputs.
    pub fn partial(&self, i: usize, n: usize) -> Result<Expr> {
        let mut dir = vec![0.0; n.max(i + 1)];
        dir[i] = 1.0;
        self.directional(&dir)
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;

    fn n(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn rules_match_hand_derivatives() {
        let xy = n(&["x", "y"]);
        let cases = [
            ("x^3*y", [1.0, 0.0], "3*x^2*y"),
            ("sin(x*y)", [0.0, 1.0], "cos(x*y)*x"),
            ("exp(x)/y", [1.0, 1.0], "exp(x)/y - exp(x)/y^2"),
            ("log(x) + sqrt(y)", [1.0, 2.0], "1/x + 1/sqrt(y)"),
        ];
        for (src, dir, want) in cases {
            let d = parse(src, &xy).unwrap().directional(&dir).unwrap();
            let w = parse(want, &xy).unwrap();
            for p in [[0.7, 1.3], [1.9, 0.4]] {
                let (a, b) = (d.eval(&p).unwrap(), w.eval(&p).unwrap());
                assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "{src}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn abs_derivative_keeps_its_kink() {
        let x = n(&["x"]);
        let d = parse("abs(x)", &x).unwrap().directional(&[1.0]).unwrap();
        assert_eq!(d.eval(&[-2.0]), Ok(-1.0));
        assert!(d.eval(&[0.0]).is_err());
        let dd = d.directional(&[1.0]).unwrap();
        assert_eq!(dd.eval(&[1.0]), Ok(0.0));
        assert!(dd.eval(&[0.0]).is_err());
    }

    #[test]
    fn atzero_origin_slope() {
        let xy = n(&["x", "y"]);
        let f = parse("atzero(x*y^2/(x^2+y^2), 0)", &xy).unwrap();
        let d = f.directional(&[1.0, 1.0]).unwrap();
        assert!((d.eval(&[0.0, 0.0]).unwrap() - 0.5).abs() < 1e-14);
        let d = f.directional(&[1.0, 0.0]).unwrap();
        assert_eq!(d.eval(&[0.0, 0.0]).unwrap(), 0.0);
    }
}
