//! Truncated Taylor arithmetic along polynomial paths.
//!
//! [`taylor_eval`] pushes a polynomial path `s ↦ path(s)` through an
//! expression tree and returns the Taylor coefficients of the composite at
//! `s = 0`. Every intermediate series carries a *validity index*: the
//! coefficients `0..=valid` are exact, later ones are not known. Validity
//! drops when a removable singularity is cancelled (inside `atzero`) or when
//! `abs`/`relu`/`sqrt` meet their kink. If the requested order is not covered
//! the evaluation is retried with more working terms; if it still is not, the
//! composite is not smooth to that order and a [`Error::Kink`] is raised.

use serde::{Deserialize, Serialize};

use crate::expr::{Expr, Unary};
use crate::{Error, Result};

/// Highest order any jet routine accepts.
pub const K_MAX: usize = 6;

/// Taylor coefficients `c_0 … c_k` of a scalar function of one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub coeffs: Vec<f64>,
}

impl Jet {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet has at least the constant term");
        Jet { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `j`-th derivative at the base, `j! · c_j`.
    pub fn derivative(&self, j: usize) -> f64 {
        self.coeffs[j] * factorial(j)
    }

    /// Jet of the identity `u ↦ u` at `c`.
    pub fn identity(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[0] = c;
        if k >= 1 {
            coeffs[1] = 1.0;
        }
        Jet { coeffs }
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Polynomial curve `s ↦ Σ_j coeffs[j] s^j` in `R^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyPath {
    pub coeffs: Vec<Vec<f64>>,
}

impl PolyPath {
    pub fn new(coeffs: Vec<Vec<f64>>) -> Self {
        assert!(!coeffs.is_empty());
        let n = coeffs[0].len();
        assert!(
            coeffs.iter().all(|c| c.len() == n),
            "ragged path coefficients"
        );
        PolyPath { coeffs }
    }

    /// `s ↦ base + s·dir`.
    pub fn line(base: &[f64], dir: &[f64]) -> Self {
        assert_eq!(base.len(), dir.len());
        PolyPath {
            coeffs: vec![base.to_vec(), dir.to_vec()],
        }
    }

    pub fn constant(base: &[f64]) -> Self {
        PolyPath {
            coeffs: vec![base.to_vec()],
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].len()
    }

    pub fn base(&self) -> &[f64] {
        &self.coeffs[0]
    }

    pub fn eval(&self, s: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for c in self.coeffs.iter().rev() {
            for (o, ci) in out.iter_mut().zip(c) {
                *o = *o * s + ci;
            }
        }
        out
    }
}

/// Exact Taylor coefficients of `s ↦ e(path(s))` at `s = 0`, orders `0..=k`.
pub fn taylor_eval(e: &Expr, path: &PolyPath, k: usize) -> Result<Jet> {
    if k > K_MAX {
        return Err(Error::OrderTooHigh {
            requested: k,
            max: K_MAX,
        });
    }
    let arity = e.arity();
    if arity > path.dim() {
        return Err(Error::Arity {
            index: arity - 1,
            available: path.dim(),
        });
    }
    let mut kinked = false;
    for extra in [4, 12, 28] {
        let w = k + extra;
        let ctx = Ctx { path, w };
        let s = ctx.eval(e, false)?;
        if s.valid >= k as isize {
            let coeffs = s.c[..=k].to_vec();
            if coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::domain("non-finite Taylor coefficient"));
            }
            return Ok(Jet { coeffs });
        }
        kinked |= s.kinked;
        if s.kinked {
            break;
        }
    }
    if kinked {
        Err(Error::Kink(format!(
            "composite is not {k} times differentiable at the base"
        )))
    } else {
        Err(Error::domain(format!(
            "could not resolve order {k} within the working truncation"
        )))
    }
}

/// Taylor coefficients of `g ∘ h` from those of `g` (at `h(0)`) and `h`.
pub fn compose_jets(outer: &Jet, inner: &Jet) -> Result<Jet> {
    if outer.order() != inner.order() {
        return Err(Error::OrderMismatch {
            left: outer.order(),
            right: inner.order(),
        });
    }
    let k = outer.order();
    let mut h = inner.coeffs.clone();
    h[0] = 0.0;
    let mut acc = vec![0.0; k + 1];
    acc[0] = outer.coeffs[k];
    for j in (0..k).rev() {
        acc = mul_trunc(&acc, &h);
        acc[0] += outer.coeffs[j];
    }
    Ok(Jet { coeffs: acc })
}

fn mul_trunc(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|m| (0..=m).map(|i| a[i] * b[m - i]).sum())
        .collect()
}

#[derive(Debug, Clone)]
struct Series {
    c: Vec<f64>,
    valid: isize,
    kinked: bool,
}

impl Series {
    fn constant(v: f64, w: usize) -> Self {
        let mut c = vec![0.0; w + 1];
        c[0] = v;
        Series {
            c,
            valid: w as isize,
            kinked: false,
        }
    }

    fn zero(w: usize, valid: isize, kinked: bool) -> Self {
        Series {
            c: vec![0.0; w + 1],
            valid,
            kinked,
        }
    }

    fn w(&self) -> usize {
        self.c.len() - 1
    }

    /// Index of the first coefficient that is nonzero relative to the scale
    /// of the known part, or `valid + 1` if the known part vanishes.
    fn lead(&self, rel: f64) -> isize {
        let known = (self.valid.max(-1) + 1) as usize;
        let scale = self.c[..known].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tol = rel * scale;
        self.c[..known]
            .iter()
            .position(|x| x.abs() > tol)
            .map_or(self.valid + 1, |i| i as isize)
    }

    fn exact_lead(&self) -> isize {
        self.lead(0.0)
    }

    fn shifted_down(&self, by: usize) -> Series {
        let w = self.w();
        let mut c = vec![0.0; w + 1];
        c[..=w - by].copy_from_slice(&self.c[by..]);
        Series {
            c,
            valid: self.valid - by as isize,
            kinked: self.kinked,
        }
    }

    fn scale(mut self, k: f64) -> Series {
        for x in &mut self.c {
            *x *= k;
        }
        self
    }
}

/// Relative size below which a coefficient counts as cancelled when a
/// removable singularity is divided out.
const CANCEL_REL: f64 = 1e-12;

struct Ctx<'a> {
    path: &'a PolyPath,
    w: usize,
}

impl Ctx<'_> {
    fn eval(&self, e: &Expr, removable: bool) -> Result<Series> {
        let w = self.w;
        Ok(match e {
            Expr::Const(v) => Series::constant(*v, w),
            Expr::Var(i) => {
                let mut c = vec![0.0; w + 1];
                for (j, pc) in self.path.coeffs.iter().enumerate().take(w + 1) {
                    c[j] = pc[*i];
                }
                Series {
                    c,
                    valid: w as isize,
                    kinked: false,
                }
            }
            Expr::Neg(a) => self.eval(a, removable)?.scale(-1.0),
            Expr::Add(a, b) => add(&self.eval(a, removable)?, &self.eval(b, removable)?, 1.0),
            Expr::Sub(a, b) => add(&self.eval(a, removable)?, &self.eval(b, removable)?, -1.0),
            Expr::Mul(a, b) => mul(&self.eval(a, removable)?, &self.eval(b, removable)?),
            Expr::Div(a, b) => div(
                &self.eval(a, removable)?,
                &self.eval(b, removable)?,
                removable,
            )?,
            Expr::Pow(a, n) => {
                let base = self.eval(a, removable)?;
                let p = powu(&base, n.unsigned_abs());
                if *n < 0 {
                    div(&Series::constant(1.0, w), &p, removable)?
                } else {
                    p
                }
            }
            Expr::Apply(op, a) => unary(*op, &self.eval(a, removable)?)?,
            Expr::AtZero {
                inner,
                value,
                guards,
            } => {
                let gs = guards
                    .iter()
                    .map(|g| self.eval(g, removable))
                    .collect::<Result<Vec<_>>>()?;
                if gs.iter().any(|g| g.c[0] != 0.0) {
                    // The path starts away from the override point and stays
                    // away for small s.
                    return self.eval(inner, removable);
                }
                let stuck = gs.iter().all(|g| g.exact_lead() > g.w() as isize);
                if stuck {
                    // Identically at the origin along the whole path.
                    let mut s = Series::constant(*value, w);
                    s.valid = gs.iter().map(|g| g.valid).min().unwrap_or(w as isize);
                    return Ok(s);
                }
                let mut s = self.eval(inner, true)?;
                if s.valid < 0 {
                    return Ok(s);
                }
                let limit = s.c[0];
                if (limit - value).abs() > 1e-12 * (1.0 + value.abs()) {
                    return Err(Error::Discontinuity(format!(
                        "limit {limit} along the path differs from the override value {value}"
                    )));
                }
                s.c[0] = *value;
                s
            }
        })
    }
}

fn add(a: &Series, b: &Series, sign: f64) -> Series {
    Series {
        c: a.c.iter().zip(&b.c).map(|(x, y)| x + sign * y).collect(),
        valid: a.valid.min(b.valid),
        kinked: a.kinked || b.kinked,
    }
}

fn mul(a: &Series, b: &Series) -> Series {
    let w = a.w();
    let la = a.exact_lead();
    let lb = b.exact_lead();
    Series {
        c: mul_trunc(&a.c, &b.c),
        valid: (a.valid + lb).min(b.valid + la).min(w as isize),
        kinked: a.kinked || b.kinked,
    }
}

fn powu(a: &Series, n: u32) -> Series {
    let mut result = Series::constant(1.0, a.w());
    let mut base = a.clone();
    let mut n = n;
    while n > 0 {
        if n & 1 == 1 {
            result = mul(&result, &base);
        }
        n >>= 1;
        if n > 0 {
            base = mul(&base, &base);
        }
    }
    result
}

fn div(a: &Series, b: &Series, removable: bool) -> Result<Series> {
    let kinked = a.kinked || b.kinked;
    if b.valid < 0 {
        return Ok(Series::zero(a.w(), -1, kinked));
    }
    if !removable {
        if b.c[0] == 0.0 {
            return Err(Error::domain("division by zero at the base point"));
        }
        return Ok(div_regular(a, b));
    }
    let lb = b.lead(CANCEL_REL);
    if lb == 0 {
        return Ok(div_regular(a, b));
    }
    if lb > b.valid {
        // The denominator vanishes to every known order; more terms needed.
        return Ok(Series::zero(a.w(), -1, kinked));
    }
    let la = a.lead(CANCEL_REL);
    if la < lb {
        return Err(Error::Discontinuity(format!(
            "pole of order {} at the override point",
            lb - la
        )));
    }
    let sh = lb as usize;
    Ok(div_regular(&a.shifted_down(sh), &b.shifted_down(sh)))
}

fn div_regular(a: &Series, b: &Series) -> Series {
    let w = a.w();
    let mut q = vec![0.0; w + 1];
    for n in 0..=w {
        let mut acc = a.c[n];
        for j in 1..=n {
            acc -= b.c[j] * q[n - j];
        }
        q[n] = acc / b.c[0];
    }
    let la = a.exact_lead();
    Series {
        c: q,
        valid: a.valid.min(b.valid + la).min(w as isize),
        kinked: a.kinked || b.kinked,
    }
}

fn unary(op: Unary, a: &Series) -> Result<Series> {
    let w = a.w();
    let a0 = a.c[0];
    if a.valid < 0 {
        return Ok(Series::zero(w, -1, a.kinked));
    }
    let same_valid = |c: Vec<f64>| Series {
        c,
        valid: a.valid,
        kinked: a.kinked,
    };
    Ok(match op {
        Unary::Exp => {
            let mut e = vec![0.0; w + 1];
            e[0] = a0.exp();
            for n in 1..=w {
                let s: f64 = (1..=n).map(|j| j as f64 * a.c[j] * e[n - j]).sum();
                e[n] = s / n as f64;
            }
            same_valid(e)
        }
        Unary::Sin | Unary::Cos => {
            let mut s = vec![0.0; w + 1];
            let mut c = vec![0.0; w + 1];
            s[0] = a0.sin();
            c[0] = a0.cos();
            for n in 1..=w {
                let (mut ss, mut cc) = (0.0, 0.0);
                for j in 1..=n {
                    ss += j as f64 * a.c[j] * c[n - j];
                    cc += j as f64 * a.c[j] * s[n - j];
                }
                s[n] = ss / n as f64;
                c[n] = -cc / n as f64;
            }
            same_valid(if op == Unary::Sin { s } else { c })
        }
        Unary::Log => {
            if a0 <= 0.0 {
                return Err(Error::domain(format!("log of {a0} at the base point")));
            }
            let mut l = vec![0.0; w + 1];
            l[0] = a0.ln();
            for n in 1..=w {
                let s: f64 = (1..n).map(|j| j as f64 * l[j] * a.c[n - j]).sum();
                l[n] = (a.c[n] - s / n as f64) / a0;
            }
            same_valid(l)
        }
        Unary::Sqrt => sqrt(a)?,
        Unary::Abs | Unary::Relu => {
            let relu = op == Unary::Relu;
            if a0 != 0.0 {
                return Ok(if a0 > 0.0 {
                    a.clone()
                } else if relu {
                    Series::zero(w, w as isize, a.kinked)
                } else {
                    a.clone().scale(-1.0)
                });
            }
            let j = a.exact_lead();
            if j > a.valid {
                Series::zero(w, a.valid, a.kinked)
            } else if j % 2 == 0 {
                let pos = a.c[j as usize] > 0.0;
                match (pos, relu) {
                    (true, _) => a.clone(),
                    (false, false) => a.clone().scale(-1.0),
                    (false, true) => Series::zero(w, w as isize, a.kinked),
                }
            } else {
                Series::zero(w, j - 1, true)
            }
        }
        Unary::Sign | Unary::Step => {
            if a0 == 0.0 {
                return Err(Error::Kink(format!("{} at its jump", op.name())));
            }
            let v = match op {
                Unary::Sign => a0.signum(),
                _ => 1.0,
            };
            let v = if op == Unary::Step && a0 < 0.0 {
                0.0
            } else {
                v
            };
            Series::constant(v, w)
        }
    })
}

fn sqrt(a: &Series) -> Result<Series> {
    let w = a.w();
    let a0 = a.c[0];
    if a0 < 0.0 {
        return Err(Error::domain(format!("sqrt of {a0} at the base point")));
    }
    if a0 > 0.0 {
        return Ok(sqrt_regular(a));
    }
    let j = a.exact_lead();
    if j > a.valid {
        // a = O(s^(v+1)) so sqrt(a) = O(s^((v+1)/2)).
        let valid = if a.valid >= w as isize {
            w as isize
        } else {
            (a.valid + 2) / 2 - 1
        };
        return Ok(Series::zero(w, valid, a.kinked));
    }
    let ju = j as usize;
    if ju % 2 == 1 || a.c[ju] < 0.0 {
        return Err(Error::domain(
            "sqrt of a quantity negative on one side of the base",
        ));
    }
    let half = ju / 2;
    if half % 2 == 1 {
        // |s|^half · sqrt(b): a kink of order `half`.
        return Ok(Series::zero(w, half as isize - 1, true));
    }
    let b = a.shifted_down(ju);
    let r = sqrt_regular(&b);
    let mut c = vec![0.0; w + 1];
    c[half..].copy_from_slice(&r.c[..=w - half]);
    Ok(Series {
        c,
        valid: (r.valid + half as isize).min(w as isize),
        kinked: r.kinked,
    })
}

fn sqrt_regular(a: &Series) -> Series {
    let w = a.w();
    let mut r = vec![0.0; w + 1];
    r[0] = a.c[0].sqrt();
    for n in 1..=w {
        let s: f64 = (1..n).map(|j| r[j] * r[n - j]).sum();
        r[n] = (a.c[n] - s) / (2.0 * r[0]);
    }
    Series {
        c: r,
        valid: a.valid,
        kinked: a.kinked,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn e(src: &str, vars: &[&str]) -> Expr {
        let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        parse(src, &names).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn polynomial_identity() {
        let j = taylor_eval(&e("x^2", &["x"]), &PolyPath::line(&[3.0], &[1.0]), 2).unwrap();
        assert_eq!(j.coeffs, vec![9.0, 6.0, 1.0]);
    }

    #[test]
    fn sin_of_square() {
        let path = PolyPath::new(vec![vec![0.0], vec![0.0], vec![1.0]]);
        let j = taylor_eval(&e("sin(x)", &["x"]), &path, 4).unwrap();
        assert!(close(&j.coeffs, &[0.0, 0.0, 1.0, 0.0, 0.0], 1e-15));
        let j = taylor_eval(&e("sin(x)", &["x"]), &path, 6).unwrap();
        assert!((j.coeffs[6] + 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn removable_quotient_along_diagonal() {
        let f = e("atzero(x*y^2/(x^2+y^2), 0)", &["x", "y"]);
        let j = taylor_eval(&f, &PolyPath::line(&[0.0, 0.0], &[1.0, 1.0]), 1).unwrap();
        assert!(close(&j.coeffs, &[0.0, 0.5], 1e-15));
        // Along a line the function is exactly linear.
        let j = taylor_eval(&f, &PolyPath::line(&[0.0, 0.0], &[2.0, -1.0]), 4).unwrap();
        assert!(close(&j.coeffs, &[0.0, 0.4, 0.0, 0.0, 0.0], 1e-15));
    }

    #[test]
    fn discontinuity_along_parabola() {
        let f = e("atzero(x*y^2/(x^2+y^4), 0)", &["x", "y"]);
        let parabola = PolyPath::new(vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(matches!(
            taylor_eval(&f, &parabola, 0),
            Err(Error::Discontinuity(_))
        ));
        let diag = PolyPath::line(&[0.0, 0.0], &[1.0, 1.0]);
        let j = taylor_eval(&f, &diag, 3).unwrap();
        // s/(1+s^2) = s - s^3 + ...
        assert!(close(&j.coeffs, &[0.0, 1.0, 0.0, -1.0], 1e-14));
    }

    #[test]
    fn sinc_is_removable() {
        let f = e("atzero(sin(x)/x, 1)", &["x"]);
        let j = taylor_eval(&f, &PolyPath::line(&[0.0], &[1.0]), 4).unwrap();
        assert!(close(
            &j.coeffs,
            &[1.0, 0.0, -1.0 / 6.0, 0.0, 1.0 / 120.0],
            1e-15
        ));
        let bad = e("atzero(sin(x)/x, 0)", &["x"]);
        assert!(taylor_eval(&bad, &PolyPath::line(&[0.0], &[1.0]), 1).is_err());
    }

    #[test]
    fn kinks() {
        let line = PolyPath::line(&[0.0], &[1.0]);
        assert!(matches!(
            taylor_eval(&e("abs(x)", &["x"]), &line, 1),
            Err(Error::Kink(_))
        ));
        assert_eq!(
            taylor_eval(&e("abs(x)", &["x"]), &line, 0).unwrap().coeffs,
            vec![0.0]
        );
        let j = taylor_eval(&e("x*abs(x)", &["x"]), &line, 1).unwrap();
        assert_eq!(j.coeffs, vec![0.0, 0.0]);
        assert!(matches!(
            taylor_eval(&e("x*abs(x)", &["x"]), &line, 2),
            Err(Error::Kink(_))
        ));
        // |s^2| is smooth; relu(-s^2) vanishes identically.
        let sq = PolyPath::new(vec![vec![0.0], vec![0.0], vec![1.0]]);
        assert_eq!(
            taylor_eval(&e("abs(-x)", &["x"]), &sq, 3).unwrap().coeffs,
            vec![0.0, 0.0, 1.0, 0.0]
        );
        let j = taylor_eval(&e("relu(-x)", &["x"]), &sq, 3).unwrap();
        assert_eq!(j.coeffs, vec![0.0; 4]);
        // Away from the kink abs is smooth.
        let j = taylor_eval(&e("abs(x)", &["x"]), &PolyPath::line(&[-2.0], &[1.0]), 2).unwrap();
        assert_eq!(j.coeffs, vec![2.0, -1.0, 0.0]);
    }

    #[test]
    fn sqrt_cases() {
        let line = PolyPath::line(&[0.0, 0.0], &[1.0, 1.0]);
        let f = e("sqrt(x^2+y^2)", &["x", "y"]);
        assert!(matches!(taylor_eval(&f, &line, 1), Err(Error::Kink(_))));
        let f = e("sqrt(x^4)", &["x", "y"]);
        let j = taylor_eval(&f, &line, 3).unwrap();
        assert_eq!(j.coeffs, vec![0.0, 0.0, 1.0, 0.0]);
        let f = e("sqrt(x)", &["x", "y"]);
        assert!(matches!(taylor_eval(&f, &line, 1), Err(Error::Domain(_))));
        // On the axes sqrt(|xy|) is identically zero.
        let f = e("sqrt(abs(x*y))", &["x", "y"]);
        let j = taylor_eval(&f, &PolyPath::line(&[0.0, 0.0], &[1.0, 0.0]), 3).unwrap();
        assert_eq!(j.coeffs, vec![0.0; 4]);
    }

    #[test]
    fn guards() {
        let line = PolyPath::line(&[0.0], &[1.0]);
        assert!(matches!(
            taylor_eval(&e("1/x", &["x"]), &line, 0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            taylor_eval(&e("log(x)", &["x"]), &line, 0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            taylor_eval(&e("x", &["x"]), &line, 7),
            Err(Error::OrderTooHigh { .. })
        ));
    }

    #[test]
    fn composition() {
        // outer = u^2 at 0, inner = t + t^2
        let outer = Jet::new(vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        let inner = Jet::new(vec![0.0, 1.0, 1.0, 0.0, 0.0]);
        let c = compose_jets(&outer, &inner).unwrap();
        assert_eq!(c.coeffs, vec![0.0, 0.0, 1.0, 2.0, 1.0]);
        let id = Jet::identity(0.0, 4);
        assert_eq!(compose_jets(&id, &inner).unwrap(), inner);
        assert!(compose_jets(&Jet::new(vec![1.0, 2.0]), &inner).is_err());
    }
}
