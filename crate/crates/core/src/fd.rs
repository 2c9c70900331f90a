//! Finite-difference Taylor coefficients, independent of the jet engine.
//!
//! Order `j` uses a fourth-order accurate central stencil (the plain
//! `(j+1)`-point difference corrected by `j H²/24` times the `(j+2)`-point
//! one), followed by two Richardson steps over `H, H/2, H/4` that remove the
//! `H⁴` and `H⁶` terms. The difference between the last two extrapolants is
//! the reported error.
//!
//! Two sentinel orders above `k` are inspected as well: if the `(k+1)`-th
//! difference grows like `1/H` (or the `(k+2)`-th like `1/H²`) as the step
//! shrinks, the `k`-th derivative jumps at the base and coefficient `k` is
//! flagged unreliable even when its own central difference looks
//! consistent (a symmetric stencil cannot see the kink of `|s|`).

use serde::{Deserialize, Serialize};

use crate::expr::Expr;
use crate::jet::{factorial, PolyPath, K_MAX};
use crate::{Error, Result};

/// Agreement required between successive extrapolants.
pub const RICHARDSON_REL: f64 = 1e-6;
pub const RICHARDSON_ABS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdJet {
    pub coeffs: Vec<f64>,
    /// Per-coefficient error estimate (difference of the last two
    /// extrapolants, or the jump size when a sentinel diverges).
    pub errors: Vec<f64>,
    pub reliable: Vec<bool>,
    /// Set when a sentinel order blows up: the size of the jump in the
    /// `k`-th derivative.
    pub jump: Option<f64>,
}

impl FdJet {
    pub fn is_consistent(&self) -> bool {
        self.reliable.iter().all(|r| *r)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Base step `1e-3 · (1 + max|base|)`.
pub fn default_step(base: &[f64]) -> f64 {
    1e-3 * (1.0 + base.iter().fold(0.0f64, |m, x| m.max(x.abs())))
}

/// Step used for order `j`: larger steps for higher orders keep the
/// `eps / H^j` rounding error in check. The multipliers were tuned against
/// exact jets of random analytic expressions.
pub fn order_step(h: f64, j: usize) -> f64 {
    const MULT: [f64; 9] = [1.0, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0];
    h * MULT[j.min(MULT.len() - 1)]
}

pub fn fd_jet(e: &Expr, path: &PolyPath, k: usize, h: f64) -> Result<FdJet> {
    let arity = e.arity();
    if arity > path.dim() {
        return Err(Error::Arity {
            index: arity - 1,
            available: path.dim(),
        });
    }
    fd_jet_fn(|s| Ok(e.eval(&path.eval(s))?), k, h)
}

/// Fallback confirmation of a first derivative for functions that are only
/// `C¹`, where Richardson extrapolation has nothing to accelerate: central
/// quotients at `h, h/10, h/100, h/1000` must close in on `slope`, each gap
/// shrinking at least fivefold unless already at the rounding floor, the
/// last one within `1e-4` relative.
pub fn slope_converges<G>(g: &G, slope: f64, h: f64) -> Result<bool>
where
    G: Fn(f64) -> Result<f64>,
{
    let scale = slope.abs().max(1.0);
    let mut prev = f64::INFINITY;
    for i in 0..4 {
        let s = h * 10f64.powi(-i);
        let (d, floor) = central(g, 1, s)?;
        let gap = (d - slope).abs();
        let settled = gap <= 10.0 * floor + f64::EPSILON * scale;
        if !settled && gap > prev / 5.0 {
            return Ok(false);
        }
        prev = gap.max(10.0 * floor);
    }
    Ok(prev <= 1e-4 * scale)
}

/// [`fd_jet`] for any scalar function of one parameter.
pub fn fd_jet_fn<G>(g: G, k: usize, h: f64) -> Result<FdJet>
where
    G: Fn(f64) -> Result<f64>,
{
    if k > K_MAX {
        return Err(Error::OrderTooHigh {
            requested: k,
            max: K_MAX,
        });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!("step must be positive, got {h}")));
    }
    let g0 = g(0.0)?;
    let mut coeffs = vec![g0];
    let mut errors = vec![0.0];
    let mut reliable = vec![true];
    for j in 1..=k {
        let f = factorial(j);
        let ok = |c: f64, err: f64| err <= (RICHARDSON_REL * c.abs()).max(RICHARDSON_ABS);
        let hj = order_step(h, j);
        let (mut c, mut err) = ladder(&g, j, hj)?;
        if !ok(c, err) {
            // Rescue attempt for rapidly varying composites: neighbouring
            // ladders, keeping the one whose extrapolants agree best.
            for scale in [0.5, 2.0] {
                if let Ok((c2, e2)) = ladder(&g, j, hj * scale) {
                    if e2 < err {
                        (c, err) = (c2, e2);
                    }
                }
            }
        }
        coeffs.push(c / f);
        errors.push(err / f);
        reliable.push(ok(c, err));
    }
    let mut jump = None;
    for (extra, growth) in [(1usize, 1.6), (2, 3.2)] {
        let j = k + extra;
        let hj = order_step(h, j);
        let steps = [hj, hj / 2.0, hj / 4.0];
        let mut vals = [0.0; 3];
        let mut floor = 0.0f64;
        for (v, &s) in vals.iter_mut().zip(&steps) {
            let (d, noise) = central(&g, j, s)?;
            *v = d;
            floor = floor.max(noise);
        }
        let [a, b, c] = vals.map(f64::abs);
        if c > 100.0 * floor && b >= growth * a && c >= growth * b {
            let hmin = steps[2];
            let size = c * hmin.powi(extra as i32) / factorial(k);
            jump = Some(jump.map_or(size, |m: f64| m.max(size)));
        }
    }
    if let Some(size) = jump {
        errors[k] = errors[k].max(size);
        reliable[k] = false;
    }
    Ok(FdJet {
        coeffs,
        errors,
        reliable,
        jump,
    })
}

/// Extrapolated `j`-th derivative over `H, H/2, H/4` and its error estimate.
fn ladder<G>(g: &G, j: usize, hj: f64) -> Result<(f64, f64)>
where
    G: Fn(f64) -> Result<f64>,
{
    let d: Vec<f64> = [hj, hj / 2.0, hj / 4.0]
        .iter()
        .map(|&s| central4(g, j, s))
        .collect::<Result<_>>()?;
    let r1a = (16.0 * d[1] - d[0]) / 15.0;
    let r1b = (16.0 * d[2] - d[1]) / 15.0;
    let r2 = (64.0 * r1b - r1a) / 63.0;
    Ok((r2, (r2 - r1b).abs()))
}

fn central4<G>(g: &G, j: usize, s: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    let (d, _) = central(g, j, s)?;
    let (d2, _) = central(g, j + 2, s)?;
    Ok(d - (j as f64 / 24.0) * s * s * d2)
}

/// Central `j`-th difference at step `s` and its rounding floor.
fn central<G>(g: &G, j: usize, s: f64) -> Result<(f64, f64)>
where
    G: Fn(f64) -> Result<f64>,
{
    let mut acc = 0.0;
    let mut mag = 0.0;
    let mut binom = 1.0;
    for i in 0..=j {
        let x = (j as f64 / 2.0 - i as f64) * s;
        let v = g(x)?;
        let term = if i % 2 == 0 { binom } else { -binom } * v;
        acc += term;
        mag += term.abs();
        binom = binom * (j - i) as f64 / (i + 1) as f64;
    }
    let sj = s.powi(j as i32);
    Ok((acc / sj, 4.0 * f64::EPSILON * mag / sj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn e(src: &str) -> Expr {
        parse(src, &["x".to_string()]).unwrap()
    }

    #[test]
    fn exp_series() {
        let path = PolyPath::line(&[0.0], &[1.0]);
        let j = fd_jet(&e("exp(x)"), &path, 3, 1e-3).unwrap();
        for (c, want) in j.coeffs.iter().zip([1.0, 1.0, 0.5, 1.0 / 6.0]) {
            assert!((c - want).abs() <= 1e-6 * want, "{c} vs {want}");
        }
        assert!(j.is_consistent());
    }

    #[test]
    fn cubic_is_exact() {
        let path = PolyPath::line(&[0.7], &[1.0]);
        for h in [1e-3, 0.1, 0.5] {
            let j = fd_jet(&e("x^3"), &path, 2, h).unwrap();
            let want = [0.343, 3.0 * 0.49, 3.0 * 0.7];
            for (c, w) in j.coeffs.iter().zip(want) {
                assert!((c - w).abs() < 1e-9, "h={h}: {c} vs {w}");
            }
        }
    }

    #[test]
    fn abs_is_flagged() {
        let path = PolyPath::line(&[0.0], &[1.0]);
        let j = fd_jet(&e("abs(x)"), &path, 1, 1e-3).unwrap();
        assert!(!j.reliable[1]);
        assert!((j.jump.unwrap() - 2.0).abs() < 1e-9);
        // Away from the kink everything is fine.
        let j = fd_jet(&e("abs(x)"), &PolyPath::line(&[0.5], &[1.0]), 1, 1e-3).unwrap();
        assert!(j.is_consistent());
    }

    #[test]
    fn smooth_higher_orders_are_quiet() {
        let path = PolyPath::line(&[0.3], &[1.0]);
        for src in ["sin(x)", "exp(x)*cos(2*x)", "1/(1+x^2)", "log(2+x)"] {
            let j = fd_jet(&e(src), &path, 4, default_step(&[0.3])).unwrap();
            assert!(j.jump.is_none(), "{src}: {j:?}");
        }
    }

    #[test]
    fn rejects_bad_step() {
        let path = PolyPath::line(&[0.0], &[1.0]);
        assert!(fd_jet(&e("x"), &path, 1, 0.0).is_err());
        assert!(fd_jet(&e("x"), &path, 1, -1.0).is_err());
    }
}
