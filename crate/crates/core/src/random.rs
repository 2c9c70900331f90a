//! Seeded generators for random test objects.
//!
//! Everything here draws from a caller-supplied RNG so that runs are
//! reproducible from a single seed.

use rand::Rng;

use crate::expr::Expr;
use crate::jet::PolyPath;

/// A random expression in `nvars` variables that is real-analytic on all of
/// `R^nvars`: divisions and logarithms only ever see arguments bounded away
/// from zero, and there are no kinks.
pub fn smooth_expr<R: Rng + ?Sized>(rng: &mut R, nvars: usize, depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.2) {
        return leaf(rng, nvars);
    }
    let a = smooth_expr(rng, nvars, depth - 1);
    match rng.gen_range(0..9) {
        0 => a + smooth_expr(rng, nvars, depth - 1),
        1 => a - smooth_expr(rng, nvars, depth - 1),
        2 => a * smooth_expr(rng, nvars, depth - 1),
        3 => a / (Expr::Const(1.0) + smooth_expr(rng, nvars, depth - 1).powi(2)),
        4 => a.sin(),
        5 => a.cos(),
        // exp of a bounded quantity keeps magnitudes moderate
        6 => a.sin().exp(),
        7 => (Expr::Const(1.5) + a.powi(2)).ln(),
        _ => (Expr::Const(1.0) + a.powi(2)).sqrt(),
    }
}

fn leaf<R: Rng + ?Sized>(rng: &mut R, nvars: usize) -> Expr {
    if nvars == 0 || rng.gen_bool(0.25) {
        Expr::Const(round2(rng.gen_range(-2.0..2.0)))
    } else {
        let v = Expr::Var(rng.gen_range(0..nvars));
        if rng.gen_bool(0.5) {
            Expr::Const(round2(rng.gen_range(-2.0..2.0))) * v
        } else {
            v
        }
    }
}

fn round2(x: f64) -> f64 {
    (x * 4.0).round() / 4.0
}

/// A random polynomial path of the given degree with coefficients in
/// `[-1, 1]` (multiples of 1/8, so products stay exact in binary).
pub fn poly_path<R: Rng + ?Sized>(rng: &mut R, dim: usize, degree: usize) -> PolyPath {
    let coeffs = (0..=degree)
        .map(|_| {
            (0..dim)
                .map(|_| (rng.gen_range(-8..=8) as f64) / 8.0)
                .collect()
        })
        .collect();
    PolyPath::new(coeffs)
}

/// A random polynomial in one variable with small dyadic coefficients.
pub fn polynomial<R: Rng + ?Sized>(rng: &mut R, degree: usize) -> Vec<f64> {
    (0..=degree)
        .map(|_| (rng.gen_range(-16..=16) as f64) / 8.0)
        .collect()
}

/// `Σ coeffs[j] · Var(var)^j`.
pub fn poly_expr(coeffs: &[f64], var: usize) -> Expr {
    coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(j, &c)| Expr::Const(c) * Expr::Var(var).powi(j as i32))
        .reduce(|a, b| a + b)
        .unwrap_or(Expr::Const(0.0))
}

/// A unit-ish random direction with entries in `[-1, 1]`, never zero.
pub fn direction<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() > 0.05 {
            return v;
        }
    }
}
