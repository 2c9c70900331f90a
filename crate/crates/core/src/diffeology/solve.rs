//! Numerical searches behind the membership and tangent probes: preimages
//! of a point under a generator, and local polynomial factorizations
//! `p ≈ p₀ ∘ φ`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Generator, Plaque, ReparamLibrary};
use crate::linalg::min_norm_solve;
use crate::Result;

/// A parameter value mapping onto a target point.
#[derive(Debug, Clone, PartialEq)]
pub struct Preimage {
    /// Plaque parameters.
    pub u: Vec<f64>,
    /// Family index, for family generators.
    pub family: Option<f64>,
    pub residual: f64,
}

impl Preimage {
    pub fn plaque(&self, g: &Generator) -> Result<Plaque> {
        g.instance(self.family)
    }
}

const MAX_PREIMAGES: usize = 8;

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Central-difference Jacobian, `None` if any evaluation fails.
pub(crate) fn num_jacobian<F>(f: &F, x: &[f64]) -> Option<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let mut cols = Vec::with_capacity(x.len());
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        let h = 1e-6 * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let a = f(&xp)?;
        xp[j] = x[j] - h;
        let b = f(&xp)?;
        xp[j] = x[j];
        cols.push(
            a.iter()
                .zip(&b)
                .map(|(p, q)| (p - q) / (2.0 * h))
                .collect::<Vec<f64>>(),
        );
    }
    let m = cols.first().map_or(0, |c| c.len());
    Some(
        (0..m)
            .map(|i| cols.iter().map(|c| c[i]).collect())
            .collect(),
    )
}

/// Box-constrained Levenberg–Marquardt on `‖res(x)‖²`. Returns the final
/// point and `‖res‖∞`.
pub(crate) fn levenberg_marquardt<F, P>(
    res: &F,
    project: &P,
    x0: Vec<f64>,
    tol: f64,
    iters: usize,
) -> Option<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
    P: Fn(&mut [f64]),
{
    let mut x = x0;
    project(&mut x);
    let mut r = res(&x)?;
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    for _ in 0..iters {
        if inf_norm(&r) <= tol {
            break;
        }
        let jac = num_jacobian(res, &x)?;
        let j = DMatrix::from_fn(r.len(), x.len(), |a, b| jac[a][b]);
        let jt = j.transpose();
        let jtj = &jt * &j;
        let g = &jt * DVector::from_column_slice(&r);
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for d in 0..x.len() {
                a[(d, d)] += lambda * (jtj[(d, d)] + 1e-12);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 4.0;
                continue;
            };
            let mut xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            project(&mut xn);
            if let Some(rn) = res(&xn) {
                let cn: f64 = rn.iter().map(|v| v * v).sum();
                if cn < cost {
                    x = xn;
                    r = rn;
                    cost = cn;
                    lambda = (lambda / 3.0).max(1e-12);
                    improved = true;
                    break;
                }
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    let e = inf_norm(&r);
    Some((x, e))
}

/// Multistart search for `u` with `g(u) = y` within `eps·max(1, |y|)`.
///
/// Starts are a 3-point grid per solve dimension plus four seeded random
/// ones; distinct solutions are returned in discovery order.
pub fn preimages(g: &Generator, y: &[f64], eps: f64, seed: u64) -> Vec<Preimage> {
    let n = g.param_dim();
    let d = g.solve_dim();
    let mut lo = g.domain.lo.clone();
    let mut hi = g.domain.hi.clone();
    for i in 0..n {
        let w = hi[i] - lo[i];
        lo[i] += 1e-9 * w;
        hi[i] -= 1e-9 * w;
    }
    if let Some(f) = &g.family {
        lo.push(f.lo);
        hi.push(f.hi);
    }
    let tol = eps * inf_norm(y).max(1.0);
    let res = |u: &[f64]| -> Option<Vec<f64>> {
        g.exprs
            .iter()
            .zip(y)
            .map(|(e, yi)| e.eval(u).ok().map(|v| v - yi))
            .collect()
    };
    let project = |u: &mut [f64]| {
        for i in 0..u.len() {
            u[i] = u[i].clamp(lo[i], hi[i]);
        }
    };
    let mut starts = Vec::new();
    let per: usize = if d <= 3 { 3 } else { 2 };
    let total = per.pow(d as u32);
    for idx in 0..total {
        let mut rest = idx;
        let s: Vec<f64> = (0..d)
            .map(|i| {
                let c = rest % per;
                rest /= per;
                lo[i] + (c as f64 + 0.5) / per as f64 * (hi[i] - lo[i])
            })
            .collect();
        starts.push(s);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..4 {
        starts.push((0..d).map(|i| rng.gen_range(lo[i]..=hi[i])).collect());
    }
    let width = (0..d).fold(0.0f64, |m, i| m.max(hi[i] - lo[i]));
    let mut out: Vec<Preimage> = Vec::new();
    for s in starts {
        let Some((u, e)) = levenberg_marquardt(&res, &project, s, 0.01 * tol, 80) else {
            continue;
        };
        if e > tol {
            continue;
        }
        let dup = out.iter().any(|p| {
            let mut full = p.u.clone();
            full.extend(p.family);
            full.iter()
                .zip(&u)
                .all(|(a, b)| (a - b).abs() <= 1e-6 * (1.0 + width))
        });
        if dup {
            continue;
        }
        let family = g.family.as_ref().map(|_| u[n]);
        out.push(Preimage {
            u: u[..n].to_vec(),
            family,
            residual: e,
        });
        if out.len() == MAX_PREIMAGES {
            break;
        }
    }
    out
}

/// A local factorization `p(r + δ) = p₀(φ(δ))` on a stencil around `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    /// Exponent vectors of the monomials of `φ`, graded.
    pub monomials: Vec<Vec<usize>>,
    /// `coeffs[l][a]`: coefficient of monomial `a` in component `l` (raw
    /// units of `δ`).
    pub coeffs: Vec<Vec<f64>>,
    pub residual: f64,
    pub radius: f64,
}

pub(crate) fn monomials(n: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for total in 0..=degree {
        let mut cur = vec![0; n];
        exps(n, total, 0, &mut cur, &mut out);
    }
    out
}

fn exps(n: usize, left: usize, i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if n == 0 {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if i == n - 1 {
        cur[i] = left;
        out.push(cur.clone());
        return;
    }
    for a in (0..=left).rev() {
        cur[i] = a;
        exps(n, left - a, i + 1, cur, out);
    }
    cur[i] = 0;
}

fn mono(alpha: &[usize], z: &[f64]) -> f64 {
    alpha
        .iter()
        .zip(z)
        .map(|(a, x)| x.powi(*a as i32))
        .product()
}

fn stencil(n: usize) -> Vec<Vec<f64>> {
    let levels: &[f64] = if n <= 2 {
        &[-1.0, -0.5, 0.0, 0.5, 1.0]
    } else {
        &[-1.0, 0.0, 1.0]
    };
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                levels.iter().map(move |l| {
                    let mut w = v.clone();
                    w.push(*l);
                    w
                })
            })
            .collect();
    }
    out
}

/// Fits `φ` in the reparametrization library so that `p₀ ∘ φ` matches `p`
/// on a small stencil around `r`, starting from `φ(0) = u0`. Accepts when
/// the residual is below `eps·max(1, |p(r)|)` and `φ` stays inside the
/// domain of `p₀`.
pub fn fit_reparam(
    p: &Plaque,
    r: &[f64],
    p0: &Plaque,
    u0: &[f64],
    lib: &ReparamLibrary,
    eps: f64,
) -> Option<Factorization> {
    let n = p.dim();
    let n0 = p0.dim();
    let min_width = (0..n).fold(f64::INFINITY, |m, i| m.min(p.domain.hi[i] - p.domain.lo[i]));
    let rho = (0.01 * min_width).min(0.5 * p.domain.margin(r));
    if !(rho > 0.0) {
        return None;
    }
    let pts = stencil(n);
    let targets: Vec<Vec<f64>> = pts
        .iter()
        .map(|z| {
            let x: Vec<f64> = r.iter().zip(z).map(|(a, b)| a + rho * b).collect();
            p.eval(&x).ok()
        })
        .collect::<Option<_>>()?;
    let y0 = p.eval(r).ok()?;
    let tol = eps * inf_norm(&y0).max(1.0);
    let monos = monomials(n, lib.degree);
    let nm = monos.len();
    let eval0 = |u: &[f64]| p0.eval(u).ok();

    // Linear part from the Jacobians: Dp₀(u0)·A = Dp(r).
    let j0 = num_jacobian(&eval0, u0)?;
    let jp = num_jacobian(&|x: &[f64]| p.eval(x).ok(), r)?;
    // θ is stored in normalized units: coefficient b_α multiplies (δ/ρ)^α.
    let mut theta = vec![0.0; n0 * nm];
    for l in 0..n0 {
        theta[l * nm] = u0[l];
    }
    for c in 0..n {
        let col: Vec<f64> = jp.iter().map(|row| row[c]).collect();
        let (a, _) = min_norm_solve(&j0, n0, &col, 1e-10);
        let idx = monos
            .iter()
            .position(|al| al.iter().sum::<usize>() == 1 && al[c] == 1)?;
        for l in 0..n0 {
            theta[l * nm + idx] = a[l] * rho;
        }
    }
    let bounds: Vec<f64> = monos
        .iter()
        .map(|al| {
            let deg = al.iter().sum::<usize>();
            if deg == 0 {
                f64::INFINITY
            } else {
                lib.coeff_bound * rho.powi(deg as i32)
            }
        })
        .collect();
    let project = |th: &mut [f64]| {
        for l in 0..n0 {
            for a in 0..nm {
                let b = bounds[a];
                th[l * nm + a] = th[l * nm + a].clamp(-b, b);
            }
        }
    };
    let phi_at = |th: &[f64], z: &[f64]| -> Vec<f64> {
        (0..n0)
            .map(|l| (0..nm).map(|a| th[l * nm + a] * mono(&monos[a], z)).sum())
            .collect()
    };
    let res = |th: &[f64]| -> Option<Vec<f64>> {
        let mut out = Vec::with_capacity(pts.len() * p.ambient());
        for (z, y) in pts.iter().zip(&targets) {
            let u = phi_at(th, z);
            let v = p0.eval(&u).ok()?;
            out.extend(v.iter().zip(y).map(|(a, b)| a - b));
        }
        Some(out)
    };
    let (theta, err) = levenberg_marquardt(&res, &project, theta, 0.01 * tol, 60)?;
    if err > tol {
        return None;
    }
    if !pts.iter().all(|z| p0.domain.contains(&phi_at(&theta, z))) {
        return None;
    }
    let coeffs = (0..n0)
        .map(|l| {
            (0..nm)
                .map(|a| theta[l * nm + a] / rho.powi(monos[a].iter().sum::<usize>() as i32))
                .collect()
        })
        .collect();
    Some(Factorization {
        monomials: monos,
        coeffs,
        residual: err,
        radius: rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smooth::BoxDomain;

    fn axis() -> Generator {
        Generator::plaque(Plaque::parse("x-axis", BoxDomain::cube(1, 3.0), &["t", "0"]).unwrap())
    }

    #[test]
    fn monomial_orders() {
        assert_eq!(monomials(1, 3), vec![vec![0], vec![1], vec![2], vec![3]]);
        let m = monomials(2, 2);
        assert_eq!(
            m,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
    }

    #[test]
    fn preimage_on_axis() {
        let g = axis();
        let pre = preimages(&g, &[1.25, 0.0], 1e-9, 7);
        assert_eq!(pre.len(), 1);
        assert!((pre[0].u[0] - 1.25).abs() < 1e-9);
        assert!(preimages(&g, &[1.0, 0.5], 1e-9, 7).is_empty());
    }

    #[test]
    fn affine_factorization() {
        let p = Plaque::parse("p", BoxDomain::cube(1, 1.0), &["2*t + 1", "0"]).unwrap();
        let p0 = axis().instance(None).unwrap();
        let f = fit_reparam(&p, &[0.2], &p0, &[1.4], &ReparamLibrary::default(), 1e-9).unwrap();
        assert!((f.coeffs[0][1] - 2.0).abs() < 1e-6);
        let kinked =
            Plaque::parse("q", BoxDomain::cube(1, 1.0), &["-relu(-t)", "relu(t)"]).unwrap();
        assert!(fit_reparam(
            &kinked,
            &[0.0],
            &p0,
            &[0.0],
            &ReparamLibrary::default(),
            1e-9
        )
        .is_none());
    }
}
