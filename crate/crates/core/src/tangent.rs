//! Canonical tangent structures.
//!
//! Two plaques through `F` are `n`-equivalent over a function family when
//! all derivatives `D^α(f ∘ p)(0)`, `1 ≤ |α| ≤ n`, agree. The array of those
//! derivatives is a [`JetVector`]; classes are added by searching a plaque
//! whose jet vector is the sum, and a tangent set is declared a cone only
//! when that search returns an explicit [`AddOutcome::NoWitness`].

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::ProbeConfig;
use crate::convenient::DualPair;
use crate::diffeology::solve::monomials;
use crate::diffeology::{preimages, FunctionFamily, GeneratedDiffeology, Plaque};
use crate::expr::Expr;
use crate::fd::{default_step, fd_jet};
use crate::jet::{factorial, taylor_eval, PolyPath, K_MAX};
use crate::linalg::{gauss_kernel, min_norm_solve, spectrum};
use crate::random::direction;
use crate::smooth::BoxDomain;
use crate::verdict::{Diagnostic, Verdict, Witness};
use crate::{Error, Result};

/// `D^α(f_i ∘ p)(0)` for `1 ≤ |α| ≤ n`, functions major, multi-indices in
/// graded order (descending lexicographic within a degree).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetVector {
    pub point: Vec<f64>,
    pub order: usize,
    /// Dimension of the plaque domain.
    pub dim: usize,
    pub labels: Vec<String>,
    pub entries: Vec<f64>,
}

/// Multi-indices of a JetVector block, in canonical order.
pub fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    monomials(dim, order)
        .into_iter()
        .filter(|a| a.iter().sum::<usize>() > 0)
        .collect()
}

impl JetVector {
    fn block(&self) -> usize {
        multi_indices(self.dim, self.order).len()
    }

    /// Entries with `|α| = 1`, functions major.
    pub fn first_order(&self) -> Vec<f64> {
        let b = self.block();
        (0..self.labels.len())
            .flat_map(|i| self.entries[i * b..i * b + self.dim].to_vec())
            .collect()
    }

    pub fn is_zero(&self, cfg: &ProbeConfig) -> bool {
        self.entries.iter().all(|e| cfg.jets_close(*e, 0.0))
    }

    pub fn close(&self, other: &JetVector, cfg: &ProbeConfig) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| cfg.jets_close(*a, *b))
    }

    fn compatible(&self, other: &JetVector, eps_pt: f64) -> Result<()> {
        if self.order != other.order || self.dim != other.dim || self.labels != other.labels {
            return Err(Error::invalid(
                "jet vectors over different families, orders or dimensions",
            ));
        }
        let same = self
            .point
            .iter()
            .zip(&other.point)
            .all(|(a, b)| (a - b).abs() <= eps_pt * a.abs().max(1.0));
        if !same {
            return Err(Error::BasePointMismatch {
                expected: self.point.clone(),
                found: other.point.clone(),
            });
        }
        Ok(())
    }

    fn sum(&self, other: &JetVector) -> Vec<f64> {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// The entries of `t ↦ p(ct)`: `|α| = j` scales by `c^j`.
    pub fn scaled(&self, c: f64) -> JetVector {
        let idx = multi_indices(self.dim, self.order);
        let b = idx.len();
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(k, e)| e * c.powi(idx[k % b].iter().sum::<usize>() as i32))
            .collect();
        JetVector {
            entries,
            ..self.clone()
        }
    }

    /// `max |entries − target|`.
    pub fn distance(&self, target: &[f64]) -> f64 {
        self.entries
            .iter()
            .zip(target)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

fn line_jet(e: &Expr, dir: &[f64], n: usize) -> Result<Vec<f64>> {
    let origin = vec![0.0; dir.len()];
    let path = PolyPath::line(&origin, dir);
    let exact = taylor_eval(e, &path, n)?;
    // Independent check of the exact coefficients; an oracle that cannot
    // evaluate its stencil (guards off the line) is skipped.
    if let Ok(fd) = fd_jet(e, &path, n.min(4), default_step(&origin)) {
        for j in 1..=n.min(4) {
            let a = exact.coeffs[j];
            if fd.reliable[j] && (fd.coeffs[j] - a).abs() > 1e-6 * a.abs().max(1.0) {
                return Err(Error::NotDifferentiable(format!(
                    "jet order {j} along {dir:?}: exact {a}, finite differences {}",
                    fd.coeffs[j]
                )));
            }
        }
    }
    Ok(exact.coeffs)
}

/// The jet vector of `p` at `F` over `family`, to order `n`.
pub fn jet_vector(
    p: &Plaque,
    point: &[f64],
    family: &FunctionFamily,
    n: usize,
    cfg: &ProbeConfig,
) -> Result<JetVector> {
    if n == 0 || n > K_MAX {
        return Err(Error::OrderTooHigh {
            requested: n,
            max: K_MAX,
        });
    }
    let d = p.dim();
    let origin = vec![0.0; d];
    if !p.domain.contains(&origin) {
        return Err(Error::invalid(format!(
            "domain of `{}` does not contain 0",
            p.label
        )));
    }
    let at0 = p.eval(&origin)?;
    let same = at0.len() == point.len()
        && at0
            .iter()
            .zip(point)
            .all(|(a, b)| (a - b).abs() <= cfg.eps_pt * b.abs().max(1.0));
    if !same {
        return Err(Error::BasePointMismatch {
            expected: point.to_vec(),
            found: at0,
        });
    }
    let idx = multi_indices(d, n);
    let mut entries = Vec::with_capacity(family.len() * idx.len());
    for f in &family.items {
        let comp = p.pull_back(&f.expr)?;
        if d == 1 {
            let c = line_jet(&comp, &[1.0], n)?;
            entries.extend((1..=n).map(|j| c[j] * factorial(j)));
            continue;
        }
        // Polarization: along β the j-th Taylor coefficient is
        // Σ_{|α|=j} D^α/α! · β^α; the lattice points |β| = j make this square
        // and invertible.
        for j in 1..=n {
            let block: Vec<&Vec<usize>> = idx
                .iter()
                .filter(|a| a.iter().sum::<usize>() == j)
                .collect();
            let mut rows = Vec::with_capacity(block.len());
            let mut rhs = Vec::with_capacity(block.len());
            for beta in &block {
                let dir: Vec<f64> = beta.iter().map(|b| *b as f64).collect();
                let c = line_jet(&comp, &dir, j)?;
                rhs.push(c[j]);
                rows.push(
                    block
                        .iter()
                        .map(|alpha| {
                            alpha
                                .iter()
                                .zip(&dir)
                                .map(|(a, x)| x.powi(*a as i32) / factorial(*a))
                                .product::<f64>()
                        })
                        .collect::<Vec<f64>>(),
                );
            }
            let (sol, _) = min_norm_solve(&rows, block.len(), &rhs, 1e-14);
            entries.extend(
                sol.into_iter()
                    .map(|v| if v.abs() < 1e-13 { 0.0 } else { v }),
            );
        }
    }
    Ok(JetVector {
        point: point.to_vec(),
        order: n,
        dim: d,
        labels: family.labels(),
        entries,
    })
}

/// `p₁ ∼ p₂` at order `n`.
pub fn equivalent(
    p1: &Plaque,
    p2: &Plaque,
    point: &[f64],
    family: &FunctionFamily,
    n: usize,
    cfg: &ProbeConfig,
) -> Result<bool> {
    let a = jet_vector(p1, point, family, n, cfg)?;
    let b = jet_vector(p2, point, family, n, cfg)?;
    Ok(a.close(&b, cfg))
}

/// A representative plaque with its jet vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentClass {
    pub rep: Plaque,
    pub jet: JetVector,
}

impl TangentClass {
    pub fn new(
        rep: Plaque,
        point: &[f64],
        family: &FunctionFamily,
        n: usize,
        cfg: &ProbeConfig,
    ) -> Result<Self> {
        let jet = jet_vector(&rep, point, family, n, cfg)?;
        Ok(TangentClass { rep, jet })
    }

    pub fn summary(&self) -> ClassSummary {
        ClassSummary {
            label: self.rep.label.clone(),
            exprs: self.rep.display(),
            jet: self.jet.entries.clone(),
        }
    }
}

/// Serializable view of a class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub label: String,
    pub exprs: Vec<String>,
    pub jet: Vec<f64>,
}

/// `c·[p] = [t ↦ p(ct)]`; the jet vector follows by the chain rule.
pub fn scalar_mult(c: f64, cls: &TangentClass) -> TangentClass {
    let d = cls.rep.dim();
    let label = format!("{}·{}", crate::diffeology::fmt_num(c), cls.rep.label);
    let rep = if c == 0.0 {
        Plaque::constant(label, &cls.jet.point, cls.rep.domain.clone())
    } else {
        let phi: Vec<Expr> = (0..d).map(|i| Expr::Const(c) * Expr::Var(i)).collect();
        let (lo, hi): (Vec<f64>, Vec<f64>) = cls
            .rep
            .domain
            .lo
            .iter()
            .zip(&cls.rep.domain.hi)
            .map(|(l, h)| {
                let (a, b) = (l / c, h / c);
                (a.min(b), a.max(b))
            })
            .unzip();
        let domain = BoxDomain::new(lo, hi).expect("scaled box stays nonempty");
        cls.rep
            .precompose(label, &phi, domain)
            .expect("arity preserved")
    };
    TangentClass {
        rep,
        jet: cls.jet.scaled(c),
    }
}

/// Result of adding two classes.
#[derive(Debug, Clone, PartialEq)]
pub enum AddOutcome {
    Sum(TangentClass),
    /// No plaque in the search family carries the summed jet; `gap` is the
    /// best residual found.
    NoWitness {
        target: Vec<f64>,
        gap: f64,
    },
}

impl AddOutcome {
    pub fn is_sum(&self) -> bool {
        matches!(self, AddOutcome::Sum(_))
    }
}

/// `[p₁] + [p₂]`: searches the linear-model candidate `p₁ + p₂ − F` (vector
/// space models only) and the generators composed with polynomial
/// reparametrizations fitted order by order.
pub fn add_classes(
    a: &TangentClass,
    b: &TangentClass,
    d: &GeneratedDiffeology,
    family: &FunctionFamily,
    cfg: &ProbeConfig,
) -> Result<AddOutcome> {
    a.jet.compatible(&b.jet, d.space.eps_pt)?;
    if b.jet.is_zero(cfg) {
        return Ok(AddOutcome::Sum(a.clone()));
    }
    if a.jet.is_zero(cfg) {
        return Ok(AddOutcome::Sum(b.clone()));
    }
    let target = a.jet.sum(&b.jet);
    let point = &a.jet.point;
    let n = a.jet.order;
    let label = format!("{} + {}", a.rep.label, b.rep.label);
    let mut best = f64::INFINITY;

    if d.space.is_vector_space() && a.rep.dim() == b.rep.dim() {
        let exprs: Vec<Expr> = a
            .rep
            .exprs
            .iter()
            .zip(&b.rep.exprs)
            .zip(point)
            .map(|((x, y), f)| x.clone() + y.clone() - Expr::Const(*f))
            .collect();
        let domain = intersect(&a.rep.domain, &b.rep.domain)?;
        let cand = Plaque::new(label.clone(), domain, exprs)?;
        let jet = jet_vector(&cand, point, family, n, cfg)?;
        let gap = jet.distance(&target);
        if jet
            .entries
            .iter()
            .zip(&target)
            .all(|(x, y)| cfg.jets_close(*x, *y))
        {
            return Ok(AddOutcome::Sum(TangentClass { rep: cand, jet }));
        }
        best = best.min(gap);
    }

    if a.rep.dim() == 1 {
        for (gi, g) in d.generators.iter().enumerate() {
            for pre in preimages(
                g,
                point,
                d.space.eps_pt,
                cfg.seed.wrapping_add(0x5a00 + gi as u64),
            ) {
                let p0 = pre.plaque(g)?;
                let Some(cand) = fit_curve(&p0, &pre.u, &target, family, n, d, &label)? else {
                    continue;
                };
                let jet = match jet_vector(&cand, point, family, n, cfg) {
                    Ok(j) => j,
                    Err(Error::Kink(_))
                    | Err(Error::NotDifferentiable(_))
                    | Err(Error::Domain(_)) => continue,
                    Err(e) => return Err(e),
                };
                let gap = jet.distance(&target);
                if jet
                    .entries
                    .iter()
                    .zip(&target)
                    .all(|(x, y)| cfg.jets_close(*x, *y))
                {
                    return Ok(AddOutcome::Sum(TangentClass { rep: cand, jet }));
                }
                best = best.min(gap);
            }
        }
    }
    Ok(AddOutcome::NoWitness { target, gap: best })
}

fn intersect(a: &BoxDomain, b: &BoxDomain) -> Result<BoxDomain> {
    let lo = a.lo.iter().zip(&b.lo).map(|(x, y)| x.max(*y)).collect();
    let hi = a.hi.iter().zip(&b.hi).map(|(x, y)| x.min(*y)).collect();
    BoxDomain::new(lo, hi)
}

/// Fits `φ(t) = u₀ + Σ φ_j t^j` so that the jets of `f ∘ p₀ ∘ φ` match the
/// target order by order: the coefficient of `t^j` is linear in `φ_j` with
/// the gradient of `f ∘ p₀` as matrix, the rest comes from lower orders.
fn fit_curve(
    p0: &Plaque,
    u0: &[f64],
    target: &[f64],
    family: &FunctionFamily,
    n: usize,
    d: &GeneratedDiffeology,
    label: &str,
) -> Result<Option<Plaque>> {
    let n0 = p0.dim();
    let comps = family
        .items
        .iter()
        .map(|f| p0.pull_back(&f.expr))
        .collect::<Result<Vec<_>>>()?;
    let mut grad = Vec::with_capacity(comps.len());
    for c in &comps {
        let mut row = Vec::with_capacity(n0);
        for l in 0..n0 {
            let mut e = vec![0.0; n0];
            e[l] = 1.0;
            match taylor_eval(c, &PolyPath::line(u0, &e), 1) {
                Ok(j) => row.push(j.coeffs[1]),
                Err(_) => return Ok(None),
            }
        }
        grad.push(row);
    }
    let mut coeffs = vec![u0.to_vec()];
    for j in 1..=n {
        if j > d.library.degree {
            coeffs.push(vec![0.0; n0]);
            continue;
        }
        let mut path = coeffs.clone();
        path.push(vec![0.0; n0]);
        let path = PolyPath::new(path);
        let mut rhs = Vec::with_capacity(comps.len());
        for (i, c) in comps.iter().enumerate() {
            let rest = match taylor_eval(c, &path, j) {
                Ok(jet) => jet.coeffs[j],
                Err(_) => return Ok(None),
            };
            rhs.push(target[i * n + j - 1] / factorial(j) - rest);
        }
        let (phi_j, _) = min_norm_solve(&grad, n0, &rhs, 1e-10);
        if phi_j.iter().any(|v| v.abs() > d.library.coeff_bound) {
            return Ok(None);
        }
        coeffs.push(phi_j);
    }
    let margin = 0.9 * p0.domain.margin(u0);
    if !(margin > 0.0) {
        return Ok(None);
    }
    let mut rho = 1.0f64;
    while (1..coeffs.len())
        .map(|j| coeffs[j].iter().fold(0.0f64, |m, v| m.max(v.abs())) * rho.powi(j as i32))
        .sum::<f64>()
        > margin
    {
        rho /= 2.0;
    }
    let phi: Vec<Expr> = (0..n0)
        .map(|l| {
            let mut e = Expr::Const(coeffs[0][l]);
            for (j, c) in coeffs.iter().enumerate().skip(1) {
                if c[l] != 0.0 {
                    e = e + Expr::Const(c[l]) * Expr::Var(0).powi(j as i32);
                }
            }
            e
        })
        .collect();
    Ok(Some(p0.precompose(
        format!("{label} via {}", p0.label),
        &phi,
        BoxDomain::cube(1, rho),
    )?))
}

/// Curves through `F` found in the generated family.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvesThrough {
    pub classes: Vec<TangentClass>,
    /// Generators with no preimage of `F`.
    pub absent: Vec<String>,
}

/// `count` first-order classes of curves `t ↦ p₀(u₀ + t·v)` through `F`,
/// cycling over the generators that reach `F` with seeded random `v`.
pub fn sample_classes(
    point: &[f64],
    d: &GeneratedDiffeology,
    family: &FunctionFamily,
    count: usize,
    cfg: &ProbeConfig,
) -> Result<CurvesThrough> {
    let mut through = Vec::new();
    let mut absent = Vec::new();
    for (gi, g) in d.generators.iter().enumerate() {
        let pre = preimages(
            g,
            point,
            d.space.eps_pt,
            cfg.seed.wrapping_add(0x7000 + gi as u64),
        );
        if pre.is_empty() {
            absent.push(g.label.clone());
        }
        for p in pre {
            through.push((p.plaque(g)?, p.u));
        }
    }
    if through.is_empty() {
        return Err(Error::NoCurveThroughPoint {
            point: point.to_vec(),
        });
    }
    let mut rng = cfg.rng(0x7100);
    let mut classes = Vec::with_capacity(count);
    for i in 0..count {
        let (p0, u0) = &through[i % through.len()];
        let v = direction(&mut rng, p0.dim());
        let scale: f64 = rng.gen_range(0.5..2.0);
        let v: Vec<f64> = v.iter().map(|x| x * scale).collect();
        let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let rho = (0.9 * p0.domain.margin(u0) / vmax).min(1.0);
        let phi: Vec<Expr> = u0
            .iter()
            .zip(&v)
            .map(|(u, w)| Expr::Const(*u) + Expr::Const(*w) * Expr::Var(0))
            .collect();
        let rep = p0.precompose(format!("{}#{i}", p0.label), &phi, BoxDomain::cube(1, rho))?;
        classes.push(TangentClass::new(rep, point, family, 1, cfg)?);
    }
    Ok(CurvesThrough { classes, absent })
}

/// Numerical tangent space at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentSpaceEstimate {
    pub point: Vec<f64>,
    pub dim: usize,
    pub singular_values: Vec<f64>,
    /// The sampled jets are not closed under addition.
    pub cone: bool,
    /// NoWitness certificates behind `cone`.
    pub witnesses: Vec<Witness>,
    /// Spanning directions (first-order jets of a greedy basis).
    pub basis: Vec<Vec<f64>>,
    pub absent: Vec<String>,
    pub samples: usize,
}

/// Rank of first-order jets of `samples` curves through `F`; pairs of a
/// greedy basis are added to detect a cone.
pub fn tangent_dim(
    point: &[f64],
    d: &GeneratedDiffeology,
    family: &FunctionFamily,
    samples: usize,
    cfg: &ProbeConfig,
) -> Result<TangentSpaceEstimate> {
    if samples < d.ambient_dim() {
        return Err(Error::invalid(format!(
            "need at least {} samples, got {samples}",
            d.ambient_dim()
        )));
    }
    let cur = sample_classes(point, d, family, samples, cfg)?;
    let rows: Vec<Vec<f64>> = cur.classes.iter().map(|c| c.jet.first_order()).collect();
    let q = rows[0].len();
    let s = spectrum(&rows, q, cfg.tau_rank);
    let basis_idx = greedy_basis(&rows, q, cfg.tau_rank);
    let mut witnesses = Vec::new();
    for (a, &i) in basis_idx.iter().enumerate() {
        for &j in &basis_idx[a + 1..] {
            let (ci, cj) = (&cur.classes[i], &cur.classes[j]);
            if let AddOutcome::NoWitness { target, gap } = add_classes(ci, cj, d, family, cfg)? {
                let mut w = Witness::note("no plaque in the search family carries the summed jet")
                    .at(point)
                    .plaque(format!("{} + {}", ci.rep.label, cj.rep.label))
                    .value("gap", gap);
                for (k, t) in target.iter().enumerate() {
                    w = w.value(format!("target_{k}"), *t);
                }
                witnesses.push(w);
            }
        }
    }
    Ok(TangentSpaceEstimate {
        point: point.to_vec(),
        dim: s.rank,
        singular_values: s.singular_values,
        cone: !witnesses.is_empty(),
        witnesses,
        basis: basis_idx.iter().map(|&i| rows[i].clone()).collect(),
        absent: cur.absent,
        samples,
    })
}

fn greedy_basis(rows: &[Vec<f64>], q: usize, tau: f64) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let scale = rows.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..rows.len() {
        if rows[i].iter().all(|v| v.abs() <= tau * scale) {
            continue;
        }
        let mut trial: Vec<Vec<f64>> = chosen.iter().map(|&j| rows[j].clone()).collect();
        trial.push(rows[i].clone());
        if spectrum(&trial, q, tau).rank == trial.len() {
            chosen.push(i);
        }
    }
    chosen
}

/// `α(v) = [F + t·v]` with jets taken against the functionals of the pair.
pub fn alpha(v: &[f64], point: &[f64], pair: &DualPair, cfg: &ProbeConfig) -> Result<TangentClass> {
    if v.len() != pair.dim() || point.len() != pair.dim() {
        return Err(Error::invalid(
            "vector, point and carrier dimensions differ",
        ));
    }
    let rep = Plaque::line("alpha", point, v, 1.0);
    TangentClass::new(rep, point, &pair.functional_family(), 1, cfg)
}

/// Is `α` injective? Decided by Gaussian elimination on the columns
/// `α(e_i)`, then cross-checked by a seeded collision search: random pairs
/// must not collide when injective, and `u`, `u + kernel` must collide
/// when not.
pub fn alpha_injectivity_probe(
    pair: &DualPair,
    trials: usize,
    cfg: &ProbeConfig,
) -> Result<Verdict> {
    let m = pair.dim();
    let origin = vec![0.0; m];
    let cols = (0..m)
        .map(|i| {
            let mut e = vec![0.0; m];
            e[i] = 1.0;
            Ok(alpha(&e, &origin, pair, cfg)?.jet.entries)
        })
        .collect::<Result<Vec<_>>>()?;
    let q = cols[0].len();
    let rows: Vec<Vec<f64>> = (0..q)
        .map(|l| cols.iter().map(|c| c[l]).collect())
        .collect();
    let (rank, kernel) = gauss_kernel(&rows, m, 1e-10);
    let mut rng = cfg.rng(0xa100);
    let collide = |u: &[f64], w: &[f64]| -> Result<bool> {
        let a = alpha(u, &origin, pair, cfg)?;
        let b = alpha(w, &origin, pair, cfg)?;
        Ok(a.jet.close(&b.jet, cfg))
    };
    match kernel {
        None => {
            for _ in 0..trials {
                let u = direction(&mut rng, m);
                let w = direction(&mut rng, m);
                if collide(&u, &w)? {
                    return Ok(Verdict::inconclusive(vec![
                        Diagnostic::new("full rank but random collision at u", u),
                        Diagnostic::new("and w", w),
                    ]));
                }
            }
            Ok(Verdict::pass().with_diagnostic(Diagnostic::new("rank", vec![rank as f64])))
        }
        Some(v) => {
            for _ in 0..trials {
                let u = direction(&mut rng, m);
                let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
                if !collide(&u, &w)? {
                    return Ok(Verdict::inconclusive(vec![Diagnostic::new(
                        "kernel vector from elimination does not collide",
                        v.clone(),
                    )]));
                }
            }
            let av = alpha(&v, &origin, pair, cfg)?;
            let mut w = Witness::note("alpha(v) = alpha(0)")
                .along(&v)
                .value("rank", rank as f64);
            for (l, e) in av.jet.entries.iter().enumerate() {
                w = w.value(format!("alpha_v_{}", l + 1), *e);
            }
            Ok(Verdict::fail(w))
        }
    }
}

/// Is the tangent set at `F` a vector space? `trials` pairs of sampled
/// classes are added, and scalar multiples are checked against recomputed
/// jets of their representatives.
pub fn linearity_probe(
    d: &GeneratedDiffeology,
    point: &[f64],
    family: &FunctionFamily,
    trials: usize,
    cfg: &ProbeConfig,
) -> Result<Verdict> {
    let cur = sample_classes(point, d, family, 2 * trials.max(1), cfg)?;
    for pair in cur.classes.chunks(2) {
        let [a, b] = pair else { continue };
        if let AddOutcome::NoWitness { target, gap } = add_classes(a, b, d, family, cfg)? {
            let mut w = Witness::note("no plaque carries the summed jet")
                .at(point)
                .plaque(format!("{} + {}", a.rep.label, b.rep.label))
                .value("gap", gap);
            for (k, t) in target.iter().enumerate() {
                w = w.value(format!("target_{k}"), *t);
            }
            return Ok(Verdict::fail(w));
        }
    }
    for cls in &cur.classes {
        for c in [-1.0, 2.0, 0.5] {
            let s = scalar_mult(c, cls);
            let direct = jet_vector(&s.rep, point, family, 1, cfg)?;
            if !direct.close(&s.jet, cfg) {
                return Ok(Verdict::fail(
                    Witness::note("scalar multiple leaves the class")
                        .at(point)
                        .plaque(&s.rep.label)
                        .value("c", c)
                        .value("gap", direct.distance(&s.jet.entries)),
                ));
            }
        }
    }
    Ok(Verdict::pass())
}

/// Continuity of addition along a family: for `(n+1)`-plaques `p₁, p₂`
/// agreeing at `s = 0` (the last parameter), is there a plaque `p₁₂(r, s)`
/// whose `s`-class is the sum for every `r`?
///
/// On vector-space models the witness is
/// `p(r, t) = p₁(r, 0) + t(∂ₛp₁(r, 0) + ∂ₛp₂(r, 0))`, verified per sampled
/// `r`. Otherwise a failed pointwise addition is a FAIL; pointwise success
/// leaves joint smoothness in `r` uncertified (INCONCLUSIVE).
pub fn continuity_probe(
    d: &GeneratedDiffeology,
    p1: &Plaque,
    p2: &Plaque,
    family: &FunctionFamily,
    cfg: &ProbeConfig,
) -> Result<Verdict> {
    let big_n = p1.dim();
    if p2.dim() != big_n || p1.ambient() != p2.ambient() {
        return Err(Error::invalid("the two plaques have different shapes"));
    }
    let n = big_n - 1;
    let r_box = if n == 0 {
        None
    } else {
        Some(intersect(
            &BoxDomain::new(p1.domain.lo[..n].to_vec(), p1.domain.hi[..n].to_vec())?,
            &BoxDomain::new(p2.domain.lo[..n].to_vec(), p2.domain.hi[..n].to_vec())?,
        )?)
    };
    let s_lo = p1.domain.lo[n].max(p2.domain.lo[n]);
    let s_hi = p1.domain.hi[n].min(p2.domain.hi[n]);
    if !(s_lo < 0.0 && 0.0 < s_hi) {
        return Err(Error::invalid("the s-interval must contain 0"));
    }
    let rs: Vec<Vec<f64>> = match &r_box {
        None => vec![Vec::new()],
        Some(b) => b.grid(if n == 1 { 5 } else { 3 }),
    };
    let slice = |p: &Plaque, r: &[f64]| -> Result<Plaque> {
        let mut subs: Vec<Expr> = r.iter().map(|x| Expr::Const(*x)).collect();
        subs.push(Expr::Var(0));
        p.precompose(
            format!("{}(r,·)", p.label),
            &subs,
            BoxDomain::new(vec![s_lo], vec![s_hi])?,
        )
    };
    for r in &rs {
        let mut x = r.clone();
        x.push(0.0);
        let (a, b) = (p1.eval(&x)?, p2.eval(&x)?);
        if !d.space.same_point(&a, &b) {
            return Err(Error::BasePointMismatch {
                expected: a,
                found: b,
            });
        }
    }

    if d.space.is_vector_space() {
        let mut at0: Vec<Expr> = (0..n).map(Expr::Var).collect();
        at0.push(Expr::Const(0.0));
        let t = Expr::Var(n);
        let exprs = p1
            .exprs
            .iter()
            .zip(&p2.exprs)
            .map(|(e1, e2)| {
                let base = e1.substitute(&at0)?;
                let d1 = e1.partial(n, big_n)?.substitute(&at0)?;
                let d2 = e2.partial(n, big_n)?.substitute(&at0)?;
                Ok(base + t.clone() * (d1 + d2))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut lo = r_box.as_ref().map_or(Vec::new(), |b| b.lo.clone());
        let mut hi = r_box.as_ref().map_or(Vec::new(), |b| b.hi.clone());
        lo.push(s_lo);
        hi.push(s_hi);
        let witness = Plaque::new("p12", BoxDomain::new(lo, hi)?, exprs)?;
        for r in &rs {
            let mut x = r.clone();
            x.push(0.0);
            let base = p1.eval(&x)?;
            let j1 = jet_vector(&slice(p1, r)?, &base, family, 1, cfg)?;
            let j2 = jet_vector(&slice(p2, r)?, &base, family, 1, cfg)?;
            let jw = jet_vector(&slice(&witness, r)?, &base, family, 1, cfg)?;
            let target = j1.sum(&j2);
            if !jw
                .entries
                .iter()
                .zip(&target)
                .all(|(a, b)| cfg.jets_close(*a, *b))
            {
                return Ok(Verdict::fail(
                    Witness::note("the linear witness misses the summed jet")
                        .at(r)
                        .plaque("p12")
                        .value("gap", jw.distance(&target)),
                ));
            }
        }
        let names = crate::expr::param_names(big_n);
        let shown: Vec<String> = witness
            .exprs
            .iter()
            .map(|e| e.display(&names).to_string())
            .collect();
        return Ok(Verdict::pass().with_diagnostic(Diagnostic::new(
            format!("witness p12 = ({}), jets checked at r", shown.join(", ")),
            rs.iter().flatten().copied().collect(),
        )));
    }

    for r in &rs {
        let mut x = r.clone();
        x.push(0.0);
        let base = p1.eval(&x)?;
        let a = TangentClass::new(slice(p1, r)?, &base, family, 1, cfg)?;
        let b = TangentClass::new(slice(p2, r)?, &base, family, 1, cfg)?;
        if let AddOutcome::NoWitness { gap, .. } = add_classes(&a, &b, d, family, cfg)? {
            return Ok(Verdict::fail(
                Witness::note("no plaque carries the summed s-jet at r")
                    .at(r)
                    .plaque(format!("{} + {}", p1.label, p2.label))
                    .value("gap", gap),
            ));
        }
    }
    Ok(Verdict::inconclusive(vec![Diagnostic::new(
        "pointwise sums found; joint smoothness in r not certified",
        rs.iter().flatten().copied().collect(),
    )]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffeology::{Constraint, Generator, ModelSpace};

    fn cfg() -> ProbeConfig {
        ProbeConfig::default()
    }

    fn cross() -> GeneratedDiffeology {
        let space = ModelSpace {
            ambient_dim: 2,
            constraints: vec![Constraint::parse("x*y = 0", 2).unwrap()],
            eps_pt: 1e-9,
        };
        let gx = Plaque::parse("x-axis", BoxDomain::cube(1, 2.0), &["t", "0"]).unwrap();
        let gy = Plaque::parse("y-axis", BoxDomain::cube(1, 2.0), &["0", "t"]).unwrap();
        GeneratedDiffeology::new(
            "cross",
            space,
            vec![Generator::plaque(gx), Generator::plaque(gy)],
            1,
        )
    }

    #[test]
    fn jet_vector_examples() {
        let xy = FunctionFamily::coordinates(2);
        let p = Plaque::line("l", &[1.0, 2.0], &[3.0, -1.0], 1.0);
        assert_eq!(
            jet_vector(&p, &[1.0, 2.0], &xy, 1, &cfg()).unwrap().entries,
            vec![3.0, -1.0]
        );
        let p = Plaque::parse("par", BoxDomain::cube(1, 1.0), &["t", "t^2"]).unwrap();
        assert_eq!(
            jet_vector(&p, &[0.0, 0.0], &xy, 2, &cfg()).unwrap().entries,
            vec![1.0, 0.0, 0.0, 2.0]
        );
        let c = Plaque::constant("c", &[0.5, 0.5], BoxDomain::cube(1, 1.0));
        assert!(jet_vector(&c, &[0.5, 0.5], &xy, 3, &cfg())
            .unwrap()
            .is_zero(&cfg()));
        assert!(matches!(
            jet_vector(&c, &[0.0, 0.0], &xy, 1, &cfg()),
            Err(Error::BasePointMismatch { .. })
        ));
    }

    #[test]
    fn polarization_recovers_mixed_partials() {
        let fam = FunctionFamily::parse(2, &[("f", "x*y + x^2")]).unwrap();
        let id = Plaque::parse("id", BoxDomain::cube(2, 1.0), &["r", "s"]).unwrap();
        let j = jet_vector(&id, &[0.0, 0.0], &fam, 2, &cfg()).unwrap();
        // D_r, D_s, D_rr, D_rs, D_ss
        let want = [0.0, 0.0, 2.0, 1.0, 0.0];
        for (a, b) in j.entries.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{:?}", j.entries);
        }
    }

    #[test]
    fn equivalence_examples() {
        let xy = FunctionFamily::coordinates(2);
        let a = Plaque::parse("a", BoxDomain::cube(1, 1.0), &["t", "0"]).unwrap();
        let b = Plaque::parse("b", BoxDomain::cube(1, 1.0), &["sin(t)", "0"]).unwrap();
        assert!(equivalent(&a, &b, &[0.0, 0.0], &xy, 1, &cfg()).unwrap());
        assert!(!equivalent(&a, &b, &[0.0, 0.0], &xy, 3, &cfg()).unwrap());
        assert!(equivalent(&b, &b, &[0.0, 0.0], &xy, 3, &cfg()).unwrap());
    }

    #[test]
    fn scalar_mult_examples() {
        let xy = FunctionFamily::coordinates(2);
        let p = Plaque::parse("par", BoxDomain::cube(1, 1.0), &["t", "t^2"]).unwrap();
        let cls = TangentClass::new(p, &[0.0, 0.0], &xy, 2, &cfg()).unwrap();
        let two = scalar_mult(2.0, &cls);
        assert_eq!(two.jet.entries, vec![2.0, 0.0, 0.0, 8.0]);
        let direct = jet_vector(&two.rep, &[0.0, 0.0], &xy, 2, &cfg()).unwrap();
        assert!(direct.close(&two.jet, &cfg()));
        assert!(scalar_mult(0.0, &cls).jet.is_zero(&cfg()));
        assert_eq!(scalar_mult(1.0, &cls).jet, cls.jet);
    }

    #[test]
    fn addition_on_cross_and_plane() {
        let xy = FunctionFamily::coordinates(2);
        let d = cross();
        let e1 = TangentClass::new(
            Plaque::line("e1", &[0.0, 0.0], &[1.0, 0.0], 1.0),
            &[0.0, 0.0],
            &xy,
            1,
            &cfg(),
        )
        .unwrap();
        let e2 = TangentClass::new(
            Plaque::line("e2", &[0.0, 0.0], &[0.0, 1.0], 1.0),
            &[0.0, 0.0],
            &xy,
            1,
            &cfg(),
        )
        .unwrap();
        match add_classes(&e1, &e2, &d, &xy, &cfg()).unwrap() {
            AddOutcome::NoWitness { target, gap } => {
                assert_eq!(target, vec![1.0, 1.0]);
                assert!(gap >= 0.5);
            }
            other => panic!("{other:?}"),
        }
        let e1b = TangentClass::new(
            Plaque::line("2e1", &[0.0, 0.0], &[2.0, 0.0], 1.0),
            &[0.0, 0.0],
            &xy,
            1,
            &cfg(),
        )
        .unwrap();
        assert!(add_classes(&e1, &e1b, &d, &xy, &cfg()).unwrap().is_sum());
        let zero = scalar_mult(0.0, &e1);
        assert_eq!(
            add_classes(&e2, &zero, &d, &xy, &cfg()).unwrap(),
            AddOutcome::Sum(e2.clone())
        );

        let plane = GeneratedDiffeology::euclidean(2, 2.0, 1);
        match add_classes(&e1, &e2, &plane, &xy, &cfg()).unwrap() {
            AddOutcome::Sum(s) => assert_eq!(s.jet.entries, vec![1.0, 1.0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cross_tangent_dimension() {
        let xy = FunctionFamily::coordinates(2);
        let d = cross();
        let t = tangent_dim(&[0.0, 0.0], &d, &xy, 8, &cfg()).unwrap();
        assert_eq!(t.dim, 2);
        assert!(t.cone);
        let t = tangent_dim(&[1.0, 0.0], &d, &xy, 8, &cfg()).unwrap();
        assert_eq!(t.dim, 1);
        assert!(!t.cone);
        assert_eq!(t.absent, vec!["y-axis".to_string()]);
        let plane = GeneratedDiffeology::euclidean(2, 2.0, 1);
        let t = tangent_dim(&[0.3, -0.2], &plane, &xy, 6, &cfg()).unwrap();
        assert_eq!((t.dim, t.cone), (2, false));
        assert!(matches!(
            tangent_dim(&[1.0, 1.0], &d, &xy, 4, &cfg()),
            Err(Error::NoCurveThroughPoint { .. })
        ));
    }

    #[test]
    fn alpha_examples() {
        let full = DualPair::full(2);
        assert!(alpha(&[0.0, 0.0], &[0.0, 0.0], &full, &cfg())
            .unwrap()
            .jet
            .is_zero(&cfg()));
        assert_eq!(
            alpha(&[1.0, 2.0], &[0.0, 0.0], &full, &cfg())
                .unwrap()
                .jet
                .entries,
            vec![1.0, 2.0]
        );
        let sum = DualPair::parse(2, &["x + y"]).unwrap();
        assert_eq!(
            alpha(&[1.0, -1.0], &[0.0, 0.0], &sum, &cfg())
                .unwrap()
                .jet
                .entries,
            vec![0.0]
        );

        assert!(alpha_injectivity_probe(&full, 10, &cfg())
            .unwrap()
            .is_pass());
        let v = alpha_injectivity_probe(&sum, 10, &cfg()).unwrap();
        assert_eq!(v.witness.unwrap().direction, Some(vec![1.0, -1.0]));
        let three = DualPair::parse(3, &["x", "y", "x + y"]).unwrap();
        let v = alpha_injectivity_probe(&three, 10, &cfg()).unwrap();
        assert_eq!(v.witness.unwrap().direction, Some(vec![0.0, 0.0, 1.0]));
    }

    #[test]
    fn linearity_examples() {
        let xy = FunctionFamily::coordinates(2);
        let plane = GeneratedDiffeology::euclidean(2, 2.0, 1);
        assert!(linearity_probe(&plane, &[0.0, 0.0], &xy, 3, &cfg())
            .unwrap()
            .is_pass());
        assert!(linearity_probe(&cross(), &[0.0, 0.0], &xy, 3, &cfg())
            .unwrap()
            .is_fail());
        let pt = GeneratedDiffeology::new(
            "point",
            ModelSpace {
                ambient_dim: 2,
                constraints: vec![
                    Constraint::parse("x = 0", 2).unwrap(),
                    Constraint::parse("y = 0", 2).unwrap(),
                ],
                eps_pt: 1e-9,
            },
            vec![Generator::plaque(Plaque::constant(
                "const",
                &[0.0, 0.0],
                BoxDomain::cube(1, 1.0),
            ))],
            1,
        );
        assert!(linearity_probe(&pt, &[0.0, 0.0], &xy, 3, &cfg())
            .unwrap()
            .is_pass());
    }

    #[test]
    fn continuity_examples() {
        let xy = FunctionFamily::coordinates(2);
        let plane = GeneratedDiffeology::euclidean(2, 2.0, 1);
        let p1 = Plaque::parse("p1", BoxDomain::cube(2, 1.0), &["r", "s"]).unwrap();
        let p2 = Plaque::parse("p2", BoxDomain::cube(2, 1.0), &["r", "2*s"]).unwrap();
        let v = continuity_probe(&plane, &p1, &p2, &xy, &cfg()).unwrap();
        assert!(v.is_pass(), "{v:?}");
        assert!(
            v.diagnostics[0].label.contains("(r, s*3)"),
            "{}",
            v.diagnostics[0].label
        );
        assert!(continuity_probe(&plane, &p1, &p1, &xy, &cfg())
            .unwrap()
            .is_pass());

        let q1 = Plaque::parse("q1", BoxDomain::cube(2, 1.0), &["s", "0"]).unwrap();
        let q2 = Plaque::parse("q2", BoxDomain::cube(2, 1.0), &["0", "s"]).unwrap();
        assert!(continuity_probe(&cross(), &q1, &q2, &xy, &cfg())
            .unwrap()
            .is_fail());
    }
}
