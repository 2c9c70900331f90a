//! Numerical `Cᵏ` classification of an expression on a box.
//!
//! At every point of a sample grid the expression is restricted to a small
//! library of curves: the coordinate axes, the diagonals `eᵢ ± eⱼ`, two
//! seeded random directions, and the parabolas `x + t·eᵢ ± t²·eⱼ`. The
//! parabolas catch functions that are well behaved on every line but not on
//! curved approaches. Along each curve
//!
//! * the finite-difference jet up to order `k` must be Richardson-consistent,
//! * no sentinel difference above order `k` may blow up as the step shrinks,
//! * `δᵏ⁺¹` on node tuples clustering at the point must stay bounded.
//!
//! Any blow-up is a FAIL with the point, curve and sizes as witness; missing
//! consistency without a blow-up is INCONCLUSIVE; otherwise PASS.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ProbeConfig;
use crate::divided::{delta_bound, BoundClass};
use crate::expr::Expr;
use crate::fd::{fd_jet_fn, order_step};
use crate::verdict::{Diagnostic, Verdict, Witness};
use crate::{Error, Result};

/// An open box `∏ (loᵢ, hiᵢ)`, serialized as `[[lo, hi], …]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl TryFrom<Vec<[f64; 2]>> for BoxDomain {
    type Error = Error;
    fn try_from(v: Vec<[f64; 2]>) -> Result<Self> {
        BoxDomain::new(
            v.iter().map(|p| p[0]).collect(),
            v.iter().map(|p| p[1]).collect(),
        )
    }
}

impl From<BoxDomain> for Vec<[f64; 2]> {
    fn from(b: BoxDomain) -> Self {
        b.lo.iter().zip(&b.hi).map(|(l, h)| [*l, *h]).collect()
    }
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::invalid(
                "box bounds must be nonempty and of equal length",
            ));
        }
        for (i, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && l < h) {
                return Err(Error::invalid(format!(
                    "box side {i} is ({l}, {h}), not a nonempty interval"
                )));
            }
        }
        Ok(BoxDomain { lo, hi })
    }

    /// `[-r, r]^n`.
    pub fn cube(n: usize, r: f64) -> Self {
        BoxDomain::new(vec![-r; n], vec![r; n]).expect("valid cube")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| l < v && v < h)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (l + h))
            .collect()
    }

    /// Distance from `x` to the boundary (sup norm).
    pub fn margin(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (l, h))| (v - l).min(h - v))
            .fold(f64::INFINITY, f64::min)
    }

    /// Cell centres of a `g`-per-axis grid. With odd `g` the centre of the box
    /// is a sample point.
    pub fn grid(&self, g: usize) -> Vec<Vec<f64>> {
        let n = self.dim();
        let total = g.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                (0..n)
                    .map(|a| {
                        let i = idx % g;
                        idx /= g;
                        self.lo[a] + (i as f64 + 0.5) * (self.hi[a] - self.lo[a]) / g as f64
                    })
                    .collect()
            })
            .collect()
    }

    /// The box shrunk about its centre by `factor`.
    pub fn shrink(&self, factor: f64) -> BoxDomain {
        let c = self.center();
        BoxDomain {
            lo: self
                .lo
                .iter()
                .zip(&c)
                .map(|(l, m)| m + factor * (l - m))
                .collect(),
            hi: self
                .hi
                .iter()
                .zip(&c)
                .map(|(h, m)| m + factor * (h - m))
                .collect(),
        }
    }
}

/// `t ↦ x + t·v + t²·w`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeCurve {
    pub v: Vec<f64>,
    pub w: Option<Vec<f64>>,
    pub label: String,
}

impl ProbeCurve {
    fn at(&self, x: &[f64], t: f64) -> Vec<f64> {
        let mut p: Vec<f64> = x.iter().zip(&self.v).map(|(a, b)| a + t * b).collect();
        if let Some(w) = &self.w {
            for (pi, wi) in p.iter_mut().zip(w) {
                *pi += t * t * wi;
            }
        }
        p
    }
}

/// The curve library used at every sample point of an `n`-dimensional box.
pub fn curve_library(n: usize, cfg: &ProbeConfig) -> Vec<ProbeCurve> {
    let unit = |i: usize| {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    };
    let mut out: Vec<ProbeCurve> = (0..n)
        .map(|i| ProbeCurve {
            v: unit(i),
            w: None,
            label: format!("axis {i}"),
        })
        .collect();
    if n == 1 {
        return out;
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            for s in [1.0, -1.0] {
                let mut v = vec![0.0; n];
                v[i] = r;
                v[j] = s * r;
                out.push(ProbeCurve {
                    v,
                    w: None,
                    label: format!("diagonal e{i}{}e{j}", if s > 0.0 { '+' } else { '-' }),
                });
            }
        }
    }
    let mut rng = cfg.rng(0x5300);
    for k in 0..2 {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-3);
        out.push(ProbeCurve {
            v: v.iter().map(|x| x / norm).collect(),
            w: None,
            label: format!("random line {k}"),
        });
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for s in [1.0, -1.0] {
                let mut w = vec![0.0; n];
                w[j] = s;
                out.push(ProbeCurve {
                    v: unit(i),
                    w: Some(w),
                    label: format!(
                        "parabola t e{i} {} t^2 e{j}",
                        if s > 0.0 { '+' } else { '-' }
                    ),
                });
            }
        }
    }
    out
}

/// Result of probing one scalar function of one parameter at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum CurveOutcome {
    Smooth,
    /// Divergence witnessed: the jump size and a nearby value.
    Blowup {
        jump: f64,
        t: f64,
        value_near: f64,
        source: &'static str,
    },
    Unclear(Diagnostic),
}

/// Largest parameter reach of the stencils used by [`probe_scalar`] with
/// base step `h`.
pub fn reach(k: usize, h: f64) -> f64 {
    let fd = (1..=k + 2)
        .map(|j| (j as f64 + 2.0) / 2.0 * order_step(h, j) * 2.0)
        .fold(0.0, f64::max);
    let m = k + 1;
    let delta = (m as f64 / 2.0 + 1.3) * order_step(h, m);
    fd.max(delta)
}

/// Classifies `g` at `t = 0` up to order `k` with base step `h`.
pub fn probe_scalar<G>(g: &G, k: usize, h: f64) -> Result<CurveOutcome>
where
    G: Fn(f64) -> Result<f64> + Sync,
{
    let fd = match fd_jet_fn(g, k, h) {
        Ok(fd) => fd,
        Err(e) if matches!(e, Error::Domain(_)) => {
            return Ok(CurveOutcome::Unclear(Diagnostic::new(
                format!("stencil leaves the domain of definition: {e}"),
                vec![h],
            )))
        }
        Err(e) => return Err(e),
    };
    let m = k + 1;
    let hd = order_step(h, m);
    let db = match delta_bound(g, 0.0, m, hd) {
        Ok(db) => db,
        Err(e) if matches!(e, Error::Domain(_)) => {
            return Ok(CurveOutcome::Unclear(Diagnostic::new(
                format!("divided-difference nodes leave the domain: {e}"),
                vec![hd],
            )))
        }
        Err(e) => return Err(e),
    };
    if db.class == BoundClass::Divergent {
        let t = db.scales[2];
        return Ok(CurveOutcome::Blowup {
            jump: db.jump(m),
            t,
            value_near: g(t)?,
            source: "divided difference",
        });
    }
    if let Some(jump) = fd.jump {
        let t = order_step(h, k + 1) / 4.0;
        return Ok(CurveOutcome::Blowup {
            jump,
            t,
            value_near: g(t)?,
            source: "finite-difference sentinel",
        });
    }
    if !fd.is_consistent() {
        return Ok(CurveOutcome::Unclear(Diagnostic::new(
            "Richardson extrapolants disagree (error per order)",
            fd.errors,
        )));
    }
    if db.class == BoundClass::Unclear {
        return Ok(CurveOutcome::Unclear(Diagnostic::new(
            format!("delta^{m} neither bounded nor clearly divergent (per scale)"),
            db.values.to_vec(),
        )));
    }
    Ok(CurveOutcome::Smooth)
}

/// PASS / FAIL / INCONCLUSIVE classification of `e` as a `Cᵏ` function on
/// `domain`.
pub fn smoothness_probe(
    e: &Expr,
    domain: &BoxDomain,
    k: usize,
    cfg: &ProbeConfig,
) -> Result<Verdict> {
    let n = domain.dim();
    if e.arity() > n {
        return Err(Error::Arity {
            index: e.arity() - 1,
            available: n,
        });
    }
    if k > crate::jet::K_MAX {
        return Err(Error::OrderTooHigh {
            requested: k,
            max: crate::jet::K_MAX,
        });
    }
    let g = match n {
        1 | 2 => cfg.grid,
        3 => cfg.grid.min(5),
        _ => cfg.grid.min(3),
    }
    .max(1);
    let points = domain.grid(g);
    let curves = curve_library(n, cfg);
    let unit_reach = reach(k, 1.0);
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..curves.len()).map(move |c| (p, c)))
        .collect();
    let outcomes: Vec<Result<CurveOutcome>> = jobs
        .par_iter()
        .map(|&(pi, ci)| {
            let x = &points[pi];
            let c = &curves[ci];
            e.eval(x)?;
            // Keep the stencil inside the box: |v| = 1 and |w| ≤ 1.
            let margin = domain.margin(x);
            let mut h = cfg.step_at(x);
            let r = unit_reach * h;
            if r * (1.0 + r) > 0.9 * margin {
                h *= 0.9 * margin / (r * (1.0 + r));
            }
            let gfun = |t: f64| -> Result<f64> { Ok(e.eval(&c.at(x, t))?) };
            probe_scalar(&gfun, k, h)
        })
        .collect();
    let mut diags = Vec::new();
    for (&(pi, ci), out) in jobs.iter().zip(outcomes) {
        match out? {
            CurveOutcome::Smooth => {}
            CurveOutcome::Blowup {
                jump,
                t,
                value_near,
                source,
            } => {
                let x = &points[pi];
                let c = &curves[ci];
                let mut w = Witness::note(format!(
                    "order-{k} derivative diverges along {} ({source})",
                    c.label
                ))
                .at(x)
                .along(&c.v)
                .value("jump", jump)
                .value("t", t)
                .value("value_at_point", e.eval(x)?)
                .value("value_near", value_near);
                if let Some(wq) = &c.w {
                    for (i, wi) in wq.iter().enumerate() {
                        w = w.value(format!("curvature_{i}"), *wi);
                    }
                }
                return Ok(Verdict::fail(w));
            }
            CurveOutcome::Unclear(d) => {
                if diags.len() < 8 {
                    let x = &points[pi];
                    diags.push(Diagnostic::new(
                        format!("{} at {:?} along {}", d.label, x, curves[ci].label),
                        d.residuals,
                    ));
                }
            }
        }
    }
    if diags.is_empty() {
        Ok(Verdict::pass())
    } else {
        Ok(Verdict::inconclusive(diags))
    }
}
