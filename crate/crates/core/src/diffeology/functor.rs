//! The passage between diffeologies and curve/function structures.
//!
//! [`psi`] turns a consistent pair `(C, F)` into the diffeology of plaques
//! along which every `f ∈ F` is smooth; [`upsilon`] extracts the curves of a
//! diffeology and the functions smooth along them. Both sides are oracles
//! over finite families.

use super::probes::phi_probe;
use super::{FunctionFamily, GeneratedDiffeology, Generator, ModelSpace, Plaque};
use crate::config::ProbeConfig;
use crate::expr::Expr;
use crate::smooth::{curve_library, BoxDomain};
use crate::verdict::{Status, Verdict};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::probes::gamma_probe;

/// Curves `C` together with a sample `F` of `Φ(C)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MStructure {
    pub ambient_dim: usize,
    pub curves: Vec<Plaque>,
    pub functions: FunctionFamily,
    pub class_k: usize,
}

impl MStructure {
    /// Membership of `f` in `Φ(C)`.
    pub fn function_oracle(&self, f: &Expr, cfg: &ProbeConfig) -> Result<Verdict> {
        phi_probe(&self.curves, f, self.class_k, cfg)
    }

    /// Membership of a curve in `Γ(F)`.
    pub fn curve_oracle(&self, p: &Plaque, cfg: &ProbeConfig) -> Result<Verdict> {
        gamma_probe(&self.functions, p, self.class_k, cfg)
    }
}

/// The diffeology defined by a consistent pair: plaques are the maps `p`
/// with `f ∘ p` smooth for all `f ∈ F`, and its curves are recorded as `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiDiffeology {
    pub ambient_dim: usize,
    pub curves: Vec<Plaque>,
    pub functions: FunctionFamily,
    pub class_k: usize,
}

impl PsiDiffeology {
    /// The membership oracle `Γ(F)`.
    pub fn membership(&self, p: &Plaque, cfg: &ProbeConfig) -> Result<Verdict> {
        gamma_probe(&self.functions, p, self.class_k, cfg)
    }

    /// Generating data: the recorded curves as generators.
    pub fn as_generated(&self) -> GeneratedDiffeology {
        let mut d = GeneratedDiffeology::new(
            "psi",
            ModelSpace::euclidean(self.ambient_dim),
            self.curves.iter().cloned().map(Generator::plaque).collect(),
            self.class_k,
        );
        d.witnesses = self.functions.clone();
        d
    }
}

/// Builds the diffeology of a pair `(C, F)`; every `f ∈ F` must pass
/// `phi_probe` against `C`.
pub fn psi(
    curves: &[Plaque],
    functions: &FunctionFamily,
    class_k: usize,
    cfg: &ProbeConfig,
) -> Result<PsiDiffeology> {
    let m = curves
        .first()
        .map(Plaque::ambient)
        .ok_or_else(|| Error::invalid("psi needs at least one curve"))?;
    for c in curves {
        if c.dim() != 1 || c.ambient() != m {
            return Err(Error::invalid(format!(
                "`{}` is not a curve in R^{m}",
                c.label
            )));
        }
    }
    for f in &functions.items {
        if !phi_probe(curves, &f.expr, class_k, cfg)?.is_pass() {
            return Err(Error::InconsistentPair {
                label: f.label.clone(),
            });
        }
    }
    Ok(PsiDiffeology {
        ambient_dim: m,
        curves: curves.to_vec(),
        functions: functions.clone(),
        class_k,
    })
}

/// Curves of a diffeology and the functions (from its witness pool) that
/// are smooth along them.
///
/// One-dimensional generators are taken as they are; higher-dimensional
/// ones are restricted to the probe curves (axes, diagonals, seeded random
/// lines, parabolas) through a 3-point grid of base points.
pub fn upsilon(d: &GeneratedDiffeology, cfg: &ProbeConfig) -> Result<MStructure> {
    let mut curves = Vec::new();
    for g in &d.generators {
        for p in g.instances()? {
            if p.dim() == 1 {
                curves.push(p);
            } else {
                curves.extend(restrictions(&p, cfg)?);
            }
        }
    }
    if curves.is_empty() {
        return Err(Error::NoCurves);
    }
    let mut functions = FunctionFamily::default();
    for f in &d.witness_pool().items {
        if phi_probe(&curves, &f.expr, d.class_k, cfg)?.is_pass() {
            functions.items.push(f.clone());
        }
    }
    Ok(MStructure {
        ambient_dim: d.ambient_dim(),
        curves,
        functions,
        class_k: d.class_k,
    })
}

fn restrictions(p: &Plaque, cfg: &ProbeConfig) -> Result<Vec<Plaque>> {
    let n = p.dim();
    let bases = if n <= 2 {
        p.domain.grid(3)
    } else {
        vec![p.domain.center()]
    };
    let mut out = Vec::new();
    for b in &bases {
        let margin = 0.9 * p.domain.margin(b);
        for c in curve_library(n, cfg) {
            let vmax = c.v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let wmax =
                c.w.as_ref()
                    .map_or(0.0, |w| w.iter().fold(0.0f64, |m, x| m.max(x.abs())));
            // Largest rho with rho·|v| + rho²·|w| <= margin.
            let rho = if wmax == 0.0 {
                margin / vmax
            } else {
                (-vmax + (vmax * vmax + 4.0 * wmax * margin).sqrt()) / (2.0 * wmax)
            };
            let phi: Vec<Expr> = (0..n)
                .map(|i| {
                    let t = Expr::Var(0);
                    let mut e = Expr::Const(b[i]) + Expr::Const(c.v[i]) * t.clone();
                    if let Some(w) = &c.w {
                        e = e + Expr::Const(w[i]) * t.powi(2);
                    }
                    e
                })
                .collect();
            let label = format!("{}|{}@{}", p.label, c.label, fmt_point(b));
            out.push(p.precompose(label, &phi, BoxDomain::cube(1, rho))?);
        }
    }
    Ok(out)
}

fn fmt_point(b: &[f64]) -> String {
    let parts: Vec<String> = b.iter().map(|x| super::fmt_num(*x)).collect();
    format!("({})", parts.join(","))
}

/// Battery verdicts against `Υ(D)` and against `Υ(Ψ(Υ(D)))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrip {
    pub space: String,
    pub labels: Vec<String>,
    pub before: Vec<Status>,
    pub after: Vec<Status>,
    pub agree: bool,
}

/// Runs `upsilon ∘ psi` on the structure of `d` and compares the verdicts
/// of `phi_probe` on every function of `family`.
pub fn round_trip(
    d: &GeneratedDiffeology,
    family: &FunctionFamily,
    cfg: &ProbeConfig,
) -> Result<RoundTrip> {
    let verdicts = |curves: &[Plaque]| -> Result<Vec<Status>> {
        family
            .items
            .par_iter()
            .map(|f| Ok(phi_probe(curves, &f.expr, d.class_k, cfg)?.status))
            .collect()
    };
    let m = upsilon(d, cfg)?;
    let before = verdicts(&m.curves)?;
    let back = upsilon(
        &psi(&m.curves, &m.functions, m.class_k, cfg)?.as_generated(),
        cfg,
    )?;
    let after = verdicts(&back.curves)?;
    Ok(RoundTrip {
        space: d.name.clone(),
        labels: family.labels(),
        agree: before == after,
        before,
        after,
    })
}

const BATTERY_PLANE: [(&str, &str); 20] = [
    ("x", "x"),
    ("y", "y"),
    ("xy", "x*y"),
    ("norm2", "x^2 + y^2"),
    ("trig", "sin(x) + cos(y)"),
    ("exp_xy", "exp(x*y)"),
    ("bump", "1/(1 + x^2 + y^2)"),
    ("log_norm", "log(1 + x^2 + y^2)"),
    ("abs_x", "abs(x)"),
    ("abs_y", "abs(y)"),
    ("abs_xy", "abs(x*y)"),
    ("sqrt_abs_xy", "sqrt(abs(x*y))"),
    ("relu_x", "relu(x)"),
    ("x_abs_x", "x*abs(x)"),
    ("abs_sum", "abs(x + y)"),
    ("abs_diff", "abs(x - y)"),
    ("cone", "sqrt(x^2 + y^2)"),
    ("f1", "atzero(x*y^2/(x^2 + y^4), 0)"),
    ("f2", "atzero(x*y^2/(x^2 + y^2), 0)"),
    ("f3", "atzero(x^2*y^2/(x^2 + y^2), 0)"),
];

const BATTERY_LINE: [(&str, &str); 20] = [
    ("x", "x"),
    ("square", "x^2"),
    ("cubic", "x^3 - x"),
    ("sin", "sin(x)"),
    ("cos", "cos(x)"),
    ("exp", "exp(x)"),
    ("bump", "1/(1 + x^2)"),
    ("gauss", "exp(-x^2)"),
    ("log", "log(1 + x^2)"),
    ("hyp", "sqrt(1 + x^2)"),
    ("abs", "abs(x)"),
    ("relu", "relu(x)"),
    ("x_abs_x", "x*abs(x)"),
    ("abs_cubed", "abs(x)^3"),
    ("relu_sq", "relu(x)^2"),
    ("sqrt_abs", "sqrt(abs(x))"),
    ("abs_sin", "abs(sin(x))"),
    ("sin_abs", "sin(abs(x))"),
    ("cos_sqrt_abs", "cos(sqrt(abs(x)))"),
    ("x2_abs", "x^2*abs(x)"),
];

/// A fixed test battery of 20 functions on `R^m`: smooth ones, kinks on
/// axes and diagonals through the origin, and the three two-variable
/// counterexamples. For `m ≥ 2` only the first two coordinates are used.
pub fn battery(m: usize) -> FunctionFamily {
    let items: &[(&str, &str)] = if m == 1 {
        &BATTERY_LINE
    } else {
        &BATTERY_PLANE
    };
    // The entries are written in `x, y`; for m > 3 those name the first
    // two coordinates.
    let mut names = crate::expr::ambient_names(m);
    if m > 3 {
        names[0] = "x".into();
        names[1] = "y".into();
    }
    let parsed = items
        .iter()
        .map(|(l, s)| {
            Ok(super::LabeledFn {
                label: l.to_string(),
                expr: crate::expr::parse(s, &names)?,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(FunctionFamily::new);
    parsed.expect("battery parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_sizes() {
        assert_eq!(battery(1).len(), 20);
        assert_eq!(battery(2).len(), 20);
        assert_eq!(battery(3).len(), 20);
    }

    #[test]
    fn inconsistent_pair_rejected() {
        let cfg = ProbeConfig::default();
        let c = vec![Plaque::parse("x-axis", BoxDomain::cube(1, 1.0), &["t", "0"]).unwrap()];
        let f = FunctionFamily::parse(2, &[("abs", "abs(x)")]).unwrap();
        assert_eq!(
            psi(&c, &f, 1, &cfg),
            Err(Error::InconsistentPair {
                label: "abs".into()
            })
        );
    }

    #[test]
    fn no_curves() {
        let mut d = GeneratedDiffeology::euclidean(2, 1.0, 1);
        d.generators.clear();
        assert_eq!(upsilon(&d, &ProbeConfig::default()), Err(Error::NoCurves));
    }

    #[test]
    fn bundled_round_trips() {
        let cfg = ProbeConfig::default();
        for (name, _) in crate::diffeology::BUNDLED_SPACES {
            let d = crate::diffeology::bundled(name).unwrap();
            let rt = round_trip(&d, &battery(d.ambient_dim()), &cfg).unwrap();
            assert!(rt.agree, "{name}: {rt:?}");
        }
    }
}
