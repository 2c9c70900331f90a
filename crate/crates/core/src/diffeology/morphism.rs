//! Three candidate notions of a differentiable map `f: X → Y`:
//!
//! * `i`: `f ∘ p` is a plaque of `Y` for every plaque `p` of `X`;
//! * `ii`: `g ∘ f ∈ Φ(P(X))` for every `g ∈ D(Y)`;
//! * `iii`: `g ∘ f ∘ p` is smooth for every plaque `p` and `g ∈ D(Y)`.
//!
//! Modes ii and iii are equivalent; they are computed along different
//! substitution orders so the agreement is a real check.

use serde::{Deserialize, Serialize};

use super::probes::{membership_probe, phi_probe};
use super::{battery, FunctionFamily, GeneratedDiffeology, Plaque};
use crate::config::ProbeConfig;
use crate::expr::Expr;
use crate::smooth::smoothness_probe;
use crate::verdict::{Status, Verdict, Witness};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MorphismMode {
    I,
    Ii,
    Iii,
}

impl std::str::FromStr for MorphismMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" => Ok(MorphismMode::I),
            "ii" => Ok(MorphismMode::Ii),
            "iii" => Ok(MorphismMode::Iii),
            _ => Err(Error::invalid(format!(
                "unknown morphism mode `{s}` (expected i, ii or iii)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorphismReport {
    pub mode_i: Verdict,
    pub mode_ii: Verdict,
    pub mode_iii: Verdict,
    pub ii_iii_agree: bool,
}

/// Sample of `D(Y)`: coordinates, declared witnesses and the standard
/// battery, kept when they pass `phi_probe` against `Y`'s generators.
pub fn smooth_functions_sample(
    dy: &GeneratedDiffeology,
    cfg: &ProbeConfig,
) -> Result<FunctionFamily> {
    let gens = dy.generator_plaques()?;
    let mut pool = dy.witness_pool();
    pool.extend(&battery(dy.ambient_dim()));
    let mut out = FunctionFamily::default();
    for g in pool.items {
        if phi_probe(&gens, &g.expr, dy.class_k, cfg)?.is_pass() {
            out.items.push(g);
        }
    }
    Ok(out)
}

fn check_map(f: &[Expr], dx: &GeneratedDiffeology, dy: &GeneratedDiffeology) -> Result<()> {
    if f.len() != dy.ambient_dim() {
        return Err(Error::invalid(format!(
            "the map has {} components, Y lives in R^{}",
            f.len(),
            dy.ambient_dim()
        )));
    }
    if let Some(e) = f.iter().find(|e| e.arity() > dx.ambient_dim()) {
        return Err(Error::Arity {
            index: e.arity() - 1,
            available: dx.ambient_dim(),
        });
    }
    Ok(())
}

fn push_forward(f: &[Expr], p: &Plaque) -> Result<Plaque> {
    let exprs = f
        .iter()
        .map(|e| p.pull_back(e))
        .collect::<Result<Vec<_>>>()?;
    Plaque::new(format!("f∘{}", p.label), p.domain.clone(), exprs)
}

/// Maps between the bundled spaces: `(source, target, components)`.
pub const BUNDLED_MORPHISMS: [(&str, &str, &str); 10] = [
    ("r2", "r2", "x, y"),
    ("r2", "r2", "x^2, y"),
    ("r2", "r2", "abs(x), y"),
    ("r2", "cross", "x, 0"),
    ("cross", "r2", "x, y"),
    ("cross", "r2", "abs(x), y"),
    ("lines", "r2", "x, y"),
    ("r2", "lines", "x, y"),
    ("sphere_parallels", "sphere_parallels", "x, y, z"),
    ("point", "cross", "0, 0"),
];

pub fn morphism_probe(
    f: &[Expr],
    dx: &GeneratedDiffeology,
    dy: &GeneratedDiffeology,
    mode: MorphismMode,
    cfg: &ProbeConfig,
) -> Result<Verdict> {
    check_map(f, dx, dy)?;
    let plaques = dx.generator_plaques()?;
    match mode {
        MorphismMode::I => {
            let mut vs = Vec::new();
            for p in &plaques {
                let v =
                    membership_probe(dy, &FunctionFamily::default(), &push_forward(f, p)?, cfg)?;
                if v.is_fail() {
                    return Ok(v);
                }
                vs.push(v);
            }
            Ok(Verdict::all(vs))
        }
        MorphismMode::Ii => {
            let sample = smooth_functions_sample(dy, cfg)?;
            let mut vs = Vec::new();
            for g in &sample.items {
                let gf = g.expr.substitute(f)?;
                let v = phi_probe(&plaques, &gf, dx.class_k, cfg)?;
                if v.is_fail() {
                    let w = v.witness.unwrap_or_default().function(&g.label);
                    return Ok(Verdict::fail(w));
                }
                vs.push(v);
            }
            Ok(Verdict::all(vs))
        }
        MorphismMode::Iii => {
            let sample = smooth_functions_sample(dy, cfg)?;
            let mut diags = Vec::new();
            for p in &plaques {
                let fp = push_forward(f, p)?;
                for g in &sample.items {
                    let v = smoothness_probe(&fp.pull_back(&g.expr)?, &p.domain, dx.class_k, cfg)?;
                    match v.status {
                        Status::Pass => {}
                        Status::Fail => {
                            let w = v.witness.unwrap_or_default();
                            let w = Witness {
                                function: Some(g.label.clone()),
                                plaque: Some(p.label.clone()),
                                ..w
                            };
                            return Ok(Verdict::fail(w));
                        }
                        Status::Inconclusive => diags.extend(v.diagnostics),
                    }
                }
            }
            Ok(if diags.is_empty() {
                Verdict::pass()
            } else {
                Verdict::inconclusive(diags)
            })
        }
    }
}

/// All three modes, plus whether ii and iii agree.
pub fn morphism_report(
    f: &[Expr],
    dx: &GeneratedDiffeology,
    dy: &GeneratedDiffeology,
    cfg: &ProbeConfig,
) -> Result<MorphismReport> {
    let mode_i = morphism_probe(f, dx, dy, MorphismMode::I, cfg)?;
    let mode_ii = morphism_probe(f, dx, dy, MorphismMode::Ii, cfg)?;
    let mode_iii = morphism_probe(f, dx, dy, MorphismMode::Iii, cfg)?;
    let ii_iii_agree = mode_ii.status == mode_iii.status;
    Ok(MorphismReport {
        mode_i,
        mode_ii,
        mode_iii,
        ii_iii_agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_map(src: &str) -> Vec<Expr> {
        vec![crate::expr::parse(src, &["x".into()]).unwrap()]
    }

    #[test]
    fn square_and_abs_on_the_line() {
        let cfg = ProbeConfig::default();
        let dx = GeneratedDiffeology::euclidean(1, 1.0, 1);
        let dy = GeneratedDiffeology::euclidean(1, 4.0, 1);
        let r = morphism_report(&line_map("x^2"), &dx, &dy, &cfg).unwrap();
        assert!(
            r.mode_i.is_pass() && r.mode_ii.is_pass() && r.mode_iii.is_pass(),
            "{r:?}"
        );
        let r = morphism_report(&line_map("abs(x)"), &dx, &dy, &cfg).unwrap();
        assert!(
            r.mode_i.is_fail() && r.mode_ii.is_fail() && r.mode_iii.is_fail(),
            "{r:?}"
        );
        assert_eq!(r.mode_i.witness.unwrap().function.as_deref(), Some("x"));
        assert_eq!(r.mode_ii.witness.unwrap().function.as_deref(), Some("x"));
        assert!(r.ii_iii_agree);
    }
}
