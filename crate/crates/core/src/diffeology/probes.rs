//! The `Φ` and `Γ` oracles and the generated-diffeology membership probe.

use rayon::prelude::*;

use super::solve::{fit_reparam, preimages};
use super::{FunctionFamily, GeneratedDiffeology, Plaque};
use crate::config::ProbeConfig;
use crate::expr::Expr;
use crate::smooth::smoothness_probe;
use crate::verdict::{Diagnostic, Status, Verdict, Witness};
use crate::{Error, Result};

/// `f ∈ Φ(C)`: is `f ∘ p` of class `Cᵏ` for every `p ∈ C`?
pub fn phi_probe(curves: &[Plaque], f: &Expr, k: usize, cfg: &ProbeConfig) -> Result<Verdict> {
    let mut diagnostics = Vec::new();
    for p in curves {
        let v = smoothness_probe(&p.pull_back(f)?, &p.domain, k, cfg)?;
        match v.status {
            Status::Pass => {}
            Status::Fail => {
                let w = v.witness.unwrap_or_default().plaque(&p.label);
                return Ok(Verdict::fail(w));
            }
            Status::Inconclusive => {
                diagnostics.extend(v.diagnostics.into_iter().map(|d| tag(d, &p.label)));
            }
        }
    }
    Ok(if diagnostics.is_empty() {
        Verdict::pass()
    } else {
        Verdict::inconclusive(diagnostics)
    })
}

/// `p ∈ Γ(F)`: is `f ∘ p` of class `Cᵏ` for every `f ∈ F`?
pub fn gamma_probe(
    family: &FunctionFamily,
    p: &Plaque,
    k: usize,
    cfg: &ProbeConfig,
) -> Result<Verdict> {
    let mut diagnostics = Vec::new();
    for f in &family.items {
        let v = smoothness_probe(&p.pull_back(&f.expr)?, &p.domain, k, cfg)?;
        match v.status {
            Status::Pass => {}
            Status::Fail => {
                let w = v
                    .witness
                    .unwrap_or_default()
                    .function(&f.label)
                    .plaque(&p.label);
                return Ok(Verdict::fail(w));
            }
            Status::Inconclusive => {
                diagnostics.extend(v.diagnostics.into_iter().map(|d| tag(d, &f.label)));
            }
        }
    }
    Ok(if diagnostics.is_empty() {
        Verdict::pass()
    } else {
        Verdict::inconclusive(diagnostics)
    })
}

fn tag(mut d: Diagnostic, label: &str) -> Diagnostic {
    d.label = format!("{label}: {}", d.label);
    d
}

pub(crate) fn membership_grid(p: &Plaque, cfg: &ProbeConfig) -> Vec<Vec<f64>> {
    let g = match p.dim() {
        1 => cfg.grid,
        2 => cfg.grid.min(5),
        _ => 3,
    };
    p.domain.grid(g)
}

/// Searches a local factorization `p = p₀ ∘ φ` at `r`; returns the
/// generator label on success.
pub(crate) fn factor_at(
    d: &GeneratedDiffeology,
    p: &Plaque,
    r: &[f64],
    y: &[f64],
    seed: u64,
) -> Result<Option<String>> {
    for g in &d.generators {
        for pre in preimages(g, y, d.space.eps_pt, seed) {
            let p0 = pre.plaque(g)?;
            if fit_reparam(p, r, &p0, &pre.u, &d.library, d.space.eps_pt).is_some() {
                return Ok(Some(p0.label));
            }
        }
    }
    Ok(None)
}

/// Functions of the pool (then `extra`) that pass `phi_probe` against the
/// generators. A failing extra witness is an error; an inconclusive one
/// is skipped and reported.
pub(crate) fn validated_witnesses(
    d: &GeneratedDiffeology,
    extra: &FunctionFamily,
    cfg: &ProbeConfig,
) -> Result<(FunctionFamily, Vec<Diagnostic>)> {
    let gens = d.generator_plaques()?;
    let pool = d.witness_pool();
    let mut ok = FunctionFamily::default();
    let mut skipped = Vec::new();
    for (f, is_extra) in pool
        .items
        .iter()
        .map(|f| (f, false))
        .chain(extra.items.iter().map(|f| (f, true)))
    {
        let v = phi_probe(&gens, &f.expr, d.class_k, cfg)?;
        match v.status {
            Status::Pass => ok.items.push(f.clone()),
            Status::Fail if is_extra => {
                return Err(Error::InvalidWitness {
                    label: f.label.clone(),
                });
            }
            _ => skipped.push(Diagnostic::new(
                format!("witness `{}` not in Φ(P₀), skipped", f.label),
                vec![],
            )),
        }
    }
    Ok((ok, skipped))
}

/// Is `p` a plaque of the diffeology generated by `d`?
///
/// PASS when every sample point of the domain has a local factorization
/// through a generator over the reparametrization library; FAIL when a
/// validated function of `Φ(P₀)` pulls back to a non-smooth function;
/// INCONCLUSIVE otherwise.
pub fn membership_probe(
    d: &GeneratedDiffeology,
    extra: &FunctionFamily,
    p: &Plaque,
    cfg: &ProbeConfig,
) -> Result<Verdict> {
    let m = d.ambient_dim();
    if p.ambient() != m {
        return Err(Error::invalid(format!(
            "plaque `{}` has {} components, the space lives in R^{m}",
            p.label,
            p.ambient()
        )));
    }
    let grid = membership_grid(p, cfg);
    let mut images = Vec::with_capacity(grid.len());
    for r in &grid {
        let y = p.eval(r)?;
        if !d.space.contains(&y)? {
            return Ok(Verdict::fail(
                Witness::note("the plaque leaves the space")
                    .at(r)
                    .plaque(&p.label)
                    .value("image_distance", constraint_gap(d, &y)?),
            ));
        }
        images.push(y);
    }
    // Invalid extra witnesses are reported before any search.
    let (witnesses, skipped) = validated_witnesses(d, extra, cfg)?;

    let found: Vec<Result<Option<String>>> = grid
        .par_iter()
        .zip(&images)
        .enumerate()
        .map(|(i, (r, y))| factor_at(d, p, r, y, cfg.seed.wrapping_add(0x4d00 + i as u64)))
        .collect();
    let mut missing = Vec::new();
    for (r, f) in grid.iter().zip(found) {
        if f?.is_none() {
            missing.push(r.clone());
        }
    }
    if missing.is_empty() {
        return Ok(Verdict::pass());
    }

    for f in &witnesses.items {
        let v = smoothness_probe(&p.pull_back(&f.expr)?, &p.domain, d.class_k, cfg)?;
        if v.is_fail() {
            let w = v
                .witness
                .unwrap_or_default()
                .function(&f.label)
                .plaque(&p.label);
            let w = Witness {
                note: format!(
                    "`{}` is in Φ(P₀) but its pull-back is not C^{}",
                    f.label, d.class_k
                ),
                ..w
            };
            return Ok(Verdict::fail(w));
        }
    }
    let mut diags: Vec<Diagnostic> = missing
        .into_iter()
        .map(|r| Diagnostic::new("no factorization through a generator at r", r))
        .collect();
    diags.extend(skipped);
    Ok(Verdict::inconclusive(diags))
}

fn constraint_gap(d: &GeneratedDiffeology, y: &[f64]) -> Result<f64> {
    let mut gap = 0.0f64;
    for c in &d.space.constraints {
        gap = gap.max(c.g.eval(y)?.abs());
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffeology::{Generator, ModelSpace};
    use crate::smooth::BoxDomain;

    fn cross() -> GeneratedDiffeology {
        let space = ModelSpace {
            ambient_dim: 2,
            constraints: vec![crate::diffeology::Constraint::parse("x*y = 0", 2).unwrap()],
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

    fn e(src: &str) -> Expr {
        crate::expr::parse(src, &["x".into(), "y".into()]).unwrap()
    }

    #[test]
    fn phi_examples() {
        let cfg = ProbeConfig::default();
        let xaxis = vec![Plaque::parse("x-axis", BoxDomain::cube(1, 1.0), &["t", "0"]).unwrap()];
        assert!(phi_probe(&xaxis, &e("3"), 1, &cfg).unwrap().is_pass());
        let v = phi_probe(&xaxis, &e("abs(x)"), 1, &cfg).unwrap();
        assert!(v.is_fail());
        assert_eq!(v.witness.unwrap().plaque.as_deref(), Some("x-axis"));
        let axes = cross().generator_plaques().unwrap();
        assert!(phi_probe(&axes, &e("sqrt(abs(x*y))"), 1, &cfg)
            .unwrap()
            .is_pass());
    }

    #[test]
    fn gamma_examples() {
        let cfg = ProbeConfig::default();
        let coords = FunctionFamily::coordinates(2);
        let circle =
            Plaque::parse("circle", BoxDomain::cube(1, 1.0), &["cos(t)", "sin(t)"]).unwrap();
        assert!(gamma_probe(&coords, &circle, 2, &cfg).unwrap().is_pass());
        let kinked = Plaque::parse("k", BoxDomain::cube(1, 1.0), &["t", "abs(t)"]).unwrap();
        let v = gamma_probe(&coords, &kinked, 1, &cfg).unwrap();
        assert_eq!(v.witness.unwrap().function.as_deref(), Some("y"));
        assert!(gamma_probe(&FunctionFamily::default(), &kinked, 1, &cfg)
            .unwrap()
            .is_pass());
    }

    #[test]
    fn membership_examples() {
        let cfg = ProbeConfig::default();
        let d = cross();
        let affine = Plaque::parse("affine", BoxDomain::cube(1, 0.5), &["2*t + 1", "0"]).unwrap();
        assert!(
            membership_probe(&d, &FunctionFamily::default(), &affine, &cfg)
                .unwrap()
                .is_pass()
        );
        let kinked =
            Plaque::parse("kinked", BoxDomain::cube(1, 1.0), &["-relu(-t)", "relu(t)"]).unwrap();
        let v = membership_probe(&d, &FunctionFamily::default(), &kinked, &cfg).unwrap();
        assert!(v.is_fail(), "{v:?}");
        assert_eq!(v.witness.unwrap().function.as_deref(), Some("x"));
        let bad = FunctionFamily::parse(2, &[("abs", "abs(x)")]).unwrap();
        assert_eq!(
            membership_probe(&d, &bad, &affine, &cfg),
            Err(Error::InvalidWitness {
                label: "abs".into()
            })
        );
    }
}
