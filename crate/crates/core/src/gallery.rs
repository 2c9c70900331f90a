//! Catalog of counterexample functions with scripted checks.
//!
//! Each claim names a recipe built from the probes of this crate and the
//! verdict the recipe is expected to return. [`verify_claim`] reports the
//! observed verdict; [`run_gallery`] compares it with the expectation and
//! never hides a mismatch.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ProbeConfig;
use crate::directional::directional_derivative;
use crate::expr::{ambient_names, param_names, parse, Expr};
use crate::smooth::{smoothness_probe, BoxDomain};
use crate::verdict::{Diagnostic, Status, Verdict, Witness};
use crate::{Error, Result};

/// The catalog shipped with the crate.
pub const BUILTIN_CATALOG: &str = include_str!("../data/gallery.json");

pub const GALLERY_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gallery {
    pub schema_version: u32,
    #[serde(default)]
    pub entries: Vec<GalleryEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GalleryEntry {
    pub name: String,
    /// Source text in the variables `x, y` (or `x, y, z`, `x1 …`).
    pub expr: String,
    #[serde(default = "two")]
    pub ambient_dim: usize,
    #[serde(default)]
    pub claims: Vec<Claim>,
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Claim {
    pub id: String,
    pub expected: Status,
    /// The expectation is the measured outcome and departs from the
    /// classical reading of the example.
    #[serde(default)]
    pub disputed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    pub recipe: Recipe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionCase {
    pub direction: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Recipe {
    /// `df(x, v)` exists and equals the listed value for every case.
    DirectionalValues {
        point: Vec<f64>,
        cases: Vec<DirectionCase>,
        tol: f64,
    },
    /// `f ∘ c` equals `value` at every sample while `f(base)` does not.
    CurveValues {
        curve: Vec<String>,
        range: [f64; 2],
        samples: usize,
        value: f64,
        base: Vec<f64>,
        tol: f64,
    },
    /// `df(x, u+v) − df(x, u) − df(x, v) = defect`.
    AdditivityDefect {
        point: Vec<f64>,
        u: Vec<f64>,
        v: Vec<f64>,
        defect: f64,
        tol: f64,
    },
    /// `df(x, c·v) = c·df(x, v)` for every listed `c > 0`.
    Homogeneity {
        point: Vec<f64>,
        directions: Vec<Vec<f64>>,
        scales: Vec<f64>,
        tol: f64,
    },
    /// The smoothness probe of class `k` on a box `[lo, hi]`.
    Smoothness { domain: [Vec<f64>; 2], k: usize },
}

impl Gallery {
    pub fn builtin() -> Gallery {
        Gallery::from_json(BUILTIN_CATALOG).expect("shipped catalog is valid")
    }

    pub fn from_json(src: &str) -> Result<Gallery> {
        let g: Gallery = serde_json::from_str(src).map_err(|e| Error::Schema(e.to_string()))?;
        if g.schema_version != GALLERY_SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "gallery schema_version {} (expected {GALLERY_SCHEMA_VERSION})",
                g.schema_version
            )));
        }
        for e in &g.entries {
            e.parsed()
                .map_err(|err| Error::Schema(format!("entry `{}`: {err}", e.name)))?;
        }
        Ok(g)
    }

    pub fn entry(&self, name: &str) -> Result<&GalleryEntry> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::UnknownEntry(name.to_string()))
    }
}

impl GalleryEntry {
    pub fn parsed(&self) -> Result<Expr> {
        Ok(parse(&self.expr, &ambient_names(self.ambient_dim))?)
    }

    pub fn claim(&self, id: &str) -> Result<&Claim> {
        self.claims
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| Error::UnknownClaim {
                entry: self.name.clone(),
                claim: id.to_string(),
            })
    }
}

fn dd(e: &Expr, x: &[f64], v: &[f64]) -> Result<f64> {
    directional_derivative(e, x, &[v.to_vec()])
}

/// Runs one recipe on `e`.
pub fn run_recipe(e: &Expr, recipe: &Recipe, cfg: &ProbeConfig) -> Result<Verdict> {
    match recipe {
        Recipe::DirectionalValues { point, cases, tol } => {
            let mut measured = Vec::with_capacity(cases.len());
            for c in cases {
                let d = match dd(e, point, &c.direction) {
                    Ok(d) => d,
                    Err(Error::NotDifferentiable(msg)) | Err(Error::Kink(msg)) => {
                        return Ok(Verdict::fail(
                            Witness::note(msg).at(point).along(&c.direction),
                        ));
                    }
                    Err(err) => return Err(err),
                };
                if (d - c.value).abs() > *tol {
                    return Ok(Verdict::fail(
                        Witness::note("directional derivative differs from the closed form")
                            .at(point)
                            .along(&c.direction)
                            .value("measured", d)
                            .value("expected", c.value),
                    ));
                }
                measured.push(d);
            }
            Ok(Verdict::pass()
                .with_diagnostic(Diagnostic::new("directional derivatives", measured)))
        }
        Recipe::CurveValues {
            curve,
            range,
            samples,
            value,
            base,
            tol,
        } => {
            let names = param_names(1);
            let comps = curve
                .iter()
                .map(|s| parse(s, &names).map_err(Error::from))
                .collect::<Result<Vec<_>>>()?;
            let at_base = e.eval(base)?;
            if (at_base - value).abs() <= *tol {
                return Ok(Verdict::fail(
                    Witness::note("the value at the base point equals the curve value")
                        .at(base)
                        .value("f(base)", at_base),
                ));
            }
            let n = (*samples).max(2);
            let mut vals = Vec::with_capacity(n);
            for i in 0..n {
                let t = range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64;
                if t == 0.0 {
                    continue;
                }
                let x = comps
                    .iter()
                    .map(|c| c.eval(&[t]))
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                let fx = e.eval(&x)?;
                if (fx - value).abs() > *tol {
                    return Ok(Verdict::fail(
                        Witness::note("curve value differs")
                            .at(&x)
                            .value("t", t)
                            .value("measured", fx)
                            .value("expected", *value),
                    ));
                }
                vals.push(fx);
            }
            Ok(Verdict::pass()
                .with_diagnostic(Diagnostic::new("f(base)", vec![at_base]))
                .with_diagnostic(Diagnostic::new("values along the curve", vals)))
        }
        Recipe::AdditivityDefect {
            point,
            u,
            v,
            defect,
            tol,
        } => {
            let uv: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + b).collect();
            let (du, dv, duv) = (dd(e, point, u)?, dd(e, point, v)?, dd(e, point, &uv)?);
            let measured = duv - du - dv;
            let diag =
                Diagnostic::new("df(u), df(v), df(u+v), defect", vec![du, dv, duv, measured]);
            if (measured - defect).abs() <= *tol {
                Ok(Verdict::pass().with_diagnostic(diag))
            } else {
                Ok(Verdict::fail(
                    Witness::note("additivity defect differs")
                        .at(point)
                        .along(&uv)
                        .value("measured", measured)
                        .value("expected", *defect),
                )
                .with_diagnostic(diag))
            }
        }
        Recipe::Homogeneity {
            point,
            directions,
            scales,
            tol,
        } => {
            for v in directions {
                let d = dd(e, point, v)?;
                for &c in scales {
                    let cv: Vec<f64> = v.iter().map(|x| c * x).collect();
                    let dc = dd(e, point, &cv)?;
                    if (dc - c * d).abs() > tol * (c * d).abs().max(1.0) {
                        return Ok(Verdict::fail(
                            Witness::note("df(x, c v) differs from c df(x, v)")
                                .at(point)
                                .along(v)
                                .value("c", c)
                                .value("df(cv)", dc)
                                .value("c df(v)", c * d),
                        ));
                    }
                }
            }
            Ok(Verdict::pass())
        }
        Recipe::Smoothness { domain, k } => {
            let dom = BoxDomain::new(domain[0].clone(), domain[1].clone())?;
            smoothness_probe(e, &dom, *k, cfg)
        }
    }
}

/// Observed verdict of one claim.
pub fn verify_claim(
    gallery: &Gallery,
    entry: &str,
    claim: &str,
    cfg: &ProbeConfig,
) -> Result<Verdict> {
    let en = gallery.entry(entry)?;
    let cl = en.claim(claim)?;
    run_recipe(&en.parsed()?, &cl.recipe, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub entry: String,
    pub claim: String,
    pub expected: Status,
    pub observed: Verdict,
    pub met: bool,
    pub disputed: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryReport {
    pub records: Vec<ClaimRecord>,
    pub all_met: bool,
}

/// Runs every claim (in parallel) and compares with the expectations.
/// A recipe error is recorded as an unmet INCONCLUSIVE.
pub fn run_gallery(gallery: &Gallery, cfg: &ProbeConfig) -> Result<GalleryReport> {
    let jobs: Vec<(&GalleryEntry, &Claim)> = gallery
        .entries
        .iter()
        .flat_map(|e| e.claims.iter().map(move |c| (e, c)))
        .collect();
    let records = jobs
        .par_iter()
        .map(|(e, c)| {
            let observed = match run_recipe(&e.parsed()?, &c.recipe, cfg) {
                Ok(v) => v,
                Err(err) => Verdict::inconclusive(vec![Diagnostic::new(
                    format!("recipe error: {err}"),
                    vec![],
                )]),
            };
            Ok(ClaimRecord {
                entry: e.name.clone(),
                claim: c.id.clone(),
                expected: c.expected,
                met: observed.status == c.expected,
                observed,
                disputed: c.disputed,
                note: c.note.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_met = records.iter().all(|r| r.met);
    Ok(GalleryReport { records, all_met })
}
