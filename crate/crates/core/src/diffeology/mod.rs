//! Spaces given by generating plaques or generating functions.
//!
//! A [`ModelSpace`] is a subset of `R^m` cut out by equations and
//! inequalities. A [`GeneratedDiffeology`] adds a finite family of generating
//! plaques `P₀`; its plaques are (locally) the maps `p₀ ∘ φ` with `φ` smooth.
//! Membership of an arbitrary plaque is probed by searching a bounded library
//! of polynomial reparametrizations, and refuted with functions from
//! `Φ(P₀)`. Neither `Φ` nor `Γ` is ever materialized: both are oracles over
//! finite families.

mod doc;
mod functor;
mod morphism;
mod probes;
pub(crate) mod solve;

use serde::{Deserialize, Serialize};

use crate::expr::{ambient_names, param_names, parse, Expr};
use crate::smooth::BoxDomain;
use crate::{Error, Result};

pub use doc::{FamilyDoc, FunctionDoc, GeneratorDoc, SpaceDoc, SPACE_SCHEMA_VERSION};
pub use functor::{battery, psi, round_trip, upsilon, MStructure, PsiDiffeology, RoundTrip};
pub use morphism::{
    morphism_probe, morphism_report, smooth_functions_sample, MorphismMode, MorphismReport,
    BUNDLED_MORPHISMS,
};
pub use probes::{gamma_probe, membership_probe, phi_probe};
pub use solve::{preimages, Preimage};

/// Space definitions shipped with the crate, by name.
pub const BUNDLED_SPACES: [(&str, &str); 5] = [
    ("r2", include_str!("../../data/spaces/r2.json")),
    ("cross", include_str!("../../data/spaces/cross.json")),
    ("lines", include_str!("../../data/spaces/lines.json")),
    (
        "sphere_parallels",
        include_str!("../../data/spaces/sphere_parallels.json"),
    ),
    ("point", include_str!("../../data/spaces/point.json")),
];

/// Loads a bundled space.
pub fn bundled(name: &str) -> Result<GeneratedDiffeology> {
    let (_, src) = BUNDLED_SPACES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::invalid(format!("no bundled space `{name}`")))?;
    src.parse()
}

/// A map from an open box in `R^n` into `R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plaque {
    pub label: String,
    pub domain: BoxDomain,
    pub exprs: Vec<Expr>,
}

impl Plaque {
    pub fn new(label: impl Into<String>, domain: BoxDomain, exprs: Vec<Expr>) -> Result<Self> {
        let n = domain.dim();
        for e in &exprs {
            if e.arity() > n {
                return Err(Error::Arity {
                    index: e.arity() - 1,
                    available: n,
                });
            }
        }
        if exprs.is_empty() {
            return Err(Error::invalid("a plaque needs at least one component"));
        }
        Ok(Plaque {
            label: label.into(),
            domain,
            exprs,
        })
    }

    /// Parses components written in the conventional parameter names
    /// (`t`; `r, s`; `u1 … un`).
    pub fn parse(label: impl Into<String>, domain: BoxDomain, srcs: &[&str]) -> Result<Self> {
        let names = param_names(domain.dim());
        let exprs = srcs
            .iter()
            .map(|s| parse(s, &names).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Plaque::new(label, domain, exprs)
    }

    /// `t ↦ base + t·dir` on `(-radius, radius)`.
    pub fn line(label: impl Into<String>, base: &[f64], dir: &[f64], radius: f64) -> Self {
        let exprs = base
            .iter()
            .zip(dir)
            .map(|(b, d)| Expr::Const(*b) + Expr::Const(*d) * Expr::Var(0))
            .collect();
        Plaque {
            label: label.into(),
            domain: BoxDomain::cube(1, radius),
            exprs,
        }
    }

    /// The constant plaque at `point` on `domain`.
    pub fn constant(label: impl Into<String>, point: &[f64], domain: BoxDomain) -> Self {
        Plaque {
            label: label.into(),
            domain,
            exprs: point.iter().map(|c| Expr::Const(*c)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn ambient(&self) -> usize {
        self.exprs.len()
    }

    pub fn eval(&self, r: &[f64]) -> Result<Vec<f64>> {
        self.exprs
            .iter()
            .map(|e| e.eval(r).map_err(Error::from))
            .collect()
    }

    /// `f ∘ p` as an expression in the plaque parameters.
    pub fn pull_back(&self, f: &Expr) -> Result<Expr> {
        f.substitute(&self.exprs)
    }

    /// `p ∘ φ` for `φ` given by expressions in the new parameters.
    pub fn precompose(
        &self,
        label: impl Into<String>,
        phi: &[Expr],
        domain: BoxDomain,
    ) -> Result<Plaque> {
        let exprs = self
            .exprs
            .iter()
            .map(|e| e.substitute(phi))
            .collect::<Result<Vec<_>>>()?;
        Plaque::new(label, domain, exprs)
    }

    /// Components rendered with the conventional parameter names.
    pub fn display(&self) -> Vec<String> {
        let names = param_names(self.dim());
        self.exprs
            .iter()
            .map(|e| e.display(&names).to_string())
            .collect()
    }
}

/// A labelled scalar function on the ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledFn {
    pub label: String,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FunctionFamily {
    pub items: Vec<LabeledFn>,
}

impl FunctionFamily {
    pub fn new(items: Vec<LabeledFn>) -> Self {
        FunctionFamily { items }
    }

    /// The coordinate functions of `R^m`, labelled by their names.
    pub fn coordinates(m: usize) -> Self {
        FunctionFamily {
            items: ambient_names(m)
                .into_iter()
                .enumerate()
                .map(|(i, label)| LabeledFn {
                    label,
                    expr: Expr::Var(i),
                })
                .collect(),
        }
    }

    /// Parses `(label, source)` pairs in the ambient names of `R^m`.
    pub fn parse(m: usize, items: &[(&str, &str)]) -> Result<Self> {
        let names = ambient_names(m);
        Ok(FunctionFamily {
            items: items
                .iter()
                .map(|(l, s)| {
                    Ok(LabeledFn {
                        label: l.to_string(),
                        expr: parse(s, &names)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.items.iter().map(|f| f.label.clone()).collect()
    }

    pub fn extend(&mut self, other: &FunctionFamily) {
        for f in &other.items {
            if !self.items.iter().any(|g| g.label == f.label) {
                self.items.push(f.clone());
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

/// `g(x) = 0`, `g(x) ≥ 0` or `g(x) ≤ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub source: String,
    pub g: Expr,
    pub relation: Relation,
}

impl Constraint {
    pub fn parse(src: &str, m: usize) -> Result<Self> {
        let names = ambient_names(m);
        let (lhs, rhs, relation) = if let Some((l, r)) = src.split_once(">=") {
            (l, r, Relation::Ge)
        } else if let Some((l, r)) = src.split_once("<=") {
            (l, r, Relation::Le)
        } else if let Some((l, r)) = src.split_once('=') {
            (l, r, Relation::Eq)
        } else {
            return Err(Error::Schema(format!(
                "constraint `{src}` has no =, >= or <="
            )));
        };
        let g = parse(lhs, &names)? - parse(rhs, &names)?;
        Ok(Constraint {
            source: src.to_string(),
            g,
            relation,
        })
    }

    pub fn holds(&self, x: &[f64], eps: f64) -> Result<bool> {
        let v = self.g.eval(x)?;
        let tol = eps * x.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        Ok(match self.relation {
            Relation::Eq => v.abs() <= tol,
            Relation::Ge => v >= -tol,
            Relation::Le => v <= tol,
        })
    }
}

/// An embedded subset of `R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpace {
    pub ambient_dim: usize,
    pub constraints: Vec<Constraint>,
    pub eps_pt: f64,
}

impl ModelSpace {
    pub fn euclidean(m: usize) -> Self {
        ModelSpace {
            ambient_dim: m,
            constraints: Vec::new(),
            eps_pt: 1e-9,
        }
    }

    /// No constraints: the carrier is the vector space `R^m` itself.
    pub fn is_vector_space(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.ambient_dim {
            return Ok(false);
        }
        for c in &self.constraints {
            if !c.holds(x, self.eps_pt)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn same_point(&self, a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len()
            && a.iter()
                .zip(b)
                .all(|(x, y)| (x - y).abs() <= self.eps_pt * x.abs().max(1.0))
    }
}

/// A one-parameter family index, e.g. the latitude of a parallel or the
/// angle of a line through the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyParam {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    /// Instances used when the family has to be enumerated.
    pub samples: usize,
}

impl FamilyParam {
    pub fn sample_values(&self) -> Vec<f64> {
        let n = self.samples.max(1);
        if n == 1 {
            return vec![0.5 * (self.lo + self.hi)];
        }
        (0..n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

/// A generating plaque, possibly indexed by a family parameter (which is
/// then the last variable of `exprs`).
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub label: String,
    pub domain: BoxDomain,
    pub exprs: Vec<Expr>,
    pub family: Option<FamilyParam>,
}

impl Generator {
    pub fn plaque(p: Plaque) -> Self {
        Generator {
            label: p.label,
            domain: p.domain,
            exprs: p.exprs,
            family: None,
        }
    }

    pub fn param_dim(&self) -> usize {
        self.domain.dim()
    }

    /// Parameters plus the family index, if any.
    pub fn solve_dim(&self) -> usize {
        self.param_dim() + usize::from(self.family.is_some())
    }

    /// Names of all variables of `exprs`.
    pub fn var_names(&self) -> Vec<String> {
        let mut names = param_names(self.param_dim());
        if let Some(f) = &self.family {
            names.push(f.name.clone());
        }
        names
    }

    pub fn instance(&self, a: Option<f64>) -> Result<Plaque> {
        match (&self.family, a) {
            (None, _) => Ok(Plaque {
                label: self.label.clone(),
                domain: self.domain.clone(),
                exprs: self.exprs.clone(),
            }),
            (Some(f), Some(a)) => {
                let n = self.param_dim();
                let mut subs: Vec<Expr> = (0..n).map(Expr::Var).collect();
                subs.push(Expr::Const(a));
                let exprs = self
                    .exprs
                    .iter()
                    .map(|e| e.substitute(&subs))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Plaque {
                    label: format!("{}[{}={}]", self.label, f.name, fmt_num(a)),
                    domain: self.domain.clone(),
                    exprs,
                })
            }
            (Some(f), None) => Err(Error::invalid(format!(
                "generator `{}` needs a value for `{}`",
                self.label, f.name
            ))),
        }
    }

    /// All sampled instances.
    pub fn instances(&self) -> Result<Vec<Plaque>> {
        match &self.family {
            None => Ok(vec![self.instance(None)?]),
            Some(f) => f
                .sample_values()
                .into_iter()
                .map(|a| self.instance(Some(a)))
                .collect(),
        }
    }
}

pub fn fmt_num(a: f64) -> String {
    let s = format!("{a:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Bounded search space for reparametrizations `φ`: polynomial maps of
/// total degree `≤ degree` whose non-constant coefficients lie in
/// `[-coeff_bound, coeff_bound]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReparamLibrary {
    pub degree: usize,
    pub coeff_bound: f64,
}

impl Default for ReparamLibrary {
    fn default() -> Self {
        ReparamLibrary {
            degree: 3,
            coeff_bound: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDiffeology {
    pub name: String,
    pub space: ModelSpace,
    pub generators: Vec<Generator>,
    /// Smoothness class `k` of the plaques (`PMᵏ`).
    pub class_k: usize,
    pub library: ReparamLibrary,
    /// Named functions offered as refutation witnesses.
    pub witnesses: FunctionFamily,
    pub sample_points: Vec<Vec<f64>>,
}

impl GeneratedDiffeology {
    pub fn new(
        name: impl Into<String>,
        space: ModelSpace,
        generators: Vec<Generator>,
        class_k: usize,
    ) -> Self {
        GeneratedDiffeology {
            name: name.into(),
            space,
            generators,
            class_k,
            library: ReparamLibrary::default(),
            witnesses: FunctionFamily::default(),
            sample_points: Vec::new(),
        }
    }

    /// The standard diffeology of `R^m`, generated by the identity on
    /// `(-radius, radius)^m`.
    pub fn euclidean(m: usize, radius: f64, class_k: usize) -> Self {
        let domain = BoxDomain::cube(m, radius);
        let id =
            Plaque::new("identity", domain, (0..m).map(Expr::Var).collect()).expect("identity");
        GeneratedDiffeology::new(
            format!("R^{m}"),
            ModelSpace::euclidean(m),
            vec![Generator::plaque(id)],
            class_k,
        )
    }

    pub fn ambient_dim(&self) -> usize {
        self.space.ambient_dim
    }

    /// All generator instances (families enumerated at their samples).
    pub fn generator_plaques(&self) -> Result<Vec<Plaque>> {
        let mut out = Vec::new();
        for g in &self.generators {
            out.extend(g.instances()?);
        }
        Ok(out)
    }

    /// Coordinates plus declared witnesses.
    pub fn witness_pool(&self) -> FunctionFamily {
        let mut f = FunctionFamily::coordinates(self.ambient_dim());
        f.extend(&self.witnesses);
        f
    }

    /// Checks that generator images lie in the space on a sample grid and
    /// that the declared sample points are covered.
    pub fn validate(&self) -> Result<()> {
        let m = self.ambient_dim();
        if self.generators.is_empty() {
            return Err(Error::Schema(format!(
                "space `{}` has no generators",
                self.name
            )));
        }
        for g in &self.generators {
            if g.exprs.len() != m {
                return Err(Error::Schema(format!(
                    "generator `{}` has {} components, ambient dimension is {m}",
                    g.label,
                    g.exprs.len()
                )));
            }
            for p in g.instances()? {
                for r in p.domain.grid(5.min(if p.dim() > 2 { 3 } else { 5 })) {
                    let y = p.eval(&r)?;
                    if !self.space.contains(&y)? {
                        return Err(Error::Schema(format!(
                            "generator `{}` leaves the space at parameter {r:?} (image {y:?})",
                            p.label
                        )));
                    }
                }
            }
        }
        for x in &self.sample_points {
            if x.len() != m || !self.space.contains(x)? {
                return Err(Error::Schema(format!(
                    "sample point {x:?} is not in the space"
                )));
            }
            let covered = self
                .generators
                .iter()
                .any(|g| !preimages(g, x, self.space.eps_pt, 0).is_empty());
            if !covered {
                return Err(Error::Schema(format!(
                    "no generator reaches sample point {x:?}"
                )));
            }
        }
        Ok(())
    }
}
