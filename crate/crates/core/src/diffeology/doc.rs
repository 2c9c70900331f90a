//! The JSON space-definition document.

use serde::{Deserialize, Serialize};

use super::{
    Constraint, FamilyParam, FunctionFamily, GeneratedDiffeology, Generator, LabeledFn, ModelSpace,
    ReparamLibrary,
};
use crate::expr::{ambient_names, param_names, parse};
use crate::smooth::BoxDomain;
use crate::{Error, Result};

pub const SPACE_SCHEMA_VERSION: u32 = 1;

fn default_eps_pt() -> f64 {
    1e-9
}

fn default_class_k() -> usize {
    1
}

fn default_samples() -> usize {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub ambient_dim: usize,
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(default = "default_eps_pt")]
    pub eps_pt: f64,
    #[serde(default = "default_class_k")]
    pub class_k: usize,
    pub generators: Vec<GeneratorDoc>,
    #[serde(default)]
    pub witnesses: Vec<FunctionDoc>,
    #[serde(default)]
    pub reparam_library: ReparamLibrary,
    #[serde(default)]
    pub sample_points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDoc {
    pub label: String,
    pub domain_box: BoxDomain,
    pub exprs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyDoc>,
}

/// A family index appended after the plaque parameters, ranging over the
/// closed interval `range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub name: String,
    pub range: [f64; 2],
    #[serde(default = "default_samples")]
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDoc {
    pub label: String,
    pub expr: String,
}

fn schema(msg: impl std::fmt::Display) -> Error {
    Error::Schema(msg.to_string())
}

impl SpaceDoc {
    pub fn from_json(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(schema)
    }

    /// Builds and validates the diffeology.
    pub fn build(&self) -> Result<GeneratedDiffeology> {
        if self.schema_version != SPACE_SCHEMA_VERSION {
            return Err(schema(format!(
                "unsupported schema_version {} (expected {SPACE_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let m = self.ambient_dim;
        if m == 0 {
            return Err(schema("ambient_dim must be positive"));
        }
        if !(self.eps_pt > 0.0 && self.eps_pt.is_finite()) {
            return Err(schema("eps_pt must be positive"));
        }
        if self.reparam_library.degree == 0
            || self.reparam_library.degree > 3
            || self.reparam_library.coeff_bound <= 0.0
        {
            return Err(schema(
                "reparam_library needs 1 <= degree <= 3 and a positive coeff_bound",
            ));
        }
        let constraints = self
            .constraints
            .iter()
            .map(|c| Constraint::parse(c, m).map_err(|e| schema(format!("constraint `{c}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let generators = self
            .generators
            .iter()
            .map(|g| g.build())
            .collect::<Result<Vec<_>>>()?;
        let names = ambient_names(m);
        let witnesses = FunctionFamily::new(
            self.witnesses
                .iter()
                .map(|w| {
                    Ok(LabeledFn {
                        label: w.label.clone(),
                        expr: parse(&w.expr, &names)
                            .map_err(|e| schema(format!("witness `{}`: {e}", w.label)))?,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        );
        let d = GeneratedDiffeology {
            name: self.name.clone(),
            space: ModelSpace {
                ambient_dim: m,
                constraints,
                eps_pt: self.eps_pt,
            },
            generators,
            class_k: self.class_k,
            library: self.reparam_library,
            witnesses,
            sample_points: self.sample_points.clone(),
        };
        d.validate().map_err(|e| match e {
            Error::Schema(_) => e,
            other => schema(other),
        })?;
        Ok(d)
    }
}

impl GeneratorDoc {
    fn build(&self) -> Result<Generator> {
        let n = self.domain_box.dim();
        let mut names = param_names(n);
        let family = match &self.family {
            None => None,
            Some(f) => {
                let [lo, hi] = f.range;
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(schema(format!(
                        "family range of `{}` is not an interval",
                        self.label
                    )));
                }
                if names.contains(&f.name) {
                    return Err(schema(format!(
                        "family name `{}` clashes with a parameter",
                        f.name
                    )));
                }
                names.push(f.name.clone());
                Some(FamilyParam {
                    name: f.name.clone(),
                    lo,
                    hi,
                    samples: f.samples.max(1),
                })
            }
        };
        let exprs = self
            .exprs
            .iter()
            .map(|s| {
                parse(s, &names)
                    .map_err(|e| schema(format!("generator `{}`, `{s}`: {e}", self.label)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Generator {
            label: self.label.clone(),
            domain: self.domain_box.clone(),
            exprs,
            family,
        })
    }
}

impl std::str::FromStr for GeneratedDiffeology {
    type Err = Error;

    fn from_str(src: &str) -> Result<Self> {
        SpaceDoc::from_json(src)?.build()
    }
}
