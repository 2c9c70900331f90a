//! The δ^k divided differences.
//!
//! `δ⁰f(t₀) = f(t₀)` and
//!
//! ```text
//! δᵏf(t₀,…,t_k) = k/(t₀ − t_k) · (δᵏ⁻¹f(t₀,…,t_{k−1}) − δᵏ⁻¹f(t₁,…,t_k))
//! ```
//!
//! which is `k!` times the classical Newton divided difference. A function
//! is `Lipᵏ` near a point when `δᵏ⁺¹` stays bounded on node tuples shrinking
//! to it; [`delta_bound`] measures that across three scales.

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::expr::Expr;
use crate::jet::factorial;
use crate::{Error, Result};

/// Pairwise distinct nodes `t₀ … t_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeTuple(Vec<f64>);

impl NodeTuple {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid("a node tuple needs at least one node"));
        }
        if let Some(bad) = nodes.iter().position(|t| !t.is_finite()) {
            return Err(Error::invalid(format!("node {bad} is not finite")));
        }
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                if nodes[i] == nodes[j] {
                    return Err(Error::CoincidentNodes { i, j });
                }
            }
        }
        Ok(NodeTuple(nodes))
    }

    /// `k`, one less than the number of nodes.
    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.0
    }
}

impl<'de> Deserialize<'de> for NodeTuple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        NodeTuple::new(v).map_err(serde::de::Error::custom)
    }
}

/// The δ recursion over any field, given `values[i] = f(nodes[i])`.
///
/// Works on `f64` and on exact rationals alike; distinctness is the caller's
/// business (see [`NodeTuple`]).
pub fn delta_table<T>(values: &[T], nodes: &[T]) -> T
where
    T: Clone + Num + FromPrimitive,
{
    assert_eq!(values.len(), nodes.len());
    assert!(!values.is_empty());
    let n = values.len();
    let mut row: Vec<T> = values.to_vec();
    for m in 1..n {
        let km = T::from_usize(m).expect("order fits the field");
        row = (0..n - m)
            .map(|i| {
                let num = row[i].clone() - row[i + 1].clone();
                km.clone() * num / (nodes[i].clone() - nodes[i + m].clone())
            })
            .collect();
    }
    row.swap_remove(0)
}

/// `δᵏf` at the given nodes for a function of one variable (`Var(0)`).
pub fn delta_k(f: &Expr, nodes: &NodeTuple) -> Result<f64> {
    if f.arity() > 1 {
        return Err(Error::Arity {
            index: f.arity() - 1,
            available: 1,
        });
    }
    let values = nodes
        .nodes()
        .iter()
        .map(|&t| f.eval(&[t]).map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;
    Ok(delta_table(&values, nodes.nodes()))
}

/// Outcome of a three-scale δ boundedness measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaBound {
    /// Largest `|δᵐ|` over the node families at each scale.
    pub values: [f64; 3],
    /// The scales `H, H/4, H/16`.
    pub scales: [f64; 3],
    /// Rounding floor at the finest scale.
    pub floor: f64,
    pub class: BoundClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundClass {
    Bounded,
    Divergent,
    Unclear,
}

impl DeltaBound {
    /// Size of the jump in the `(m−1)`-th derivative suggested by a
    /// divergent `δᵐ`: `δᵐ ≈ (m−1)!·J/H` near a jump `J`.
    pub fn jump(&self, m: usize) -> f64 {
        self.values[2] * self.scales[2] / factorial(m.saturating_sub(1))
    }
}

/// Measures `δᵐ g` on tuples clustered at `t`, at scales `H, H/4, H/16`.
///
/// Two node families are used at each scale: an equispaced one containing
/// `t` itself and one shifted by `0.3·H`, so that a kink sitting exactly on a
/// node and one sitting between nodes are both seen.
pub fn delta_bound<G>(g: &G, t: f64, m: usize, h: f64) -> Result<DeltaBound>
where
    G: Fn(f64) -> Result<f64>,
{
    let scales = [h, h / 4.0, h / 16.0];
    let mut values = [0.0f64; 3];
    let mut floor = 0.0f64;
    let mid = (m / 2) as f64;
    for (slot, &hs) in values.iter_mut().zip(&scales) {
        for shift in [0.0, 0.3] {
            let nodes: Vec<f64> = (0..=m).map(|i| t + (i as f64 - mid + shift) * hs).collect();
            let vals = nodes.iter().map(|&x| g(x)).collect::<Result<Vec<_>>>()?;
            let d = delta_table(&vals, &nodes).abs();
            *slot = slot.max(d);
            if hs == scales[2] {
                floor = floor.max(rounding_floor(&vals, &nodes, m));
            }
        }
    }
    let [v1, v2, v3] = values;
    let class = if v3 <= 1.25 * v1.max(v2) + 10.0 * floor {
        BoundClass::Bounded
    } else if v3 > 100.0 * floor && v2 >= 2.5 * v1 && v3 >= 2.5 * v2 {
        BoundClass::Divergent
    } else {
        BoundClass::Unclear
    };
    Ok(DeltaBound {
        values,
        scales,
        floor,
        class,
    })
}

/// `eps · Σ |w_i f(t_i)|` with `w_i = m!/Π_{j≠i}(t_i − t_j)`, the weights of
/// the explicit form of `δᵐ`.
fn rounding_floor(vals: &[f64], nodes: &[f64], m: usize) -> f64 {
    let fm = factorial(m);
    let s: f64 = (0..nodes.len())
        .map(|i| {
            let prod: f64 = (0..nodes.len())
                .filter(|&j| j != i)
                .map(|j| nodes[i] - nodes[j])
                .product();
            (fm / prod * vals[i]).abs()
        })
        .sum();
    8.0 * f64::EPSILON * s
}
