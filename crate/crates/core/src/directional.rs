//! Iterated Gateaux derivatives `dᵏf(x; v₁,…,v_k)`.
//!
//! The recursion `dᵏf(x; v₁…v_k) = d(dᵏ⁻¹f(·; v₁…v_{k−1}))(x; v_k)` is
//! followed literally: the inner derivatives are symbolic, the outermost one
//! is the first Taylor coefficient along the line `x + t·v_k`, and that value
//! is cross-checked against the finite-difference oracle (Richardson, or for
//! functions that are only `C¹` along the line, converging quotients).

use crate::expr::Expr;
use crate::fd::{default_step, fd_jet, slope_converges};
use crate::jet::{taylor_eval, PolyPath, K_MAX};
use crate::{Error, Result};

/// Agreement demanded between the exact slope and the oracle.
const CROSS_CHECK: f64 = 1e-6;

pub fn directional_derivative(e: &Expr, x: &[f64], dirs: &[Vec<f64>]) -> Result<f64> {
    let k = dirs.len();
    if k == 0 {
        return Ok(e.eval(x)?);
    }
    if k > K_MAX {
        return Err(Error::OrderTooHigh {
            requested: k,
            max: K_MAX,
        });
    }
    for v in dirs {
        if v.len() != x.len() {
            return Err(Error::invalid(format!(
                "direction has {} components, point has {}",
                v.len(),
                x.len()
            )));
        }
    }
    let mut d = e.clone();
    for v in &dirs[..k - 1] {
        d = d.directional(v)?;
    }
    let line = PolyPath::line(x, &dirs[k - 1]);
    let not_diff = |what: &str, err: Error| {
        Error::NotDifferentiable(format!("{what} along {:?} at {x:?}: {err}", dirs[k - 1]))
    };
    let exact = match taylor_eval(&d, &line, 1) {
        Ok(j) => j.coeffs[1],
        Err(err @ Error::Domain(_)) if d.eval(x).is_err() => return Err(err),
        Err(err) => return Err(not_diff("no exact limit", err)),
    };
    let h = default_step(x);
    let oracle = fd_jet(&d, &line, 1, h).map_err(|err| not_diff("oracle", err))?;
    let gap = (oracle.coeffs[1] - exact).abs();
    let agrees = oracle.reliable[1] && gap <= CROSS_CHECK * exact.abs().max(1.0);
    let g = |s: f64| Ok(d.eval(&line.eval(s))?);
    if !agrees && !slope_converges(&g, exact, h).map_err(|err| not_diff("oracle", err))? {
        return Err(Error::NotDifferentiable(format!(
            "oracle disagrees along {:?} at {x:?}: exact {exact}, finite differences {} (error {:e})",
            dirs[k - 1], oracle.coeffs[1], oracle.errors[1]
        )));
    }
    Ok(exact)
}
