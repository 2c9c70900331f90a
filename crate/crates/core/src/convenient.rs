//! Dual pairs `(R^m, X′)` as finite models of convenient vector spaces.
//!
//! A pair is separated when the functionals have full column rank; all the
//! weak notions here (derivative, integral, Mackey convergence, `Lipᵏ`)
//! only see a curve through its images `l ∘ c`, so non-separated pairs
//! supply the pathological side.

use serde::{Deserialize, Serialize};

use crate::config::ProbeConfig;
use crate::diffeology::{FunctionFamily, LabeledFn};
use crate::divided::{delta_bound, BoundClass};
use crate::expr::{parse, parse_list, Expr};
use crate::fd::{default_step, fd_jet, slope_converges};
use crate::jet::{taylor_eval, PolyPath};
use crate::linalg::{kernel_basis, min_norm_solve, spectrum};
use crate::verdict::{Diagnostic, Verdict, Witness};
use crate::{Error, Result};

/// Carrier `R^m` with functionals `l(x) = ⟨coeffs, x⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DualPairDoc", into = "DualPairDoc")]
pub struct DualPair {
    dim: usize,
    functionals: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DualPairDoc {
    dim: usize,
    functionals: Vec<Vec<f64>>,
}

impl TryFrom<DualPairDoc> for DualPair {
    type Error = Error;

    fn try_from(d: DualPairDoc) -> Result<Self> {
        DualPair::new(d.dim, d.functionals)
    }
}

impl From<DualPair> for DualPairDoc {
    fn from(p: DualPair) -> Self {
        DualPairDoc {
            dim: p.dim,
            functionals: p.functionals,
        }
    }
}

impl DualPair {
    pub fn new(dim: usize, functionals: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("carrier dimension must be positive"));
        }
        if functionals.is_empty() {
            return Err(Error::invalid("a dual pair needs at least one functional"));
        }
        for (i, l) in functionals.iter().enumerate() {
            if l.len() != dim {
                return Err(Error::invalid(format!(
                    "functional {i} has {} coefficients, expected {dim}",
                    l.len()
                )));
            }
            if l.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid(format!(
                    "functional {i} has a non-finite coefficient"
                )));
            }
        }
        Ok(DualPair { dim, functionals })
    }

    /// All coordinate functionals.
    pub fn full(dim: usize) -> Self {
        let functionals = (0..dim)
            .map(|i| (0..dim).map(|j| f64::from(u8::from(i == j))).collect())
            .collect();
        DualPair { dim, functionals }
    }

    /// Functionals written as linear expressions, e.g. `["x + y"]`.
    pub fn parse(dim: usize, srcs: &[&str]) -> Result<Self> {
        let names = crate::expr::ambient_names(dim);
        let mut rows = Vec::new();
        for s in srcs {
            let e = parse(s, &names)?;
            let origin = vec![0.0; dim];
            if e.eval(&origin)? != 0.0 {
                return Err(Error::invalid(format!("`{s}` is not linear")));
            }
            let row = (0..dim)
                .map(|i| {
                    let mut x = origin.clone();
                    x[i] = 1.0;
                    e.eval(&x).map_err(Error::from)
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        DualPair::new(dim, rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn functionals(&self) -> &[Vec<f64>] {
        &self.functionals
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.functionals
            .iter()
            .map(|l| l.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// The functionals as a function family labelled `l1 … lq`.
    pub fn functional_family(&self) -> FunctionFamily {
        FunctionFamily::new(
            self.functionals
                .iter()
                .enumerate()
                .map(|(i, l)| LabeledFn {
                    label: format!("l{}", i + 1),
                    expr: Expr::linear(l),
                })
                .collect(),
        )
    }

    pub fn rank(&self, cfg: &ProbeConfig) -> usize {
        spectrum(&self.functionals, self.dim, cfg.tau_rank).rank
    }
}

/// Do the functionals separate points?
pub fn separation_check(pair: &DualPair, cfg: &ProbeConfig) -> Verdict {
    let s = spectrum(&pair.functionals, pair.dim, cfg.tau_rank);
    if s.rank == pair.dim {
        return Verdict::pass()
            .with_diagnostic(Diagnostic::new("singular values", s.singular_values));
    }
    let kernel = kernel_basis(&pair.functionals, pair.dim, cfg.tau_rank);
    let v = kernel
        .first()
        .cloned()
        .unwrap_or_else(|| vec![0.0; pair.dim]);
    Verdict::fail(
        Witness::note(format!(
            "rank {} < {}: every functional vanishes on v",
            s.rank, pair.dim
        ))
        .along(&v)
        .value("rank", s.rank as f64),
    )
    .with_diagnostic(Diagnostic::new("singular values", s.singular_values))
}

/// A curve `t ↦ (c₁(t), …, c_m(t))` on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    pub exprs: Vec<Expr>,
    pub lo: f64,
    pub hi: f64,
}

impl SampledCurve {
    pub fn new(exprs: Vec<Expr>, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::invalid(format!("empty interval [{lo}, {hi}]")));
        }
        if let Some(e) = exprs.iter().find(|e| e.arity() > 1) {
            return Err(Error::Arity {
                index: e.arity() - 1,
                available: 1,
            });
        }
        Ok(SampledCurve { exprs, lo, hi })
    }

    /// Components in `t`, comma separated.
    pub fn parse(src: &str, lo: f64, hi: f64) -> Result<Self> {
        SampledCurve::new(parse_list(src, &["t".to_string()])?, lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.exprs.len()
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        self.exprs
            .iter()
            .map(|e| e.eval(&[t]).map_err(Error::from))
            .collect()
    }

    /// `l ∘ c` for a coefficient vector `l`.
    pub fn compose(&self, l: &[f64]) -> Result<Expr> {
        Expr::linear(l).substitute(&self.exprs)
    }

    /// The componentwise derivative.
    pub fn derivative(&self) -> Result<SampledCurve> {
        let exprs = self
            .exprs
            .iter()
            .map(|e| e.partial(0, 1))
            .collect::<Result<Vec<_>>>()?;
        SampledCurve::new(exprs, self.lo, self.hi)
    }
}

/// A solution of `l_i(v) = b_i` over the functionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakSolution {
    /// Minimum-norm solution.
    pub value: Vec<f64>,
    pub unique: bool,
    /// Basis of the solution ambiguity (empty when unique).
    pub kernel: Vec<Vec<f64>>,
    /// `‖L v − b‖∞`.
    pub residual: f64,
    /// The right-hand side `b`.
    pub functional_values: Vec<f64>,
}

const WEAK_RESIDUAL: f64 = 1e-8;

fn solve_weak(pair: &DualPair, b: Vec<f64>, cfg: &ProbeConfig) -> Result<WeakSolution> {
    let (value, residual) = min_norm_solve(&pair.functionals, pair.dim, &b, 1e-12);
    let scale = b.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    if residual > WEAK_RESIDUAL * scale {
        return Err(Error::NoWeakDerivative { residual });
    }
    let unique = separation_check(pair, cfg).is_pass();
    let kernel = if unique {
        Vec::new()
    } else {
        kernel_basis(&pair.functionals, pair.dim, cfg.tau_rank)
    };
    let value = value
        .into_iter()
        .map(|x| if x.abs() < 1e-15 { 0.0 } else { x })
        .collect();
    Ok(WeakSolution {
        value,
        unique,
        kernel,
        residual,
        functional_values: b,
    })
}

/// `v` with `l(v) = (l ∘ c)′(t)` for every functional.
pub fn weak_derivative(
    c: &SampledCurve,
    t: f64,
    pair: &DualPair,
    cfg: &ProbeConfig,
) -> Result<WeakSolution> {
    check_dims(c, pair)?;
    let line = PolyPath::line(&[t], &[1.0]);
    let mut b = Vec::with_capacity(pair.functionals.len());
    for (i, l) in pair.functionals.iter().enumerate() {
        let lc = c.compose(l)?;
        let exact = taylor_eval(&lc, &line, 1)
            .map_err(|e| Error::NotDifferentiable(format!("l{} ∘ c at t = {t}: {e}", i + 1)))?
            .coeffs[1];
        let h = default_step(&[t]);
        let oracle = fd_jet(&lc, &line, 1, h)?;
        let agrees =
            oracle.reliable[1] && (oracle.coeffs[1] - exact).abs() <= 1e-6 * exact.abs().max(1.0);
        if !agrees && !slope_converges(&|s: f64| Ok(lc.eval(&[t + s])?), exact, h)? {
            return Err(Error::NotDifferentiable(format!(
                "l{} ∘ c at t = {t}: exact {exact}, finite differences {}",
                i + 1,
                oracle.coeffs[1]
            )));
        }
        b.push(exact);
    }
    solve_weak(pair, b, cfg)
}

/// Adaptive quadrature target for each `∫ l ∘ c`.
const QUAD_TOL: f64 = 1e-10;

/// `v` with `l(v) = ∫_a^b (l ∘ c)` for every functional.
pub fn weak_integral(
    c: &SampledCurve,
    a: f64,
    b: f64,
    pair: &DualPair,
    cfg: &ProbeConfig,
) -> Result<WeakSolution> {
    check_dims(c, pair)?;
    let mut rhs = Vec::with_capacity(pair.functionals.len());
    for l in &pair.functionals {
        let lc = c.compose(l)?;
        // Surface guard violations before handing a total function to the
        // integrator.
        for i in 0..=64 {
            lc.eval(&[a + (b - a) * i as f64 / 64.0])?;
        }
        // Double-exponential quadrature degrades badly across an interior kink
        // or jump, so integrate piecewise between them.
        let cuts = breakpoints(&lc, a, b);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total +=
                quadrature::integrate(|u| lc.eval(&[u]).unwrap_or(f64::NAN), w[0], w[1], QUAD_TOL)
                    .integral;
        }
        if !total.is_finite() {
            return Err(Error::domain(format!(
                "l ∘ c is not integrable on [{a}, {b}]"
            )));
        }
        rhs.push(total);
    }
    solve_weak(pair, rhs, cfg)
}

/// `a`, `b` and every zero in between of a critical argument of `e`
/// (see [`Expr::critical_args`]), sorted. Zeros are bracketed on a uniform grid
/// and refined by bisection, so tangential zeros without a sign change are only
/// caught when they land on the grid.
fn breakpoints(e: &Expr, a: f64, b: f64) -> Vec<f64> {
    const GRID: usize = 1024;
    let mut cuts = vec![a, b];
    for g in e.critical_args() {
        let val = |t: f64| g.eval(&[t]).unwrap_or(f64::NAN);
        let ts: Vec<f64> = (0..=GRID)
            .map(|i| a + (b - a) * i as f64 / GRID as f64)
            .collect();
        let vs: Vec<f64> = ts.iter().map(|&t| val(t)).collect();
        for i in 0..GRID {
            if vs[i] == 0.0 {
                cuts.push(ts[i]);
            } else if vs[i] * vs[i + 1] < 0.0 {
                let (mut lo, mut hi, mut flo) = (ts[i], ts[i + 1], vs[i]);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let fm = val(mid);
                    if fm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if (fm < 0.0) == (flo < 0.0) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                cuts.push(0.5 * (lo + hi));
            }
        }
    }
    cuts.retain(|t| (a..=b).contains(t));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));
    cuts
}

fn check_dims(c: &SampledCurve, pair: &DualPair) -> Result<()> {
    if c.dim() != pair.dim {
        return Err(Error::invalid(format!(
            "curve lives in R^{}, pair in R^{}",
            c.dim(),
            pair.dim
        )));
    }
    Ok(())
}

/// How the terms of a sequence are produced. Expressions use the index `n`
/// (starting at 1).
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceTerms {
    /// `x_n = e(n)`.
    Closed(Vec<Expr>),
    /// `x_n = Σ_{j≤n} e(j)`.
    PartialSums(Vec<Expr>),
    /// `x_n = Π_{j≤n} e(j)`.
    Products(Vec<Expr>),
    /// `x_1, x_2, …` given explicitly.
    List(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorSequence {
    pub terms: SequenceTerms,
    /// Candidate limit `x₀`.
    pub limit: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    Closed,
    PartialSums,
    Products,
    List,
}

/// JSON form of a [`VectorSequence`]: `terms` are expressions in `n` for
/// the generated kinds, `values` the explicit terms of a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceDoc {
    pub kind: SequenceKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<Vec<f64>>,
    pub limit: Vec<f64>,
}

impl SequenceDoc {
    pub fn build(&self) -> Result<VectorSequence> {
        let m = self.limit.len();
        if m == 0 {
            return Err(Error::Schema("limit must be a nonempty vector".into()));
        }
        let names = vec!["n".to_string()];
        let exprs = || -> Result<Vec<Expr>> {
            if self.terms.len() != m {
                return Err(Error::Schema(format!(
                    "{} term expressions for a limit of length {m}",
                    self.terms.len()
                )));
            }
            self.terms
                .iter()
                .map(|t| {
                    crate::expr::parse(t, &names)
                        .map_err(|e| Error::Schema(format!("term `{t}`: {e}")))
                })
                .collect()
        };
        let terms = match self.kind {
            SequenceKind::Closed => SequenceTerms::Closed(exprs()?),
            SequenceKind::PartialSums => SequenceTerms::PartialSums(exprs()?),
            SequenceKind::Products => SequenceTerms::Products(exprs()?),
            SequenceKind::List => {
                if self.values.iter().any(|v| v.len() != m) {
                    return Err(Error::Schema(
                        "list values must match the limit length".into(),
                    ));
                }
                SequenceTerms::List(self.values.clone())
            }
        };
        Ok(VectorSequence {
            terms,
            limit: self.limit.clone(),
        })
    }
}

impl std::str::FromStr for VectorSequence {
    type Err = Error;

    fn from_str(src: &str) -> Result<Self> {
        let doc: SequenceDoc =
            serde_json::from_str(src).map_err(|e| Error::Schema(e.to_string()))?;
        doc.build()
    }
}

impl VectorSequence {
    pub fn dim(&self) -> usize {
        self.limit.len()
    }

    /// `x_1 … x_N` (fewer for a shorter list).
    pub fn window(&self, n_max: usize) -> Result<Vec<Vec<f64>>> {
        let m = self.dim();
        let eval_all = |es: &[Expr], n: usize| -> Result<Vec<f64>> {
            es.iter()
                .map(|e| e.eval(&[n as f64]).map_err(Error::from))
                .collect()
        };
        let out = match &self.terms {
            SequenceTerms::List(xs) => xs.iter().take(n_max).cloned().collect(),
            SequenceTerms::Closed(es) => (1..=n_max)
                .map(|n| eval_all(es, n))
                .collect::<Result<_>>()?,
            SequenceTerms::PartialSums(es) => {
                let mut acc = vec![0.0; m];
                let mut out = Vec::with_capacity(n_max);
                for n in 1..=n_max {
                    for (a, v) in acc.iter_mut().zip(eval_all(es, n)?) {
                        *a += v;
                    }
                    out.push(acc.clone());
                }
                out
            }
            SequenceTerms::Products(es) => {
                let mut acc = vec![1.0; m];
                let mut out = Vec::with_capacity(n_max);
                for n in 1..=n_max {
                    for (a, v) in acc.iter_mut().zip(eval_all(es, n)?) {
                        *a *= v;
                    }
                    out.push(acc.clone());
                }
                out
            }
        };
        for x in &out {
            if x.len() != m || x.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(
                    "sequence term is not a finite vector of the carrier dimension",
                ));
            }
        }
        Ok(out)
    }
}

fn gap(pair: &DualPair, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    pair.apply(&d).iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn max_of<I: Iterator<Item = f64>>(it: I) -> f64 {
    it.fold(0.0f64, f64::max)
}

fn min_of<I: Iterator<Item = f64>>(it: I) -> f64 {
    it.fold(f64::INFINITY, f64::min)
}

/// Smallest `t_N` accepted as evidence that the scaling is unbounded.
const SCALING_TARGET: f64 = 10.0;

/// Summary of one scaling test: `d` are the functional gaps, `t` the
/// scalings, over a head and a tail part of the window.
struct ScalingTrace {
    d_head: f64,
    d_tail: f64,
    t_head_max: f64,
    t_tail_min: f64,
    td_head: f64,
    td_tail: f64,
    floor: f64,
}

impl ScalingTrace {
    fn diagnostic(&self) -> Diagnostic {
        Diagnostic::new(
            "d_head, d_tail, t_head_max, t_tail_min, td_head, td_tail",
            vec![
                self.d_head,
                self.d_tail,
                self.t_head_max,
                self.t_tail_min,
                self.td_head,
                self.td_tail,
            ],
        )
    }

    fn gaps_persist(&self) -> bool {
        self.d_tail > self.floor && self.d_tail >= 0.5 * self.d_head
    }

    fn scaling_ok(&self) -> bool {
        self.t_tail_min >= SCALING_TARGET
            && self.t_tail_min > self.t_head_max
            && self.td_tail <= 2.0 * self.td_head + self.floor
    }
}

fn check_seq(seq: &VectorSequence, pair: &DualPair, n_max: usize) -> Result<Vec<Vec<f64>>> {
    if seq.dim() != pair.dim {
        return Err(Error::invalid(format!(
            "sequence lives in R^{}, pair in R^{}",
            seq.dim(),
            pair.dim
        )));
    }
    let xs = seq.window(n_max)?;
    if xs.len() < 20 {
        return Err(Error::invalid("the window needs at least 20 terms"));
    }
    Ok(xs)
}

/// Mackey convergence `x_n → x₀` with the fixed scaling
/// `t_n = min(n, 1/√(d_n + 1/n²))`, `d_n = max_l |l(x_n − x₀)|`.
///
/// FAIL when the gaps do not decay (tail at least half the head); PASS when
/// `t_n` grows past 10 while `t_n·d_n` stays bounded; INCONCLUSIVE otherwise.
pub fn mackey_convergence_probe(
    seq: &VectorSequence,
    pair: &DualPair,
    n_max: usize,
) -> Result<Verdict> {
    let xs = check_seq(seq, pair, n_max)?;
    let big_n = xs.len();
    let d: Vec<f64> = xs.iter().map(|x| gap(pair, x, &seq.limit)).collect();
    let t: Vec<f64> = d
        .iter()
        .enumerate()
        .map(|(i, di)| {
            let n = (i + 1) as f64;
            n.min(1.0 / (di + 1.0 / (n * n)).sqrt())
        })
        .collect();
    let head = 0..(big_n / 10).max(1);
    let tail = big_n / 2..big_n;
    let scale = max_of(xs.iter().map(|x| gap(pair, x, &vec![0.0; pair.dim]))).max(1.0);
    let tr = ScalingTrace {
        d_head: max_of(d[head.clone()].iter().copied()),
        d_tail: max_of(d[tail.clone()].iter().copied()),
        t_head_max: max_of(t[head.clone()].iter().copied()),
        t_tail_min: min_of(t[tail.clone()].iter().copied()),
        td_head: max_of(head.map(|i| t[i] * d[i])),
        td_tail: max_of(tail.clone().map(|i| t[i] * d[i])),
        floor: 1e-12 * scale,
    };
    if tr.gaps_persist() {
        let i = tail
            .clone()
            .max_by(|a, b| d[*a].total_cmp(&d[*b]))
            .expect("nonempty tail");
        return Ok(Verdict::fail(
            Witness::note("max_l |l(x_n - x0)| does not tend to 0")
                .value("n", (i + 1) as f64)
                .value("gap", d[i])
                .value("head_gap", tr.d_head),
        )
        .with_diagnostic(tr.diagnostic()));
    }
    if tr.scaling_ok() {
        return Ok(Verdict::pass().with_diagnostic(tr.diagnostic()));
    }
    Ok(Verdict::inconclusive(vec![tr.diagnostic()]))
}

/// Log-spaced indices `1 ≤ n ≤ N`, always including the ends.
fn log_indices(big_n: usize, count: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let f = (big_n as f64).powf(i as f64 / (count - 1) as f64);
            (f.round() as usize).clamp(1, big_n)
        })
        .collect();
    // Dense tail so that pairs inside [N/2, N] exist.
    out.extend((0..12).map(|i| big_n / 2 + i * (big_n - big_n / 2) / 11));
    out.sort_unstable();
    out.dedup();
    out
}

/// Mackey–Cauchy test on pairwise differences, scaling
/// `t_{n,m} = min(n+m, 1/√(d_{n,m} + 1/(n+m)²))`.
///
/// A sequence whose norm keeps growing over the window is reported
/// INCONCLUSIVE with an `unbounded` diagnostic even when the scaling test
/// is satisfied.
pub fn mackey_cauchy_probe(seq: &VectorSequence, pair: &DualPair, n_max: usize) -> Result<Verdict> {
    let xs = check_seq(seq, pair, n_max)?;
    let big_n = xs.len();
    let idx = log_indices(big_n, 48);
    let head_lim = (big_n / 10).max(2);
    let tail_lo = big_n / 2;
    let (mut d_head, mut d_tail, mut t_head_max, mut t_tail_min, mut td_head, mut td_tail) =
        (0.0f64, 0.0f64, 0.0f64, f64::INFINITY, 0.0f64, 0.0f64);
    let mut worst = (0, 0, 0.0f64);
    for (a, &n) in idx.iter().enumerate() {
        for &m in &idx[a + 1..] {
            let d = gap(pair, &xs[n - 1], &xs[m - 1]);
            let s = (n + m) as f64;
            let t = s.min(1.0 / (d + 1.0 / (s * s)).sqrt());
            if n <= head_lim && m <= head_lim {
                d_head = d_head.max(d);
                t_head_max = t_head_max.max(t);
                td_head = td_head.max(t * d);
            }
            if n >= tail_lo {
                d_tail = d_tail.max(d);
                t_tail_min = t_tail_min.min(t);
                td_tail = td_tail.max(t * d);
                if d > worst.2 {
                    worst = (n, m, d);
                }
            }
        }
    }
    let zero = vec![0.0; pair.dim];
    let scale = max_of(xs.iter().map(|x| gap(pair, x, &zero))).max(1.0);
    let tr = ScalingTrace {
        d_head,
        d_tail,
        t_head_max,
        t_tail_min,
        td_head,
        td_tail,
        floor: 1e-12 * scale,
    };
    if tr.gaps_persist() {
        return Ok(Verdict::fail(
            Witness::note("max_l |l(x_n - x_m)| does not tend to 0")
                .value("n", worst.0 as f64)
                .value("m", worst.1 as f64)
                .value("gap", worst.2)
                .value("head_gap", d_head),
        )
        .with_diagnostic(tr.diagnostic()));
    }
    // Growth over a doubling of the index that does not decay between the
    // head and the tail of the window, as for logarithmic divergence.
    let step = |lo: usize, hi: usize| gap(pair, &xs[hi - 1], &xs[lo - 1]);
    let head_growth = step((big_n / 10).max(1), (big_n / 5).max(2));
    let tail_growth = step(big_n / 2, big_n);
    let unbounded = tail_growth > tr.floor && tail_growth >= 0.5 * head_growth;
    if tr.scaling_ok() && !unbounded {
        return Ok(Verdict::pass().with_diagnostic(tr.diagnostic()));
    }
    let mut diags = vec![tr.diagnostic()];
    if unbounded {
        diags.push(Diagnostic::new(
            "unbounded: growth over a doubling of n at the head and the tail",
            vec![head_growth, tail_growth],
        ));
    }
    Ok(Verdict::inconclusive(diags))
}

/// Ordinary Cauchy test in the sup norm of the functionals: the diameter of
/// the window tail against that of the head.
pub fn ordinary_cauchy(seq: &VectorSequence, pair: &DualPair, n_max: usize) -> Result<bool> {
    let xs = check_seq(seq, pair, n_max)?;
    let big_n = xs.len();
    let diam = |r: std::ops::Range<usize>| {
        let mut best = 0.0f64;
        let pts: Vec<usize> = log_indices(big_n, 32)
            .into_iter()
            .filter(|i| r.contains(&(i - 1)))
            .collect();
        for (a, &i) in pts.iter().enumerate() {
            for &j in &pts[a + 1..] {
                best = best.max(gap(pair, &xs[i - 1], &xs[j - 1]));
            }
        }
        best
    };
    let head = diam(0..big_n / 10);
    let tail = diam(big_n / 2..big_n);
    Ok(tail <= 1e-3 * head.max(1e-300) || tail <= 1e-12)
}

/// Number of dense sample points for [`lipk_probe`].
const LIPK_SAMPLES: usize = 41;

/// `Lipᵏ` test: is `δᵏ⁺¹(l ∘ c)` bounded on node tuples shrinking to each
/// sample point, for every functional?
pub fn lipk_probe(c: &SampledCurve, k: usize, pair: &DualPair) -> Result<Verdict> {
    check_dims(c, pair)?;
    let m = k + 1;
    let width = c.hi - c.lo;
    let h = 0.2 * width / LIPK_SAMPLES as f64;
    let mut diags = Vec::new();
    for (li, l) in pair.functionals.iter().enumerate() {
        let lc = c.compose(l)?;
        let g = |t: f64| lc.eval(&[t]).map_err(Error::from);
        for i in 0..LIPK_SAMPLES {
            let t = c.lo + (i as f64 + 0.5) * width / LIPK_SAMPLES as f64;
            let b = delta_bound(&g, t, m, h)?;
            match b.class {
                BoundClass::Bounded => {}
                BoundClass::Divergent => {
                    return Ok(Verdict::fail(
                        Witness::note(format!(
                            "δ^{m} of l{} ∘ c grows as the nodes shrink",
                            li + 1
                        ))
                        .at(&[t])
                        .function(format!("l{}", li + 1))
                        .value("delta_h", b.values[0])
                        .value("delta_h4", b.values[1])
                        .value("delta_h16", b.values[2])
                        .value("jump", b.jump(m)),
                    ));
                }
                BoundClass::Unclear => diags.push(Diagnostic::new(
                    format!("l{} at t = {t}: δ^{m} at H, H/4, H/16", li + 1),
                    b.values.to_vec(),
                )),
            }
        }
    }
    Ok(if diags.is_empty() {
        Verdict::pass()
    } else {
        Verdict::inconclusive(diags)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ProbeConfig {
        ProbeConfig::default()
    }

    fn seq(kind: fn(Vec<Expr>) -> SequenceTerms, srcs: &str, limit: Vec<f64>) -> VectorSequence {
        VectorSequence {
            terms: kind(parse_list(srcs, &["n".to_string()]).unwrap()),
            limit,
        }
    }

    #[test]
    fn separation_examples() {
        assert!(separation_check(&DualPair::full(2), &cfg()).is_pass());
        let v = separation_check(&DualPair::parse(2, &["x + y"]).unwrap(), &cfg());
        assert_eq!(v.witness.unwrap().direction, Some(vec![1.0, -1.0]));
        assert!(separation_check(&DualPair::parse(2, &["x", "x + y"]).unwrap(), &cfg()).is_pass());
        assert!(DualPair::parse(2, &["x + 1"]).is_err());
    }

    #[test]
    fn weak_derivative_examples() {
        let c = SampledCurve::parse("t, t^2", -1.0, 1.0).unwrap();
        let w = weak_derivative(&c, 0.0, &DualPair::full(2), &cfg()).unwrap();
        assert_eq!(w.value, vec![1.0, 0.0]);
        assert!(w.unique);
        let c = SampledCurve::parse("t, t", -1.0, 1.0).unwrap();
        let w = weak_derivative(&c, 0.0, &DualPair::parse(2, &["x + y"]).unwrap(), &cfg()).unwrap();
        assert!((w.value[0] - 1.0).abs() < 1e-12 && (w.value[1] - 1.0).abs() < 1e-12);
        assert!(!w.unique);
        assert_eq!(w.kernel, vec![vec![1.0, -1.0]]);
        let c = SampledCurve::parse("t*abs(t), 0", -1.0, 1.0).unwrap();
        let w = weak_derivative(&c, 0.0, &DualPair::full(2), &cfg()).unwrap();
        assert_eq!(w.value, vec![0.0, 0.0]);
    }

    #[test]
    fn weak_integral_examples() {
        let c = SampledCurve::parse("1, 2*t", 0.0, 1.0).unwrap();
        let w = weak_integral(&c, 0.0, 1.0, &DualPair::full(2), &cfg()).unwrap();
        assert!((w.value[0] - 1.0).abs() < 1e-10 && (w.value[1] - 1.0).abs() < 1e-10);
        let c = SampledCurve::parse("cos(t), sin(t)", 0.0, 4.0).unwrap();
        let w = weak_integral(&c, 0.0, std::f64::consts::PI, &DualPair::full(2), &cfg()).unwrap();
        assert!(w.value[0].abs() < 1e-10 && (w.value[1] - 2.0).abs() < 1e-10);
        let c = SampledCurve::parse("t, -t", 0.0, 1.0).unwrap();
        let w = weak_integral(
            &c,
            0.0,
            1.0,
            &DualPair::parse(2, &["x + y"]).unwrap(),
            &cfg(),
        )
        .unwrap();
        assert_eq!(w.value, vec![0.0, 0.0]);
        assert!(!w.unique);
        // interior kinks and jumps
        let c = SampledCurve::parse("2*abs(t), abs(t - 0.3)", -1.0, 1.0).unwrap();
        let w = weak_integral(&c, -0.7, 0.6, &DualPair::full(2), &cfg()).unwrap();
        assert!((w.value[0] - 0.85).abs() < 1e-10, "{:?}", w.value);
        assert!((w.value[1] - 0.545).abs() < 1e-10, "{:?}", w.value);
        let d = c.derivative().unwrap();
        let w = weak_integral(&d, -0.7, 0.6, &DualPair::full(2), &cfg()).unwrap();
        assert!(
            (w.value[0] + 0.2).abs() < 1e-10 && (w.value[1] + 0.7).abs() < 1e-10,
            "{:?}",
            w.value
        );
    }

    #[test]
    fn mackey_examples() {
        let pair = DualPair::full(2);
        let n = 10_000;
        let geo = seq(
            SequenceTerms::Closed,
            "exp(-n*log(2)), exp(-n*log(2))",
            vec![0.0, 0.0],
        );
        assert!(mackey_convergence_probe(&geo, &pair, n).unwrap().is_pass());
        let alt = seq(SequenceTerms::Closed, "cos(pi*n), 0", vec![0.0, 0.0]);
        assert!(mackey_convergence_probe(&alt, &pair, n).unwrap().is_fail());
        let constant = seq(SequenceTerms::Closed, "3, -1", vec![3.0, -1.0]);
        assert!(mackey_convergence_probe(&constant, &pair, n)
            .unwrap()
            .is_pass());

        let fact = seq(SequenceTerms::Products, "1/n, 0", vec![0.0, 0.0]);
        assert!(mackey_cauchy_probe(&fact, &pair, n).unwrap().is_pass());
        let harmonic = seq(SequenceTerms::PartialSums, "1/n, 0", vec![0.0, 0.0]);
        let v = mackey_cauchy_probe(&harmonic, &pair, n).unwrap();
        assert!(v.is_inconclusive(), "{v:?}");
        assert!(v
            .diagnostics
            .iter()
            .any(|d| d.label.starts_with("unbounded")));
        assert!(mackey_cauchy_probe(&alt, &pair, n).unwrap().is_fail());
    }

    #[test]
    fn lipk_examples() {
        let pair = DualPair::full(1);
        let abs = SampledCurve::parse("abs(t)", -1.0, 1.0).unwrap();
        let v = lipk_probe(&abs, 1, &pair).unwrap();
        assert!(v.is_fail());
        assert_eq!(v.witness.unwrap().point, Some(vec![0.0]));
        let c1 = SampledCurve::parse("t*abs(t)", -1.0, 1.0).unwrap();
        assert!(lipk_probe(&c1, 1, &pair).unwrap().is_pass());
        assert!(lipk_probe(&c1, 2, &pair).unwrap().is_fail());
        let poly = SampledCurve::parse("t^3 - 2*t + 1", -1.0, 1.0).unwrap();
        for k in 0..5 {
            assert!(lipk_probe(&poly, k, &pair).unwrap().is_pass(), "k = {k}");
        }
    }
}
