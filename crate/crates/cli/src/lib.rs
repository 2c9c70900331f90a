//! Command-line front end: argument model, dispatch and output.
//!
//! [`execute`] runs one command and returns the report (or CSV text) with
//! the process exit status; `main` only handles I/O.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use difflab::convenient::{
    lipk_probe, mackey_cauchy_probe, mackey_convergence_probe, separation_check, weak_derivative,
    weak_integral, DualPair, SampledCurve, VectorSequence, WeakSolution,
};
use difflab::diffeology::{
    battery, bundled, gamma_probe, membership_probe, morphism_probe, morphism_report, phi_probe,
    round_trip, upsilon, FunctionFamily, GeneratedDiffeology, LabeledFn, MorphismMode, Plaque,
};
use difflab::expr::{ambient_names, param_names, parse, parse_list};
use difflab::gallery::{run_gallery, Gallery};
use difflab::report::Report;
use difflab::tangent::{alpha_injectivity_probe, continuity_probe, linearity_probe, tangent_dim};
use difflab::{
    delta_k, directional_derivative, smoothness_probe, BoxDomain, Error, NodeTuple, ProbeConfig,
    Verdict, Witness,
};

#[derive(Debug, Parser)]
#[command(
    name = "difflab",
    version,
    about = "Numerical probes for smooth structures"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalOpts {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON file with a full probe configuration; flags below override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub eps_jet_rel: Option<f64>,
    #[arg(long, global = true)]
    pub eps_jet_abs: Option<f64>,
    #[arg(long, global = true)]
    pub eps_pt: Option<f64>,
    #[arg(long, global = true)]
    pub tau_rank: Option<f64>,
    #[arg(long, global = true)]
    pub fd_step: Option<f64>,
    /// Grid density per axis.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Window length N for sequence probes.
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Drop timings so that reports of identical runs are byte-identical.
    #[arg(long, global = true)]
    pub normalized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    I,
    Ii,
    Iii,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MackeyKind {
    Convergence,
    Cauchy,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleKind {
    Function,
    Spectrum,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Smoothness probe of an expression on a box.
    CheckSmooth {
        #[arg(long)]
        expr: String,
        /// Box as `lo,hi;lo,hi;…`.
        #[arg(long = "box", allow_hyphen_values = true)]
        domain: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
    },
    /// Is a function smooth along every curve of a space?
    Phi {
        #[arg(long)]
        space: String,
        #[arg(long)]
        expr: String,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Is a plaque smooth for the structure functions of a space?
    Gamma {
        #[arg(long)]
        space: String,
        /// Comma-separated components in the parameters (t; r, s; u1 …).
        #[arg(long, allow_hyphen_values = true)]
        plaque: String,
        #[arg(long = "box", allow_hyphen_values = true)]
        domain: String,
        /// Semicolon-separated functions; defaults to those extracted from the space.
        #[arg(long)]
        functions: Option<String>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Membership of a plaque in a generated diffeology.
    Member {
        #[arg(long)]
        space: String,
        #[arg(long, allow_hyphen_values = true)]
        plaque: String,
        #[arg(long = "box", allow_hyphen_values = true)]
        domain: String,
        /// Extra refuting functions, semicolon-separated.
        #[arg(long)]
        functions: Option<String>,
    },
    /// Smoothness of a map between two spaces.
    Morphism {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Comma-separated components in the source coordinates.
        #[arg(long, allow_hyphen_values = true)]
        map: String,
        #[arg(long, value_enum, default_value_t = ModeArg::All)]
        mode: ModeArg,
    },
    /// Battery verdicts before and after the round trip through curve/function structures.
    PsiUpsilon {
        #[arg(long)]
        space: String,
    },
    /// Numerical dimension of the tangent set at a point.
    TangentDim {
        #[arg(long)]
        space: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Is the tangent set at a point closed under addition and scaling?
    Linearity {
        #[arg(long)]
        space: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 4)]
        trials: usize,
    },
    /// Continuity of addition along a pair of families (last parameter is s).
    Continuity {
        #[arg(long)]
        space: String,
        #[arg(long, allow_hyphen_values = true)]
        p1: String,
        #[arg(long, allow_hyphen_values = true)]
        p2: String,
        #[arg(long = "box", allow_hyphen_values = true)]
        domain: String,
    },
    /// Injectivity of the vector-to-tangent map of a dual pair.
    Alpha {
        #[arg(long)]
        pair: String,
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
    /// Weak derivative of a curve at a parameter.
    WeakDeriv {
        #[arg(long)]
        pair: String,
        #[arg(long, allow_hyphen_values = true)]
        curve: String,
        #[arg(long, allow_hyphen_values = true)]
        at: f64,
        /// Curve parameter interval `lo,hi`.
        #[arg(long, allow_hyphen_values = true, default_value = "-1,1")]
        range: String,
    },
    /// Weak integral of a curve over [from, to].
    WeakInt {
        #[arg(long)]
        pair: String,
        #[arg(long, allow_hyphen_values = true)]
        curve: String,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
    },
    /// Mackey convergence and Mackey-Cauchy probes of a sequence.
    Mackey {
        #[arg(long)]
        pair: String,
        #[arg(long)]
        sequence: String,
        #[arg(long, value_enum, default_value_t = MackeyKind::Both)]
        kind: MackeyKind,
    },
    /// Lip^k probe of a curve.
    Lipk {
        #[arg(long)]
        pair: String,
        #[arg(long, allow_hyphen_values = true)]
        curve: String,
        #[arg(long)]
        k: usize,
        #[arg(long, allow_hyphen_values = true, default_value = "-1,1")]
        range: String,
    },
    /// The difference quotient δ^k of a one-variable expression at nodes.
    Delta {
        #[arg(long)]
        expr: String,
        #[arg(long, allow_hyphen_values = true)]
        nodes: String,
    },
    /// Runs the counterexample catalog.
    Gallery {
        /// Catalog file; the shipped catalog if absent.
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// CSV samples for plotting.
    Samples {
        #[arg(long, value_enum, default_value_t = SampleKind::Function)]
        kind: SampleKind,
        #[arg(long)]
        expr: Option<String>,
        #[arg(long = "box", allow_hyphen_values = true)]
        domain: Option<String>,
        /// Points per axis (0 writes the header only).
        #[arg(long, default_value_t = 11)]
        points: usize,
        #[arg(long)]
        space: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
}

/// The product of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Report(Report),
    Csv(String),
}

impl Output {
    pub fn text(&self, normalized: bool) -> String {
        match self {
            Output::Report(r) if normalized => r.normalized().to_json(),
            Output::Report(r) => r.to_json(),
            Output::Csv(s) => s.clone(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Output::Report(r) => r.exit_code(),
            Output::Csv(_) => 0,
        }
    }
}

/// Exit status for an input that could not be probed.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Schema(_)
        | Error::Parse(_)
        | Error::UnknownEntry(_)
        | Error::UnknownClaim { .. }
        | Error::Invalid(_)
        | Error::InvalidWitness { .. }
        | Error::InconsistentPair { .. } => 3,
        _ => 4,
    }
}

pub fn probe_config(g: &GlobalOpts) -> difflab::Result<ProbeConfig> {
    let mut cfg = match &g.config {
        Some(p) => serde_json::from_str(&read(p)?)
            .map_err(|e| Error::Schema(format!("{}: {e}", p.display())))?,
        None => ProbeConfig::default(),
    };
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = g.$f { cfg.$f = v; })* };
    }
    set!(
        seed,
        eps_jet_rel,
        eps_jet_abs,
        eps_pt,
        tau_rank,
        fd_step,
        grid,
        window
    );
    cfg.validate()?;
    Ok(cfg)
}

fn read(p: &Path) -> difflab::Result<String> {
    std::fs::read_to_string(p).map_err(|e| Error::Schema(format!("{}: {e}", p.display())))
}

/// A file path, inline JSON, or (for spaces) the name of a bundled space.
fn document(arg: &str) -> difflab::Result<String> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        read(Path::new(arg))
    }
}

pub fn load_space(arg: &str) -> difflab::Result<GeneratedDiffeology> {
    if !Path::new(arg).exists() && !arg.trim_start().starts_with('{') {
        if let Ok(d) = bundled(arg) {
            return Ok(d);
        }
    }
    document(arg)?.parse()
}

pub fn load_pair(arg: &str) -> difflab::Result<DualPair> {
    serde_json::from_str(&document(arg)?).map_err(|e| Error::Schema(e.to_string()))
}

pub fn load_sequence(arg: &str) -> difflab::Result<VectorSequence> {
    document(arg)?.parse()
}

pub fn parse_vec(s: &str) -> difflab::Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("`{x}` is not a number")))
        })
        .collect()
}

pub fn parse_box(s: &str) -> difflab::Result<BoxDomain> {
    let (mut lo, mut hi) = (Vec::new(), Vec::new());
    for side in s.split(';') {
        match parse_vec(side)?.as_slice() {
            [a, b] => {
                lo.push(*a);
                hi.push(*b);
            }
            _ => return Err(Error::invalid(format!("interval `{side}` is not `lo,hi`"))),
        }
    }
    BoxDomain::new(lo, hi)
}

fn parse_functions(src: &str, m: usize) -> difflab::Result<FunctionFamily> {
    let names = ambient_names(m);
    let items = src
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            Ok(LabeledFn {
                label: s.trim().to_string(),
                expr: parse(s, &names)?,
            })
        })
        .collect::<difflab::Result<Vec<_>>>()?;
    Ok(FunctionFamily::new(items))
}

fn parse_plaque(label: &str, src: &str, domain: &str) -> difflab::Result<Plaque> {
    let dom = parse_box(domain)?;
    let exprs = parse_list(src, &param_names(dom.dim()))?;
    Plaque::new(label, dom, exprs)
}

fn range(s: &str) -> difflab::Result<(f64, f64)> {
    match parse_vec(s)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::invalid(format!("range `{s}` is not `lo,hi`"))),
    }
}

fn weak_verdict(w: &WeakSolution) -> Verdict {
    if w.unique {
        Verdict::pass()
    } else {
        let dir = w.kernel.first().cloned().unwrap_or_default();
        Verdict::fail(
            Witness::note("not unique: the pair does not separate this kernel").along(&dir),
        )
    }
}

/// Runs one command.
pub fn execute(cli: &Cli) -> difflab::Result<Output> {
    let cfg = probe_config(&cli.global)?;
    let started = Instant::now();
    let mut report = Report::new(command_name(&cli.command), &cfg);
    match &cli.command {
        Command::CheckSmooth { expr, domain, k } => {
            let dom = parse_box(domain)?;
            let e = parse(expr, &ambient_names(dom.dim()))?;
            report.push("smoothness", smoothness_probe(&e, &dom, *k, &cfg)?);
        }
        Command::Phi { space, expr, k } => {
            let d = load_space(space)?;
            let e = parse(expr, &ambient_names(d.ambient_dim()))?;
            let m = upsilon(&d, &cfg)?;
            report.push(
                "phi",
                phi_probe(&m.curves, &e, k.unwrap_or(d.class_k), &cfg)?,
            );
        }
        Command::Gamma {
            space,
            plaque,
            domain,
            functions,
            k,
        } => {
            let d = load_space(space)?;
            let p = parse_plaque("p", plaque, domain)?;
            let fam = match functions {
                Some(f) => parse_functions(f, d.ambient_dim())?,
                None => upsilon(&d, &cfg)?.functions,
            };
            report.push(
                "gamma",
                gamma_probe(&fam, &p, k.unwrap_or(d.class_k), &cfg)?,
            );
        }
        Command::Member {
            space,
            plaque,
            domain,
            functions,
        } => {
            let d = load_space(space)?;
            let p = parse_plaque("p", plaque, domain)?;
            let extra = match functions {
                Some(f) => parse_functions(f, d.ambient_dim())?,
                None => FunctionFamily::default(),
            };
            report.push("member", membership_probe(&d, &extra, &p, &cfg)?);
        }
        Command::Morphism {
            from,
            to,
            map,
            mode,
        } => {
            let dx = load_space(from)?;
            let dy = load_space(to)?;
            let f = parse_list(map, &ambient_names(dx.ambient_dim()))?;
            let single = |m| morphism_probe(&f, &dx, &dy, m, &cfg);
            match mode {
                ModeArg::I => report.push("mode_i", single(MorphismMode::I)?),
                ModeArg::Ii => report.push("mode_ii", single(MorphismMode::Ii)?),
                ModeArg::Iii => report.push("mode_iii", single(MorphismMode::Iii)?),
                ModeArg::All => {
                    let r = morphism_report(&f, &dx, &dy, &cfg)?;
                    report.set_results(&json!({ "ii_iii_agree": r.ii_iii_agree }))?;
                    report.push("mode_i", r.mode_i);
                    report.push("mode_ii", r.mode_ii);
                    report.push("mode_iii", r.mode_iii);
                }
            }
        }
        Command::PsiUpsilon { space } => {
            let d = load_space(space)?;
            let rt = round_trip(&d, &battery(d.ambient_dim()), &cfg)?;
            let v = match rt
                .labels
                .iter()
                .zip(rt.before.iter().zip(&rt.after))
                .find(|(_, (a, b))| a != b)
            {
                None => Verdict::pass(),
                Some((label, (a, b))) => Verdict::fail(
                    Witness::note(format!("verdict changed from {a} to {b}"))
                        .function(label.clone()),
                ),
            };
            report.set_results(&rt)?;
            report.push("round_trip", v);
        }
        Command::TangentDim {
            space,
            point,
            samples,
        } => {
            let d = load_space(space)?;
            let x = parse_vec(point)?;
            let m = d.ambient_dim();
            let est = tangent_dim(
                &x,
                &d,
                &FunctionFamily::coordinates(m),
                samples.unwrap_or(2 * m + 4),
                &cfg,
            )?;
            report.witnesses.extend(est.witnesses.iter().cloned());
            report.set_results(&est)?;
        }
        Command::Linearity {
            space,
            point,
            trials,
        } => {
            let d = load_space(space)?;
            let x = parse_vec(point)?;
            let fam = FunctionFamily::coordinates(d.ambient_dim());
            report.push("linearity", linearity_probe(&d, &x, &fam, *trials, &cfg)?);
        }
        Command::Continuity {
            space,
            p1,
            p2,
            domain,
        } => {
            let d = load_space(space)?;
            let a = parse_plaque("p1", p1, domain)?;
            let b = parse_plaque("p2", p2, domain)?;
            let fam = FunctionFamily::coordinates(d.ambient_dim());
            report.push("continuity", continuity_probe(&d, &a, &b, &fam, &cfg)?);
        }
        Command::Alpha { pair, trials } => {
            let p = load_pair(pair)?;
            let a = alpha_injectivity_probe(&p, *trials, &cfg)?;
            let s = separation_check(&p, &cfg);
            report.set_results(&json!({ "agree": a.status == s.status, "rank": p.rank(&cfg) }))?;
            report.push("alpha_injective", a);
            report.push("separated", s);
        }
        Command::WeakDeriv {
            pair,
            curve,
            at,
            range: r,
        } => {
            let p = load_pair(pair)?;
            let (lo, hi) = range(r)?;
            let c = SampledCurve::parse(curve, lo, hi)?;
            let w = weak_derivative(&c, *at, &p, &cfg)?;
            report.push("unique", weak_verdict(&w));
            report.set_results(&w)?;
        }
        Command::WeakInt {
            pair,
            curve,
            from,
            to,
        } => {
            let p = load_pair(pair)?;
            let c = SampledCurve::parse(curve, from.min(*to), from.max(*to))?;
            let w = weak_integral(&c, *from, *to, &p, &cfg)?;
            report.push("unique", weak_verdict(&w));
            report.set_results(&w)?;
        }
        Command::Mackey {
            pair,
            sequence,
            kind,
        } => {
            let p = load_pair(pair)?;
            let s = load_sequence(sequence)?;
            if matches!(kind, MackeyKind::Convergence | MackeyKind::Both) {
                report.push(
                    "mackey_convergence",
                    mackey_convergence_probe(&s, &p, cfg.window)?,
                );
            }
            if matches!(kind, MackeyKind::Cauchy | MackeyKind::Both) {
                report.push("mackey_cauchy", mackey_cauchy_probe(&s, &p, cfg.window)?);
            }
        }
        Command::Lipk {
            pair,
            curve,
            k,
            range: r,
        } => {
            let p = load_pair(pair)?;
            let (lo, hi) = range(r)?;
            let c = SampledCurve::parse(curve, lo, hi)?;
            report.push("lipk", lipk_probe(&c, *k, &p)?);
        }
        Command::Delta { expr, nodes } => {
            let e = parse(expr, &param_names(1))?;
            let n = parse_vec(nodes)?;
            let v = delta_k(&e, &NodeTuple::new(n.clone())?)?;
            report.set_results(&json!({ "k": n.len() - 1, "nodes": n, "value": v }))?;
        }
        Command::Gallery { catalog } => {
            let g = match catalog {
                Some(p) => Gallery::from_json(&read(p)?)?,
                None => Gallery::builtin(),
            };
            let r = run_gallery(&g, &cfg)?;
            for rec in &r.records {
                report.push_expected(
                    format!("{}/{}", rec.entry, rec.claim),
                    rec.observed.clone(),
                    Some(rec.expected),
                );
            }
            report.set_results(&r)?;
        }
        Command::Samples {
            kind,
            expr,
            domain,
            points,
            space,
            point,
        } => {
            return match kind {
                SampleKind::Function => {
                    let dom = parse_box(
                        domain
                            .as_deref()
                            .ok_or_else(|| Error::invalid("--box is required"))?,
                    )?;
                    let src = expr
                        .as_deref()
                        .ok_or_else(|| Error::invalid("--expr is required"))?;
                    let e = parse(src, &ambient_names(dom.dim()))?;
                    Ok(Output::Csv(function_samples(&e, &dom, *points)?))
                }
                SampleKind::Spectrum => {
                    let d = load_space(
                        space
                            .as_deref()
                            .ok_or_else(|| Error::invalid("--space is required"))?,
                    )?;
                    let x = parse_vec(
                        point
                            .as_deref()
                            .ok_or_else(|| Error::invalid("--point is required"))?,
                    )?;
                    let m = d.ambient_dim();
                    let est =
                        tangent_dim(&x, &d, &FunctionFamily::coordinates(m), 2 * m + 4, &cfg)?;
                    Ok(Output::Csv(spectrum_samples(&est.singular_values)?))
                }
            };
        }
    }
    report.time("total", started.elapsed().as_secs_f64());
    Ok(Output::Report(report))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::CheckSmooth { .. } => "check-smooth",
        Command::Phi { .. } => "phi",
        Command::Gamma { .. } => "gamma",
        Command::Member { .. } => "member",
        Command::Morphism { .. } => "morphism",
        Command::PsiUpsilon { .. } => "psi-upsilon",
        Command::TangentDim { .. } => "tangent-dim",
        Command::Linearity { .. } => "linearity",
        Command::Continuity { .. } => "continuity",
        Command::Alpha { .. } => "alpha",
        Command::WeakDeriv { .. } => "weak-deriv",
        Command::WeakInt { .. } => "weak-int",
        Command::Mackey { .. } => "mackey",
        Command::Lipk { .. } => "lipk",
        Command::Delta { .. } => "delta",
        Command::Gallery { .. } => "gallery",
        Command::Samples { .. } => "samples",
    }
}

/// 17 significant digits; empty for a value that does not exist.
fn num(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.16e}"))
}

fn csv_text(header: Vec<String>, rows: Vec<Vec<String>>) -> difflab::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::invalid(e.to_string());
    w.write_record(&header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Value and axis derivatives on a `points`-per-axis grid of the closed box.
pub fn function_samples(
    e: &difflab::Expr,
    dom: &BoxDomain,
    points: usize,
) -> difflab::Result<String> {
    use rayon::prelude::*;
    let names = ambient_names(dom.dim());
    let mut header: Vec<String> = names.clone();
    header.push("value".into());
    header.extend(names.iter().map(|n| format!("d_{n}")));
    let pts = closed_grid(dom, points);
    let rows = pts
        .par_iter()
        .map(|x| {
            let mut row: Vec<String> = x.iter().map(|v| num(Some(*v))).collect();
            row.push(num(e.eval(x).ok()));
            for i in 0..x.len() {
                let mut v = vec![0.0; x.len()];
                v[i] = 1.0;
                row.push(num(directional_derivative(e, x, &[v]).ok()));
            }
            row
        })
        .collect();
    csv_text(header, rows)
}

fn closed_grid(dom: &BoxDomain, points: usize) -> Vec<Vec<f64>> {
    if points == 0 {
        return Vec::new();
    }
    let axis = |i: usize| -> Vec<f64> {
        if points == 1 {
            return vec![0.5 * (dom.lo[i] + dom.hi[i])];
        }
        (0..points)
            .map(|j| dom.lo[i] + (dom.hi[i] - dom.lo[i]) * j as f64 / (points - 1) as f64)
            .collect()
    };
    let mut out = vec![Vec::new()];
    for i in 0..dom.dim() {
        let a = axis(i);
        out = out
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                a.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn spectrum_samples(sv: &[f64]) -> difflab::Result<String> {
    let rows = sv
        .iter()
        .enumerate()
        .map(|(i, s)| vec![i.to_string(), num(Some(*s))])
        .collect();
    csv_text(vec!["index".into(), "singular_value".into()], rows)
}

/// Caps the global thread pool from `DIFFLAB_THREADS`.
pub fn init_threads() {
    if let Some(n) = std::env::var("DIFFLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}


#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
