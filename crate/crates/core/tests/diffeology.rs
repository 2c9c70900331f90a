//! Galois laws between curve and function oracles, closure of plaques
//! under reparametrization, and agreement of the morphism tests.

use proptest::prelude::*;

use difflab::diffeology::{
    battery, bundled, gamma_probe, membership_probe, morphism_probe, phi_probe, FunctionFamily,
    MorphismMode, Plaque, BUNDLED_SPACES,
};
use difflab::expr::{ambient_names, parse_list};
use difflab::{BoxDomain, Expr, ProbeConfig, Status};

fn cfg() -> ProbeConfig {
    ProbeConfig::default()
}

fn passing(curves: &[Plaque], family: &FunctionFamily, k: usize) -> Vec<String> {
    family
        .items
        .iter()
        .filter(|f| phi_probe(curves, &f.expr, k, &cfg()).unwrap().is_pass())
        .map(|f| f.label.clone())
        .collect()
}

#[test]
fn gamma_of_phi_contains_the_curves() {
    for name in ["cross", "lines", "r2"] {
        let d = bundled(name).unwrap();
        let curves = d.generator_plaques().unwrap();
        let fam = battery(d.ambient_dim());
        let accepted = FunctionFamily::new(
            fam.items
                .into_iter()
                .filter(|f| {
                    phi_probe(&curves, &f.expr, d.class_k, &cfg())
                        .unwrap()
                        .is_pass()
                })
                .collect(),
        );
        assert!(!accepted.is_empty(), "{name}");
        for p in &curves {
            let v = gamma_probe(&accepted, p, d.class_k, &cfg()).unwrap();
            assert!(
                v.is_pass(),
                "{name}: {} rejected by Γ(Φ(C)): {v:?}",
                p.label
            );
        }
    }
}

#[test]
fn phi_of_gamma_contains_the_functions() {
    let fam = FunctionFamily::parse(
        2,
        &[
            ("x", "x"),
            ("xy", "x*y"),
            ("abs_y", "abs(y)"),
            ("relu_y", "relu(y)"),
        ],
    )
    .unwrap();
    let dom = BoxDomain::cube(1, 1.0);
    let candidates: Vec<Plaque> = [
        ("h0", "t, 0"),
        ("h1", "t, 1"),
        ("hq", "t^2, -0.5"),
        ("v", "0, t"),
        ("diag", "t, t"),
        ("par", "t, t^2"),
        ("wig", "sin(t), 0.3"),
    ]
    .iter()
    .map(|(l, s)| Plaque::new(*l, dom.clone(), parse_list(s, &["t".to_string()]).unwrap()).unwrap())
    .collect();
    let accepted: Vec<Plaque> = candidates
        .into_iter()
        .filter(|p| gamma_probe(&fam, p, 2, &cfg()).unwrap().is_pass())
        .collect();
    let labels: Vec<&str> = accepted.iter().map(|p| p.label.as_str()).collect();
    // Only curves crossing y = 0 transversally meet the kinks in y.
    assert_eq!(labels, ["h0", "h1", "hq", "par", "wig"]);
    for f in &fam.items {
        assert!(
            phi_probe(&accepted, &f.expr, 2, &cfg()).unwrap().is_pass(),
            "{}",
            f.label
        );
    }
}

#[test]
fn enlarging_the_curves_shrinks_the_functions() {
    for (name, _) in BUNDLED_SPACES {
        let d = bundled(name).unwrap();
        let all = d.generator_plaques().unwrap();
        let fam = battery(d.ambient_dim());
        let mut prev = passing(&all[..1], &fam, d.class_k);
        for n in 2..=all.len().min(4) {
            let now = passing(&all[..n], &fam, d.class_k);
            assert!(
                now.iter().all(|l| prev.contains(l)),
                "{name}: {now:?} not within {prev:?}"
            );
            prev = now;
        }
    }
}

fn map_component() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec![
        "x", "y", "x^2", "abs(x)", "x*y", "0", "sin(y)", "relu(x)", "x + y", "y^3",
    ])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn plaques_stay_plaques_under_reparametrization(
        which in 0usize..3,
        c1 in -1.5f64..1.5,
        c2 in -1.5f64..1.5,
        c3 in -1.5f64..1.5,
        shift in -0.5f64..0.5,
    ) {
        let name = ["cross", "lines", "r2"][which];
        let d = bundled(name).unwrap();
        let p = d.generator_plaques().unwrap().swap_remove(0);
        prop_assume!(membership_probe(&d, &FunctionFamily::default(), &p, &cfg()).unwrap().is_pass());
        // |φ| ≤ 0.5 + 1.5·(0.4 + 0.16 + 0.064) < 2 on [-0.4, 0.4]^d, inside every generator box.
        let phi: Vec<Expr> = (0..p.dim())
            .map(|i| {
                let t = Expr::Var(i);
                Expr::Const(shift) + Expr::Const(c1) * t.clone() + Expr::Const(c2) * t.clone().powi(2)
                    + Expr::Const(c3) * t.powi(3)
            })
            .collect();
        let q = p.precompose("p∘φ", &phi, BoxDomain::cube(p.dim(), 0.4)).unwrap();
        let v = membership_probe(&d, &FunctionFamily::default(), &q, &cfg()).unwrap();
        prop_assert!(v.is_pass(), "{name}: {v:?}");
    }

    #[test]
    fn morphism_modes_ii_and_iii_agree(
        pair in prop::sample::select(vec![("r2", "r2"), ("r2", "cross"), ("cross", "r2"), ("cross", "cross"), ("lines", "r2")]),
        a in map_component(),
        b in map_component(),
    ) {
        let (dx, dy) = (bundled(pair.0).unwrap(), bundled(pair.1).unwrap());
        let f = parse_list(&format!("{a}, {b}"), &ambient_names(2)).unwrap();
        let ii = morphism_probe(&f, &dx, &dy, MorphismMode::Ii, &cfg());
        let iii = morphism_probe(&f, &dx, &dy, MorphismMode::Iii, &cfg());
        match (ii, iii) {
            (Ok(ii), Ok(iii)) => prop_assert_eq!(ii.status, iii.status),
            (Err(_), Err(_)) => {}
            (ii, iii) => prop_assert!(false, "one mode errored: {ii:?} / {iii:?}"),
        }
    }
}

#[test]
fn round_trip_reproduces_every_battery_verdict() {
    for (name, _) in BUNDLED_SPACES {
        let d = bundled(name).unwrap();
        let rt = difflab::diffeology::round_trip(&d, &battery(d.ambient_dim()), &cfg()).unwrap();
        assert!(rt.agree, "{name}");
        assert!(rt.before.iter().any(|s| *s == Status::Pass), "{name}");
    }
}
