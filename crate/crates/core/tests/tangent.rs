//! Tangent-structure axioms on random polynomial plaques.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use difflab::convenient::{separation_check, DualPair};
use difflab::diffeology::{FunctionFamily, Plaque};
use difflab::tangent::{
    alpha, alpha_injectivity_probe, equivalent, jet_vector, scalar_mult, TangentClass,
};
use difflab::{BoxDomain, Expr, ProbeConfig};

fn cfg() -> ProbeConfig {
    ProbeConfig::default()
}

/// `point + Σ` monomials of total degree `lo..=hi` in `d` variables, dyadic
/// coefficients so every jet entry is exact.
fn poly_plaque(rng: &mut ChaCha8Rng, point: &[f64], d: usize, lo: usize, hi: usize) -> Vec<Expr> {
    point
        .iter()
        .map(|&b| {
            let mut acc = Expr::Const(b);
            for deg in lo..=hi {
                let c = rng.gen_range(-8..=8) as f64 / 4.0;
                let mut mono = Expr::Const(c);
                for _ in 0..deg {
                    mono = mono * Expr::Var(rng.gen_range(0..d));
                }
                acc = acc + mono;
            }
            acc
        })
        .collect()
}

fn add(a: &[Expr], b: &[Expr]) -> Vec<Expr> {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.clone() + y.clone())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn equivalence_survives_precomposition_and_restriction(seed in any::<u64>(), d in 1usize..=2, n in 1usize..=3) {
        let cfg = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fam = FunctionFamily::coordinates(2);
        let point = [rng.gen_range(-2..=2) as f64 / 2.0, rng.gen_range(-2..=2) as f64 / 2.0];
        let zero = [0.0, 0.0];
        let low = poly_plaque(&mut rng, &point, d, 1, n);
        let high = poly_plaque(&mut rng, &zero, d, n + 1, n + 1);
        let dom = BoxDomain::cube(d, 10.0);
        let p1 = Plaque::new("p1", dom.clone(), low.clone()).unwrap();
        let p2 = Plaque::new("p2", dom, add(&low, &high)).unwrap();
        prop_assert!(equivalent(&p1, &p2, &point, &fam, n, &cfg).unwrap());

        // φ(0) = 0, no constant terms.
        let phi: Vec<Expr> = poly_plaque(&mut rng, &vec![0.0; d], d, 1, 3);
        let small = BoxDomain::cube(d, 0.25);
        let a = p1.precompose("p1∘φ", &phi, small.clone()).unwrap();
        let b = p2.precompose("p2∘φ", &phi, small).unwrap();
        prop_assert!(equivalent(&a, &b, &point, &fam, n, &cfg).unwrap());

        let r = Plaque::new("p1|V", BoxDomain::cube(d, rng.gen_range(0.01..1.0)), p1.exprs.clone()).unwrap();
        let (j, jr) = (jet_vector(&p1, &point, &fam, n, &cfg).unwrap(), jet_vector(&r, &point, &fam, n, &cfg).unwrap());
        prop_assert_eq!(j.entries, jr.entries);
    }

    #[test]
    fn equivalence_is_an_equivalence_relation(seed in any::<u64>(), n in 1usize..=3) {
        let cfg = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fam = FunctionFamily::coordinates(2);
        let point = [0.5, -1.0];
        let dom = BoxDomain::cube(1, 10.0);
        let base = poly_plaque(&mut rng, &point, 1, 1, n);
        let ps: Vec<Plaque> = (0..3)
            .map(|i| {
                let tail = poly_plaque(&mut rng, &[0.0, 0.0], 1, n + 1, n + 2);
                // For a third of the seeds, p2 differs from the others at order n.
                let tail = if i == 2 && seed % 3 == 0 {
                    add(&tail, &[Expr::Var(0).powi(n as i32), Expr::Const(0.0)])
                } else {
                    tail
                };
                Plaque::new(format!("p{i}"), dom.clone(), add(&base, &tail)).unwrap()
            })
            .collect();
        let eq = |i: usize, j: usize| equivalent(&ps[i], &ps[j], &point, &fam, n, &cfg).unwrap();
        for i in 0..3 {
            prop_assert!(eq(i, i));
            for j in 0..3 {
                prop_assert_eq!(eq(i, j), eq(j, i));
                for k in 0..3 {
                    if eq(i, j) && eq(j, k) {
                        prop_assert!(eq(i, k));
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_is_linear(u in prop::array::uniform3(-8i32..=8), v in prop::array::uniform3(-8i32..=8), seed in any::<u64>()) {
        let cfg = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ls: Vec<Vec<f64>> = (0..rng.gen_range(1..=4)).map(|_| (0..3).map(|_| rng.gen_range(-4..=4) as f64).collect()).collect();
        let Ok(pair) = DualPair::new(3, ls) else { return Ok(()) };
        let (u, v): (Vec<f64>, Vec<f64>) = (u.iter().map(|&x| x as f64).collect(), v.iter().map(|&x| x as f64).collect());
        let uv: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let o = [0.0; 3];
        let (ju, jv, juv) = (
            alpha(&u, &o, &pair, &cfg).unwrap().jet,
            alpha(&v, &o, &pair, &cfg).unwrap().jet,
            alpha(&uv, &o, &pair, &cfg).unwrap().jet,
        );
        let sum: Vec<f64> = ju.entries.iter().zip(&jv.entries).map(|(a, b)| a + b).collect();
        prop_assert_eq!(juv.entries, sum);
    }

    #[test]
    fn alpha_injective_exactly_when_separated(seed in any::<u64>()) {
        let cfg = cfg();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.gen_range(1..=4);
        let q = rng.gen_range(1..=4);
        let mut ls: Vec<Vec<f64>> = (0..q).map(|_| (0..dim).map(|_| rng.gen_range(-2..=2) as f64).collect()).collect();
        if q >= 2 && rng.gen_bool(0.5) {
            ls[q - 1] = ls[0].iter().zip(&ls[1]).map(|(a, b)| a - b).collect();
        }
        let Ok(pair) = DualPair::new(dim, ls) else { return Ok(()) };
        let a = alpha_injectivity_probe(&pair, 10, &cfg).unwrap();
        prop_assert_eq!(a.status, separation_check(&pair, &cfg).status);
    }
}

#[test]
fn scalar_multiples_scale_first_order_entries() {
    let cfg = cfg();
    let fam = FunctionFamily::parse(
        2,
        &[("x", "x"), ("y", "y"), ("xy", "x*y"), ("s", "sin(x) + y^2")],
    )
    .unwrap();
    let point = [0.5, -0.25];
    let rep = Plaque::new(
        "c",
        BoxDomain::cube(1, 1.0),
        difflab::expr::parse_list("0.5 + 2*t - t^2, -0.25 + 3*t^3 + t", &["t".to_string()])
            .unwrap(),
    )
    .unwrap();
    let cls = TangentClass::new(rep, &point, &fam, 2, &cfg).unwrap();
    for c in [-2.0, -1.0, 0.0, 0.5, 3.0] {
        let scaled = scalar_mult(c, &cls);
        let want: Vec<f64> = cls.jet.first_order().iter().map(|x| c * x).collect();
        assert_eq!(scaled.jet.first_order(), want, "c = {c}");
    }
}
