//! Weak derivatives and integrals, Mackey convergence and `δ^k` on curves
//! in finite-dimensional dual pairs.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use difflab::convenient::{
    mackey_convergence_probe, ordinary_cauchy, separation_check, weak_derivative, weak_integral,
    DualPair, SampledCurve, SequenceTerms, VectorSequence,
};
use difflab::expr::parse;
use difflab::jet::factorial;
use difflab::random::smooth_expr;
use difflab::{delta_k, taylor_eval, Expr, NodeTuple, PolyPath, ProbeConfig};

fn cfg() -> ProbeConfig {
    ProbeConfig::default()
}

fn random_pair(rng: &mut ChaCha8Rng, dim: usize) -> Option<DualPair> {
    let q = rng.gen_range(1..=dim + 1);
    let mut ls: Vec<Vec<f64>> = (0..q)
        .map(|_| (0..dim).map(|_| rng.gen_range(-3..=3) as f64).collect())
        .collect();
    if q >= 2 && rng.gen_bool(0.4) {
        ls[q - 1] = ls[0].iter().zip(&ls[1]).map(|(a, b)| 2.0 * a + b).collect();
    }
    DualPair::new(dim, ls).ok()
}

fn random_curve(rng: &mut ChaCha8Rng, m: usize) -> SampledCurve {
    SampledCurve::new((0..m).map(|_| smooth_expr(rng, 1, 3)).collect(), -1.0, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn weak_derivative_is_unique_exactly_when_separated(seed in any::<u64>(), dim in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let Some(pair) = random_pair(&mut rng, dim) else { return Ok(()) };
        let c = random_curve(&mut rng, dim);
        let t = rng.gen_range(-0.5..0.5);
        let w = weak_derivative(&c, t, &pair, &cfg());
        prop_assume!(w.is_ok());
        let w = w.unwrap();
        prop_assert_eq!(w.unique, separation_check(&pair, &cfg()).is_pass());
        prop_assert_eq!(w.kernel.is_empty(), w.unique);
        for k in &w.kernel {
            prop_assert!(pair.apply(k).iter().all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn integral_of_derivative_recovers_increment(seed in any::<u64>(), m in 1usize..=3, kink in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = random_curve(&mut rng, m);
        if kink {
            // C¹, not C², at an interior point.
            c.exprs[0] = c.exprs[0].clone() + parse("(t - 0.1)*abs(t - 0.1)", &["t".to_string()]).unwrap();
        }
        let (a, b) = (rng.gen_range(-1.0..0.0), rng.gen_range(0.0..1.0));
        let (ca, cb) = (c.eval(a), c.eval(b));
        prop_assume!(ca.is_ok() && cb.is_ok());
        let w = weak_integral(&c.derivative().unwrap(), a, b, &DualPair::full(m), &cfg());
        prop_assume!(w.is_ok());
        let w = w.unwrap();
        for ((v, x), y) in w.value.iter().zip(cb.unwrap()).zip(ca.unwrap()) {
            prop_assert!((v - (x - y)).abs() <= 1e-8, "{v} vs {}", x - y);
        }
    }

    #[test]
    fn ordinary_limits_are_mackey_limits(seed in any::<u64>(), dim in 1usize..=3, geometric in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let limit: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let n = Expr::Var(0);
        let terms: Vec<Expr> = limit
            .iter()
            .map(|&l| {
                let a = rng.gen_range(-5.0..5.0);
                let decay = if geometric {
                    (n.clone() * Expr::Const(rng.gen_range(0.1f64..0.95).ln())).exp()
                } else {
                    n.clone().powi(-rng.gen_range(1..=3))
                };
                Expr::Const(l) + Expr::Const(a) * decay
            })
            .collect();
        let seq = VectorSequence { terms: SequenceTerms::Closed(terms), limit };
        let pair = DualPair::full(dim);
        prop_assert!(ordinary_cauchy(&seq, &pair, 10_000).unwrap());
        prop_assert!(mackey_convergence_probe(&seq, &pair, 10_000).unwrap().is_pass());
    }

    #[test]
    fn delta_of_composite_tends_to_derivative(seed in any::<u64>(), order in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_curve(&mut rng, 2);
        let l = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let lc = c.compose(&l).unwrap();
        let t = rng.gen_range(-0.5..0.5);
        let h = 1e-3;
        // Symmetric nodes around t at spacing h.
        let nodes: Vec<f64> = (0..=order).map(|j| t + h * (j as f64 - order as f64 / 2.0)).collect();
        let delta = delta_k(&lc, &NodeTuple::new(nodes).unwrap());
        let jet = taylor_eval(&lc, &PolyPath::line(&[t], &[1.0]), order);
        prop_assume!(delta.is_ok() && jet.is_ok());
        let exact = factorial(order) * jet.unwrap().coeffs[order];
        let delta = delta.unwrap();
        prop_assert!((delta - exact).abs() <= 1e-4 * exact.abs().max(1.0), "{delta} vs {exact}");
    }
}
