use std::collections::HashMap;
use std::f64::consts::PI;

use adaptive_levin::expr::{parse, parse_with_params, BinOp, Constant, Expr, Func};
use adaptive_levin::reference::{named, IntegralId};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0.0f64..1e6).prop_map(Expr::Num),
        (1e-300f64..1e300).prop_map(Expr::Num),
        Just(Expr::Var),
        Just(Expr::Const(Constant::Pi)),
        Just(Expr::Const(Constant::E)),
        prop_oneof![Just("lambda"), Just("m"), Just("kappa")].prop_map(|s| Expr::Param(s.to_string())),
    ]
}

fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 48, 2, |inner| {
        let op = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Pow)
        ];
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (op, inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::Binary(o, Box::new(l), Box::new(r))),
            (0..Func::ALL.len(), inner.clone(), inner).prop_map(|(i, a, b)| {
                let f = Func::ALL[i];
                let args = if f.arity() == 2 { vec![a, b] } else { vec![a] };
                Expr::Call(f, args)
            }),
        ]
    })
}

proptest! {
    #[test]
    fn print_parse_round_trip(e in tree()) {
        let printed = e.to_string();
        let back = parse(&printed).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(back.to_string(), printed);
    }

    #[test]
    fn whitespace_is_insignificant(e in tree()) {
        let printed = e.to_string();
        // numbers and identifiers must stay contiguous, so only pad around punctuation
        let padded: String = printed
            .chars()
            .map(|c| if "()+-*/^,".contains(c) { format!(" {c} ") } else { c.to_string() })
            .collect();
        prop_assert_eq!(parse(&padded).unwrap(), e);
    }
}

type Family = (&'static str, Box<dyn Fn(f64, f64, f64) -> f64>, (f64, f64));

/// Each catalog expression against a hand-written closure `(x, lambda, m)`.
fn families() -> Vec<Family> {
    vec![
        ("1/(1+x^2)", Box::new(|x, _, _| 1.0 / (1.0 + x * x)), (-1.0, 1.0)),
        ("lambda*atan(x)", Box::new(|x, l, _| l * x.atan()), (-1.0, 1.0)),
        ("1/sqrt(x)", Box::new(|x, _, _| 1.0 / x.sqrt()), (1e-3, 10.0)),
        ("lambda*x^2", Box::new(|x, l, _| l * x * x), (-1.0, 1.0)),
        ("1/x", Box::new(|x, _, _| 1.0 / x), (1e-3, 1.0)),
        ("lambda/sqrt(x)", Box::new(|x, l, _| l / x.sqrt()), (1e-3, 1.0)),
        ("exp(x)", Box::new(|x, _, _| x.exp()), (0.0, 10.0)),
        ("lambda*exp(x)", Box::new(|x, l, _| l * x.exp()), (0.0, 10.0)),
        ("exp(-x)*x", Box::new(|x, _, _| (-x).exp() * x), (0.0, 1.0)),
        ("1+x^2", Box::new(|x, _, _| 1.0 + x * x), (-1.0, 1.0)),
        (
            "1/(0.01+x^4)",
            Box::new(|x, _, _| 1.0 / (0.01 + x.powi(4))),
            (-1.0, 1.0),
        ),
        ("lambda*x^4", Box::new(|x, l, _| l * x.powi(4)), (-1.0, 1.0)),
        (
            "cos(x)/(1+x^2)",
            Box::new(|x, _, _| x.cos() / (1.0 + x * x)),
            (-1.0, 1.0),
        ),
        ("lambda*x^m", Box::new(|x, l, m| l * x.powi(m as i32)), (-1.0, 1.0)),
        (
            "lambda*cos(pi/2*m*x)^2",
            Box::new(|x, l, m| l * (PI / 2.0 * m * x).cos().powi(2)),
            (-1.0, 1.0),
        ),
    ]
}

#[test]
fn catalog_expressions_match_closures() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (src, closure, (lo, hi)) in families() {
        let e = parse_with_params(src, &["lambda", "m"]).unwrap();
        for _ in 0..1000 {
            let x = rng.gen_range(lo..hi);
            let l = 10f64.powf(rng.gen_range(0.0..7.0));
            let m = rng.gen_range(2..10) as f64;
            let p = HashMap::from([("lambda".to_string(), l), ("m".to_string(), m)]);
            let got = e.eval(x, &p).unwrap();
            let want = closure(x, l, m);
            let rel = (got - want).abs() / want.abs().max(f64::MIN_POSITIVE);
            assert!(
                rel <= 1e-15 || (got - want).abs() <= 1e-15,
                "{src} at x={x}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn i21_expressions_match_closures() {
    let entry = named(IntegralId::I21);
    let f = parse_with_params(entry.f_expr, entry.params).unwrap();
    let g = parse_with_params(entry.g_exprs[0], entry.params).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let x = rng.gen_range(-PI..PI);
        let (kappa, m, alpha) = (
            rng.gen_range(1.0..1e3),
            rng.gen_range(1.0..1e3),
            rng.gen_range(0.0..0.99),
        );
        let p = HashMap::from([
            ("kappa".to_string(), kappa),
            ("m".to_string(), m),
            ("alpha".to_string(), alpha),
        ]);
        let s = (1.0 - alpha * x.cos()).sqrt();
        let fv = f.eval(x, &p).unwrap();
        let gv = g.eval(x, &p).unwrap();
        assert!((fv - 1.0 / s).abs() <= 1e-15 * fv.abs());
        let want = m * x - kappa * s;
        assert!((gv - want).abs() <= 1e-15 * (m * x).abs().max(kappa * s));
    }
}

#[test]
fn binding_and_parameters() {
    let e = parse("lambda*x^m + kappa").unwrap();
    assert_eq!(e.params(), vec!["kappa", "lambda", "m"]);
    let p = HashMap::from([
        ("lambda".to_string(), 2.0),
        ("m".to_string(), 3.0),
        ("kappa".to_string(), 1.0),
    ]);
    let b = e.bind(&p).unwrap();
    assert_eq!(b.eval(2.0), 17.0);
    assert!(e.bind(&HashMap::new()).is_err());
}
