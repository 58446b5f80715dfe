use std::collections::HashMap;

use finsler_ricci::expr::{
    differentiate, evaluate, parse, simplify, substitute, BinaryOp, Bindings, Expr, ExprError, Rational, UnaryOp, Var,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VARS: [&str; 5] = ["x1", "x2", "y1", "y2", "t"];

fn bindings(vals: &[f64]) -> Bindings {
    Bindings::from_pairs(VARS.iter().zip(vals).map(|(n, v)| (Var::from_name(n), *v)))
}

fn with(b: &Bindings, v: &Var, value: f64) -> Bindings {
    b.clone().with(v.clone(), value)
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (1..=2usize).prop_map(Expr::x),
        (1..=2usize).prop_map(Expr::y),
        Just(Expr::t()),
        (-4i32..=4).prop_map(|k| Expr::constant(k as f64 / 2.0)),
    ]
}

fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        let bin = |op| (inner.clone(), inner.clone()).prop_map(move |(a, b)| Expr::raw_binary(op, a, b));
        let un = |op| inner.clone().prop_map(move |a| Expr::raw_unary(op, a));
        prop_oneof![
            bin(BinaryOp::Add),
            bin(BinaryOp::Sub),
            bin(BinaryOp::Mul),
            bin(BinaryOp::Div),
            un(UnaryOp::Neg),
            un(UnaryOp::Sqrt),
            un(UnaryOp::Exp),
            un(UnaryOp::Log),
            un(UnaryOp::Sin),
            un(UnaryOp::Cos),
            (inner.clone(), prop_oneof![Just((2, 1)), Just((3, 1)), Just((-1, 1)), Just((1, 2)), Just((-3, 2))])
                .prop_map(|(a, (p, q))| Expr::raw_pow(a, Rational::new(p, q))),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 5)
}

fn var_index() -> impl Strategy<Value = usize> {
    0..VARS.len()
}

/// Central difference with step `h`, `None` if any evaluation fails.
fn central(e: &Expr, b: &Bindings, v: &Var, h: f64) -> Option<f64> {
    let x = b.get(v).unwrap();
    let p = evaluate(e, &with(b, v, x + h)).ok()?;
    let m = evaluate(e, &with(b, v, x - h)).ok()?;
    Some((p - m) / (2.0 * h))
}

#[test]
fn parse_examples() {
    let e = parse("y1^2 + y2^2").unwrap();
    let expected = Expr::raw_binary(
        BinaryOp::Add,
        Expr::raw_pow(Expr::y(1), Rational::integer(2)),
        Expr::raw_pow(Expr::y(2), Rational::integer(2)),
    );
    assert_eq!(e, expected);
    assert!(matches!(parse("y1^"), Err(ExprError::Syntax { offset: 3, .. })));
    assert!(matches!(parse("foo(y1)"), Err(ExprError::UnknownFunction { .. })));
    assert!(matches!(parse("1.2.3"), Err(ExprError::MalformedNumber { .. })));
}

#[test]
fn round_trip_corpus() {
    let corpus = [
        "y1^2 + y2^2",
        "sqrt(y1^2+y2^2) + 0.5*y1",
        "4*(y1^2+y2^2)/(1+x1^2+x2^2)^2",
        "(sqrt(y1^2+y2^2) + 0.1*(y1 + x1*y2))^2",
        "x1 - x2 - y1",
        "x1 - (x2 - y1)",
        "x1/x2/y1",
        "x1/(x2/y1)",
        "x1*x2*y1",
        "x1*(x2*y1)",
        "-x1",
        "-(x1+x2)",
        "-x1^2",
        "(-x1)^2",
        "x1^(1/3)",
        "x1^(-2)",
        "x1^(-3/2)",
        "exp(x1)*log(y1^2+1)",
        "sin(t*x1)+cos(t*x2)",
        "sqrt(sqrt(y1^4+y2^4))",
        "(y1^4+y2^4)^(1/2)",
        "2.5e-3*y1",
        "1e3 + x1",
        "0.125",
        "t",
        "a*b + c",
        "y1*-y2",
        "y1 - -3",
        "exp(-t)*(x1^2 + x2^2)",
        "(x1 + 1)*(x1 - 1)/(x1^2 + 3)",
        "log(exp(x1))",
        "((y1))",
        "(x1^2)^3",
    ];
    assert!(corpus.len() >= 30);
    for src in corpus {
        let e = match parse(src) {
            Ok(e) => e,
            Err(err) => panic!("{src}: {err}"),
        };
        let printed = e.to_string();
        assert_eq!(parse(&printed).unwrap(), e, "{src} printed as {printed}");
        let s = simplify(&e);
        assert_eq!(parse(&s.to_string()).unwrap(), s, "simplified {src} printed as {s}");
    }
}

#[test]
fn derivative_examples() {
    let e = parse("y1^2 + y2^2").unwrap();
    let d = differentiate(&e, &Var::Y(1));
    let b = Bindings::from_pairs([(Var::Y(1), 1.7), (Var::Y(2), -0.3)]);
    assert_eq!(evaluate(&d, &b).unwrap(), 3.4);
    assert!(differentiate(&e, &Var::X(1)).is_zero());

    let r = parse("sqrt(y1^2+y2^2)").unwrap();
    let b = Bindings::from_pairs([(Var::Y(1), 3.0), (Var::Y(2), 4.0)]);
    let exact = evaluate(&differentiate(&r, &Var::Y(1)), &b).unwrap();
    assert!((exact - 0.6).abs() < 1e-15);
    let fd = central(&r, &b, &Var::Y(1), 1e-5).unwrap();
    assert!((exact - fd).abs() / 0.6 < 1e-6);
}

#[test]
fn simplify_examples() {
    assert_eq!(simplify(&parse("0 + 1*y1").unwrap()), Expr::y(1));
    assert!(simplify(&parse("y1 - y1").unwrap()).is_zero());
    assert_eq!(
        simplify(&parse("2*(3*y1)").unwrap()),
        Expr::raw_binary(BinaryOp::Mul, Expr::constant(6.0), Expr::y(1))
    );
}

#[test]
fn substitution_examples() {
    let e = parse("y1^2").unwrap();
    let s = substitute(&e, &HashMap::from([(Var::Y(1), parse("2*y1").unwrap())]));
    let b = Bindings::from_pairs([(Var::Y(1), 0.7)]);
    assert!((evaluate(&s, &b).unwrap() - 4.0 * 0.49).abs() < 1e-15);

    let e = parse("x1*y1").unwrap();
    let map = HashMap::from([(Var::X(1), parse("x1+t*x1").unwrap()), (Var::Y(1), parse("y1+t*y1").unwrap())]);
    let s = substitute(&e, &map);
    let expected = parse("(x1+t*x1)*(y1+t*y1)").unwrap();
    let b = bindings(&[0.3, 0.0, -1.1, 0.0, 0.4]);
    assert_eq!(evaluate(&s, &b).unwrap(), evaluate(&expected, &b).unwrap());
}

#[test]
fn rotation_invariance_of_euclidean_square() {
    let theta: f64 = 0.83;
    let (s, c) = theta.sin_cos();
    let rot = |a: &str, b: &str| parse(&format!("{c}*{a} - {s}*{b}")).unwrap();
    let rot2 = |a: &str, b: &str| parse(&format!("{s}*{a} + {c}*{b}")).unwrap();
    let map = HashMap::from([
        (Var::X(1), rot("x1", "x2")),
        (Var::X(2), rot2("x1", "x2")),
        (Var::Y(1), rot("y1", "y2")),
        (Var::Y(2), rot2("y1", "y2")),
    ]);
    let f0 = parse("y1^2 + y2^2").unwrap();
    let pulled = simplify(&substitute(&f0, &map));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let vals: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b = bindings(&vals);
        let (a, e) = (evaluate(&pulled, &b).unwrap(), evaluate(&f0, &b).unwrap());
        assert!((a - e).abs() <= 1e-12 * e.max(1.0));
    }
}

#[test]
fn evaluation_examples() {
    let b = Bindings::from_pairs([(Var::Y(1), 3.0), (Var::Y(2), 4.0)]);
    assert_eq!(evaluate(&parse("y1^2+y2^2").unwrap(), &b).unwrap(), 25.0);
    let b = Bindings::from_pairs([(Var::Y(1), 0.6), (Var::Y(2), 0.8)]);
    assert!((evaluate(&parse("sqrt(y1^2+y2^2)").unwrap(), &b).unwrap() - 1.0).abs() < 1e-15);
    let b = Bindings::from_pairs([(Var::Y(1), 1.0), (Var::X(1), 0.0)]);
    assert!(matches!(evaluate(&parse("y1/x1").unwrap(), &b), Err(ExprError::Domain { .. })));
}

/// Each node type separately, 100 seeded bindings, central differences
/// with `h = 1e-5`.
#[test]
fn derivative_of_every_node_type() {
    let cases = [
        "x1 + y1*x2",
        "x1 - y1*x2",
        "x1*y1*x2",
        "(1 + x1^2)/(2 + y1^2)",
        "-(x1*y2)",
        "sqrt(1 + x1^2 + y1^2)",
        "exp(0.3*x1 - 0.5*y1)",
        "log(3 + x1 + y1*y2)",
        "sin(x1*y1 + t)",
        "cos(x2 - y2*t)",
        "(1.5 + x1*y1)^(3/2)",
        "(2 + sin(y1))^(-2)",
        "(x1^2 + y2^2 + 1)^(-1/3)",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for src in cases {
        let e = parse(src).unwrap();
        for v in VARS.iter().map(|n| Var::from_name(n)) {
            let d = differentiate(&e, &v);
            for _ in 0..100 {
                let vals: Vec<f64> = (0..5).map(|_| rng.gen_range(-0.9..0.9)).collect();
                let b = bindings(&vals);
                let exact = evaluate(&d, &b).unwrap();
                let fd = central(&e, &b, &v, 1e-5).unwrap();
                assert!(
                    (exact - fd).abs() <= 1e-6 * exact.abs().max(1.0),
                    "{src} d/d{v}: {exact} vs {fd}"
                );
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn printing_round_trips(e in tree()) {
        prop_assert_eq!(parse(&e.to_string()).unwrap(), e.clone());
        let s = simplify(&e);
        prop_assert_eq!(parse(&s.to_string()).unwrap(), s);
    }

    #[test]
    fn simplify_preserves_value(e in tree(), p in point()) {
        let b = bindings(&p);
        if let Ok(v) = evaluate(&e, &b) {
            let s = evaluate(&simplify(&e), &b).unwrap();
            prop_assert!((s - v).abs() <= 1e-12 * (1.0 + v.abs()), "{} -> {}: {} vs {}", e, simplify(&e), v, s);
        }
    }

    #[test]
    fn evaluation_is_deterministic(e in tree(), p in point()) {
        let b = bindings(&p);
        prop_assert_eq!(evaluate(&e, &b), evaluate(&e, &b));
    }

    #[test]
    fn derivative_matches_central_difference(e in tree(), p in point(), vi in var_index()) {
        let b = bindings(&p);
        let v = Var::from_name(VARS[vi]);
        let exact = evaluate(&differentiate(&e, &v), &b);
        let fd = central(&e, &b, &v, 1e-5);
        let fd2 = central(&e, &b, &v, 2e-5);
        // only well-conditioned points: the oracle must agree with itself
        if let (Ok(exact), Some(fd), Some(fd2)) = (exact, fd, fd2) {
            prop_assume!((fd - fd2).abs() <= 1e-8 * (1.0 + fd.abs()));
            prop_assert!((exact - fd).abs() <= 1e-6 * (1.0 + fd.abs()), "{}: {} vs {}", e, exact, fd);
        }
    }

    #[test]
    fn partial_derivatives_commute(e in tree(), p in point(), u in var_index(), w in var_index()) {
        let b = bindings(&p);
        let (u, w) = (Var::from_name(VARS[u]), Var::from_name(VARS[w]));
        let uw = evaluate(&differentiate(&differentiate(&e, &u), &w), &b);
        let wu = evaluate(&differentiate(&differentiate(&e, &w), &u), &b);
        if let (Ok(a), Ok(c)) = (uw, wu) {
            prop_assert!((a - c).abs() <= 1e-9 * (1.0 + a.abs().max(c.abs())), "{}: {} vs {}", e, a, c);
        }
    }
}
