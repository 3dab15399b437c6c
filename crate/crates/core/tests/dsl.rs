use proptest::prelude::*;
use rand::Rng;

use wienerlab::chaos::{hermite_value, Ambient};
use wienerlab::dsl::{compile, parse_functional, BinOp, Expr, FunctionalExpr, Lowered};
use wienerlab::{random, Error};

fn squash(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn corpus() -> Vec<String> {
    include_str!("golden/dsl_corpus.txt")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(str::to_string)
        .collect()
}

#[test]
fn corpus_round_trips_up_to_whitespace() {
    let lines = corpus();
    assert_eq!(lines.len(), 100);
    for line in lines {
        let printed = parse_functional(&line).unwrap_or_else(|e| panic!("{line}: {e}")).to_string();
        assert_eq!(squash(&printed), squash(&line));
        // printing is a fixed point
        assert_eq!(parse_functional(&printed).unwrap().to_string(), printed);
    }
}

/// Direct numeric evaluation of the syntax tree.
fn eval(e: &Expr, x: &[f64]) -> f64 {
    match e {
        Expr::Number { text, .. } => text.parse().unwrap(),
        Expr::Var { index, .. } => x[index - 1],
        Expr::Hermite { order, index, .. } => hermite_value(*order, x[index - 1]),
        Expr::Neg { inner, .. } => -eval(inner, x),
        Expr::Paren { inner, .. } => eval(inner, x),
        Expr::Binary { op, lhs, rhs, .. } => {
            let (a, b) = (eval(lhs, x), eval(rhs, x));
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
            }
        }
    }
}

#[test]
fn lowering_agrees_with_pointwise_evaluation() {
    let ambient = Ambient::new(6, 24).unwrap();
    let mut rng = random::rng(5);
    let mut checked = 0;
    for line in corpus() {
        let parsed = parse_functional(&line).unwrap();
        let lowered = match compile(&line, ambient) {
            Ok(l) => l,
            Err(Error::Semantic { .. }) => continue,
            Err(e) => panic!("{line}: {e}"),
        };
        let items: Vec<&Expr> = match &parsed {
            FunctionalExpr::Scalar(e) => vec![e],
            FunctionalExpr::Vector { items, .. } => items.iter().collect(),
        };
        let v = lowered.into_vfield().unwrap();
        for _ in 0..5 {
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
            for (e, p) in items.iter().zip(v.components()) {
                let direct = eval(e, &x);
                let via = p.evaluate(&x).unwrap();
                assert!((direct - via).abs() <= 1e-9 * (1.0 + direct.abs()), "{line}: {direct} vs {via}");
            }
        }
        checked += 1;
    }
    assert!(checked >= 90, "only {checked} corpus lines lowered");
}

#[test]
fn documented_examples() {
    let a2 = Ambient::with_dim(2).unwrap();
    let Lowered::Scalar(p) = compile("x1*x1", Ambient::with_dim(1).unwrap()).unwrap() else { panic!() };
    assert_eq!(p.to_text(), "1\n1 1:2");
    let Lowered::Vector(v) = compile("[x1*x2, h2(x1)]", a2).unwrap() else { panic!() };
    assert_eq!(v.d(), 2);
    assert!(matches!(compile("h9(x1)", a2), Err(Error::Semantic { .. })));
    assert!(matches!(parse_functional("x1*("), Err(Error::Syntax { line: 1, column: 4, .. })));
}

fn atom() -> impl Strategy<Value = String> {
    prop_oneof![
        (0u32..100).prop_map(|n| n.to_string()),
        (0u32..100, 0u32..100).prop_map(|(a, b)| format!("{a}.{b}")),
        (1usize..7).prop_map(|i| format!("x{i}")),
        (0u32..5, 1usize..7).prop_map(|(k, i)| format!("h{k}(x{i})")),
    ]
}

fn source() -> impl Strategy<Value = String> {
    atom().prop_recursive(4, 32, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop_oneof![Just(" + "), Just("-"), Just(" *")])
                .prop_map(|(a, b, op)| format!("{a}{op}{b}")),
            inner.clone().prop_map(|a| format!("({a})")),
            inner.prop_map(|a| format!("-{a}")),
        ]
    })
}

proptest! {
    #[test]
    fn generated_sources_round_trip(s in source()) {
        let printed = parse_functional(&s).unwrap().to_string();
        prop_assert_eq!(squash(&printed), squash(&s));
    }

    #[test]
    fn truncation_is_a_syntax_error_not_a_panic(s in source(), cut in 0usize..64) {
        let cut = cut.min(s.len());
        match parse_functional(&s[..cut]) {
            Ok(_) | Err(Error::Syntax { .. }) => {}
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}
