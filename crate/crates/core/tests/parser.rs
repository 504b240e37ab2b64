use mpsl_core::expr::{parse_expr, BinOp, Constant, Expr, Func, Var};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0u32..1000).prop_map(|n| Expr::Num(n as f64)),
        (0.0f64..1e6).prop_map(Expr::Num),
        (-30i32..30).prop_map(|p| Expr::Num(10f64.powi(p) * 1.25)),
        Just(Expr::Var(Var::Xi)),
        Just(Expr::Var(Var::X)),
        Just(Expr::Const(Constant::Pi)),
        Just(Expr::Const(Constant::E)),
    ]
}

fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(6, 48, 2, |inner| {
        let op = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Pow)
        ];
        prop_oneof![
            (op, inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::bin(o, l, r)),
            inner.clone().prop_map(Expr::neg),
            (0usize..Func::ALL.len(), inner).prop_map(|(i, e)| Expr::call(Func::ALL[i], e)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn print_parse_round_trip(e in tree()) {
        let text = e.to_string();
        let back = parse_expr(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        prop_assert_eq!(&back, &e, "printed as {}", text);
        prop_assert_eq!(back.to_string(), text);
    }
}

#[test]
fn precedence_fixtures() {
    let xi = 0.7f64;
    let cases: [(&str, f64); 10] = [
        ("-2^2", 4.0),
        ("2^3^2", 512.0),
        ("1 - 2 - 3", -4.0),
        ("8/4/2", 1.0),
        ("2*3 + 4*5", 26.0),
        ("2 + 3*4^2", 50.0),
        ("-xi^2", xi * xi),
        ("(1 - xi)*(1 + xi)", 1.0 - xi * xi),
        ("xi*(1 + 3/(1 + xi^2))", xi * (1.0 + 3.0 / (1.0 + xi * xi))),
        ("2^-1", 0.5),
    ];
    for (text, want) in cases {
        let got = parse_expr(text).unwrap().eval(xi);
        assert!((got - want).abs() <= 1e-14 * want.abs().max(1.0), "{text}: {got} vs {want}");
    }
}

#[test]
fn error_positions() {
    assert_eq!(parse_expr("2*+3").unwrap_err().position(), 2);
    assert_eq!(parse_expr("xi + foo").unwrap_err().position(), 5);
    assert!(parse_expr("sin(xi").is_err());
    assert!(parse_expr("1 +").is_err());
    assert!(parse_expr("()").is_err());
}
