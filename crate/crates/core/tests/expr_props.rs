use nlgreen::expr::{
    binomial_parity_identity, check_membership, diff_nonlin, generate_hierarchy, identity_residual,
    parse_nonlin, test_grid, theta_power_identity, Func, Hierarchy, HierarchyError,
    MembershipStatus, Node, NonlinExpr, Sign, TestPath,
};
use proptest::prelude::*;

const MEMBER_FUNCS: [Func; 8] = [
    Func::Sin,
    Func::Tan,
    Func::Sinh,
    Func::Tanh,
    Func::Arcsin,
    Func::Arctan,
    Func::Arcsinh,
    Func::Arctanh,
];

fn any_func() -> impl Strategy<Value = Func> {
    prop::sample::select(Func::ALL.to_vec())
}

fn constant() -> impl Strategy<Value = f64> {
    prop_oneof![(-20i32..20).prop_map(|x| x as f64 / 4.0), -5.0f64..5.0]
}

/// Arbitrary trees over the full grammar.
fn any_node() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![Just(Node::Var), constant().prop_map(Node::constant)];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Node::neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::div(a, b)),
            (inner.clone(), -4i32..6).prop_map(|(a, n)| Node::powi(a, n)),
            (inner.clone(), 0.5f64..3.5)
                .prop_map(|(a, r)| Node::powr(a, (r * 4.0).round() / 4.0 + 0.01)),
            (any_func(), inner).prop_map(|(f, a)| Node::apply(f, a)),
        ]
    })
}

/// Trees built only with the structural closure rules, so always members.
fn member_node() -> impl Strategy<Value = Node> {
    let leaf = prop_oneof![
        (1i32..5).prop_map(|n| Node::powi(Node::Var, n)),
        prop::sample::select(MEMBER_FUNCS.to_vec()).prop_map(|f| Node::apply(f, Node::Var)),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), -3.0f64..3.0)
                .prop_map(|(a, b, c)| Node::add(a, Node::mul(Node::constant(c), b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Node::mul(a, b)),
            (inner.clone(), 2i32..4).prop_map(|(a, n)| Node::powi(a, n)),
            (
                prop::sample::select(vec![Func::Sin, Func::Sinh, Func::Arctan, Func::Tanh]),
                inner
            )
                .prop_map(|(f, a)| Node::apply(f, a)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_then_parse_is_identity(node in any_node()) {
        let e = NonlinExpr::new(node);
        let printed = e.to_string();
        let back = parse_nonlin(&printed).unwrap_or_else(|err| panic!("{printed}: {err}"));
        prop_assert_eq!(&back, &e, "printed as {}", printed);
        prop_assert_eq!(back.to_string(), printed);
    }

    #[test]
    fn structural_members_satisfy_identity(node in member_node(), seed in any::<u64>()) {
        let e = NonlinExpr::new(node);
        let v = check_membership(&e, 1e-9, 4).unwrap();
        prop_assert_eq!(v.status, MembershipStatus::MemberStructural, "{}", e);
        prop_assert_eq!(e.eval(0.0).unwrap(), 0.0);
        let grid = test_grid();
        for mut path in TestPath::draw(4, seed) {
            // shrink into the common domain of tan, arcsin and arctanh
            path.amplitude = 0.05;
            if let Ok(r) = identity_residual(&e, &path, &grid) {
                prop_assert!(r <= 1e-9, "{} residual {}", e, r);
            }
        }
    }

    #[test]
    fn derivative_matches_central_differences(node in any_node(), x in -0.9f64..0.9) {
        let e = NonlinExpr::new(node);
        let de = diff_nonlin(&e);
        let h = 1e-5;
        let (Ok(a), Ok(b), Ok(c), Ok(d)) = (e.eval(x + h), e.eval(x - h), e.eval(x), de.eval(x)) else {
            return Ok(());
        };
        // skip points near a singularity, where differences are meaningless
        let scale = a.abs().max(b.abs()).max(c.abs()).max(1.0);
        prop_assume!(scale < 1e4 && d.abs() < 1e4);
        let (Ok(a2), Ok(b2)) = (e.eval(x + 2.0 * h), e.eval(x - 2.0 * h)) else {
            return Ok(());
        };
        let fd = (8.0 * (a - b) - (a2 - b2)) / (12.0 * h);
        prop_assume!(((a - b) / (2.0 * h) - fd).abs() <= 1e-3 * fd.abs().max(1.0));
        prop_assert!((fd - d).abs() <= 1e-6 * d.abs().max(1.0), "{}: fd {} vs {} at {}", e, fd, d, x);
    }

    #[test]
    fn nonmember_with_nonzero_origin_value(c in 0.1f64..5.0, f in prop::sample::select(MEMBER_FUNCS.to_vec())) {
        let e = NonlinExpr::new(Node::add(Node::apply(f, Node::Var), Node::constant(c)));
        let v = check_membership(&e, 1e-9, 4).unwrap();
        prop_assert_eq!(v.status, MembershipStatus::NonMember);
        prop_assert!(v.witness.unwrap().reproduces(&e, 1e-9));
    }
}

#[test]
fn theta_identity_up_to_32() {
    let mut grid: Vec<f64> = (-12..=12)
        .map(|k| 10f64.powi(k / 2) * if k % 2 == 0 { 1.0 } else { 3.0 })
        .collect();
    grid.extend(grid.clone().iter().map(|t| -t));
    for n in 1..=32 {
        assert!(theta_power_identity(n, &grid), "n = {n}");
        assert!(binomial_parity_identity(n), "n = {n}");
    }
}

#[test]
fn parse_examples() {
    assert_eq!(
        parse_nonlin("w^3").unwrap().root(),
        &Node::powi(Node::Var, 3)
    );
    let e = parse_nonlin("sinh(w)^2 * tanh(w) + w^4").unwrap();
    let expected = Node::add(
        Node::mul(
            Node::powi(Node::apply(Func::Sinh, Node::Var), 2),
            Node::apply(Func::Tanh, Node::Var),
        ),
        Node::powi(Node::Var, 4),
    );
    assert_eq!(e.root(), &expected);
    assert_eq!(parse_nonlin("ln(1+w").unwrap_err().offset(), Some(7));
}

#[test]
fn eval_examples() {
    assert_eq!(parse_nonlin("w^3").unwrap().eval(2.0).unwrap(), 8.0);
    assert_eq!(parse_nonlin("sinh(w)").unwrap().eval(0.0).unwrap(), 0.0);
    let v = parse_nonlin("ln(1+w)")
        .unwrap()
        .eval(std::f64::consts::E - 1.0)
        .unwrap();
    assert!((v - 1.0).abs() < 1e-15);
}

#[test]
fn membership_examples() {
    let v = check_membership(&parse_nonlin("w^3").unwrap(), 1e-9, 8).unwrap();
    assert_eq!(v.status, MembershipStatus::MemberStructural);
    let exp = parse_nonlin("exp(w)").unwrap();
    let v = check_membership(&exp, 1e-9, 8).unwrap();
    assert_eq!(v.status, MembershipStatus::NonMember);
    let w = v.witness.unwrap();
    assert!(w.t < 0.0);
    let v = check_membership(&parse_nonlin("w^2.5").unwrap(), 1e-9, 8).unwrap();
    assert_eq!(v.status, MembershipStatus::MemberNumeric);
}

#[test]
fn hierarchy_examples() {
    let got = generate_hierarchy(
        Hierarchy::PowerSumPower,
        &[3, 2, 2],
        &[Sign::Plus, Sign::Plus],
    )
    .unwrap();
    assert_eq!(got.to_string(), "(w^3 + w^2)^2");
    assert!(check_membership(&got, 1e-9, 4).unwrap().status.is_member());
    let got = generate_hierarchy(Hierarchy::SinhOverPower, &[2, 1], &[]).unwrap();
    assert_eq!(got.to_string(), "sinh(w)^2 / w");
    assert!(check_membership(&got, 1e-9, 4).unwrap().status.is_member());
    assert!(matches!(
        generate_hierarchy(Hierarchy::SinhOverPower, &[1, 2], &[]),
        Err(HierarchyError::Constraint { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hierarchy_members_are_members(
        family in prop::sample::select(Hierarchy::ALL.to_vec()),
        params in prop::collection::vec(1u32..5, 8),
        signs in prop::collection::vec(prop::bool::ANY, 4),
    ) {
        let params = &params[..family.param_count()];
        let signs: Vec<Sign> = signs[..family.sign_count()]
            .iter()
            .map(|&p| if p { Sign::Plus } else { Sign::Minus })
            .collect();
        match generate_hierarchy(family, params, &signs) {
            Ok(e) => {
                let v = check_membership(&e, 1e-9, 4).unwrap();
                prop_assert!(v.status.is_member(), "{} from {:?}: {}", e, params, v.status);
            }
            Err(HierarchyError::Constraint { .. }) => {}
            Err(other) => prop_assert!(false, "{}", other),
        }
    }
}
