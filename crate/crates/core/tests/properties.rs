use std::collections::HashMap;

use proptest::prelude::*;

use jetinv::equiv::relative_gap;
use jetinv::expr::{parse, probabilistic_equal, Expression, PowerMode, Rational, Var};
use jetinv::jets::{restrict_to_section, Base, Bundle, Section};
use jetinv::reduction::{family_to_section, CurveFamily};
use jetinv::sl3::{ProjectiveMap, Sl3Element};

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        Just("p".to_string()),
        (-4i64..=4).prop_map(|n| format!("({n})")),
    ]
}

/// Expression text whose denominators stay positive on the positive octant.
fn expr_text() -> impl Strategy<Value = String> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} - {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/(({b})^2 + 1)")),
            (inner, 0u32..3).prop_map(|(a, k)| format!("({a})^{k}")),
        ]
    })
}

fn poly_text(vars: &'static [&'static str]) -> impl Strategy<Value = String> {
    prop::collection::vec((-3i64..=3, 0usize..vars.len(), 0usize..vars.len()), 1..5).prop_map(move |terms| {
        terms
            .iter()
            .map(|(c, i, j)| format!("({c})*{}*{}", vars[*i], vars[*j]))
            .collect::<Vec<_>>()
            .join(" + ")
    })
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    [1.0f64..2.0, 1.0f64..2.0, 1.0f64..2.0]
}

fn eval_at(e: &Expression, pt: [f64; 3]) -> f64 {
    let values: HashMap<Var, f64> = Base::ALL.iter().map(|b| (b.var(), pt[b.index()])).collect();
    e.eval_f64(&values, PowerMode::Abs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn printing_round_trips(text in expr_text()) {
        let e = parse(&text).unwrap();
        prop_assert_eq!(parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn derivative_matches_central_differences(text in expr_text(), pt in point(), axis in 0usize..3) {
        let e = parse(&text).unwrap();
        let d = e.differentiate(Base::ALL[axis].var());
        let h = 1e-5;
        let (mut lo, mut hi) = (pt, pt);
        lo[axis] -= h;
        hi[axis] += h;
        let fd = (eval_at(&e, hi) - eval_at(&e, lo)) / (2.0 * h);
        let exact = eval_at(&d, pt);
        let scale = 1.0 + exact.abs() + eval_at(&e, pt).abs();
        prop_assert!((fd - exact).abs() <= 1e-6 * scale, "{fd} vs {exact}");
    }

    #[test]
    fn probabilistic_agrees_with_canonical(a in expr_text(), b in expr_text(), seed in 0u64..1000) {
        let (ea, eb) = (parse(&a).unwrap(), parse(&b).unwrap());
        let canonical = ea == eb;
        prop_assert_eq!(probabilistic_equal(&ea, &eb, 8, seed).unwrap(), canonical);
        let shifted = &(&ea + &eb) - &eb;
        prop_assert!(probabilistic_equal(&ea, &shifted, 8, seed).unwrap());
    }

    #[test]
    fn restriction_commutes_with_total_derivative(
        f in poly_text(&["x", "y", "p", "1"]),
        jet in poly_text(&["f", "f_x", "f_p", "x", "p", "1"]),
        axis in 0usize..3,
    ) {
        let bundle = Bundle::pitilde();
        let s = Section::pitilde(parse(&f).unwrap());
        let e = parse(&jet).unwrap();
        let v = Base::ALL[axis];
        let lhs = restrict_to_section(&bundle.total_derivative(&e, v).unwrap(), &s).unwrap();
        let rhs = restrict_to_section(&e, &s).unwrap().differentiate(v.var());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn reparametrization_invariance(phi in poly_text(&["a", "b", "1"]), psi in poly_text(&["a", "b", "1"])) {
        let phi = parse(&phi).unwrap() + parse("a").unwrap();
        let psi = parse(&psi).unwrap() + parse("b").unwrap();
        let (a, b) = (Var::named("a"), Var::named("b"));
        let jac = &phi.differentiate(a) * &psi.differentiate(b) - &phi.differentiate(b) * &psi.differentiate(a);
        prop_assume!(!jac.is_zero());
        let fam = CurveFamily::new(parse("y - p*x").unwrap(), parse("p + x*y").unwrap());
        let base = family_to_section(&fam).unwrap();
        let moved = family_to_section(&fam.reparametrize(&phi, &psi).unwrap()).unwrap();
        prop_assert_eq!(base.component("f"), moved.component("f"));
        prop_assert_eq!(base.component("g"), moved.component("g"));
    }

    #[test]
    fn integrals_give_the_equation(
        k in -4i64..=4,
        phi in poly_text(&["a", "b", "1"]),
        psi in poly_text(&["a", "b", "1"]),
    ) {
        // integrals of the flow of y'' = k
        let fam = CurveFamily::new(
            parse(&format!("y - p*x + ({k})*x^2/2")).unwrap(),
            parse(&format!("p - ({k})*x")).unwrap(),
        );
        let phi = parse(&phi).unwrap() + parse("a").unwrap();
        let psi = parse(&psi).unwrap() + parse("b").unwrap();
        let (a, b) = (Var::named("a"), Var::named("b"));
        let jac = &phi.differentiate(a) * &psi.differentiate(b) - &phi.differentiate(b) * &psi.differentiate(a);
        prop_assume!(!jac.is_zero());
        let s = family_to_section(&fam.reparametrize(&phi, &psi).unwrap()).unwrap();
        prop_assert_eq!(s.component("f").unwrap(), &Expression::int(k));
        prop_assert_eq!(s.component("g").unwrap(), &parse("p").unwrap());
    }

    #[test]
    fn projective_map_inverts(params in prop::array::uniform8(-8i64..=8), pt in point()) {
        let params: [Rational; 8] = params.map(|k| Rational::new(k.into(), 8.into()));
        let eps = Rational::new(1.into(), 4.into());
        let m = ProjectiveMap::near_identity(&Sl3Element::from_rationals(&params), &eps).unwrap();
        if let Some(q) = m.apply_point(pt) {
            if let Some(back) = m.inverse().apply_point(q) {
                for k in 0..3 {
                    prop_assert!(relative_gap(back[k], pt[k]) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn relative_gap_is_a_symmetric_gap(a in -1e6f64..1e6, b in -1e6f64..1e6) {
        prop_assert_eq!(relative_gap(a, b), relative_gap(b, a));
        prop_assert!(relative_gap(a, b) >= 0.0);
        prop_assert_eq!(relative_gap(a, a), 0.0);
    }
}
