//! Corrected forms of the identities that fail as listed.

use jetinv::catalog::Chart;
use jetinv::expr::{parse, Expression, Sign};
use jetinv::inv_pi::{catalog_pi, check_symbol_determinant, u12_rows};
use jetinv::inv_pitilde::{catalog_pitilde, jacobi_in_span, realize, u10_rows, SYZYGIES};
use jetinv::sl3::{check_relative, weight_span};

const L9_WEIGHT: &str = "-4*a11 + 2*a22 - a12*(p + 5*g) - 6*c1*x - c2*(p + 5*g)*x";

const SYZYGY_1: &str = "6*M34 - 6*M25 - M4*M5 + 12*M4 + 6*M2*M3 + 12*M12";
const SYZYGY_3: &str = "3*M23 - 3*M14 - M5";

fn e(s: &str) -> Expression {
    parse(s).unwrap()
}

#[test]
fn l9_weight() {
    let cat = catalog_pi(Sign::Positive);
    let l9 = cat.get("L9").unwrap();
    assert!(check_relative(&l9.expr, &e(L9_WEIGHT), &cat.bundle).unwrap());
    assert!(!check_relative(&l9.expr, l9.weight().unwrap(), &cat.bundle).unwrap());
}

#[test]
fn k5_balances_with_l9_weight() {
    let cat = catalog_pi(Sign::Positive);
    let w = |n: &str| cat.get(n).unwrap().weight().unwrap().clone();
    let half = jetinv::expr::Rational::new(1.into(), 2.into());
    let balance = w("I1").scale(&half) + e(L9_WEIGHT) - w("L1") - w("L1");
    assert!(balance.is_zero());
}

#[test]
fn weights_generated_with_l9_weight() {
    let cat = catalog_pi(Sign::Positive);
    let w = |n: &str| cat.get(n).unwrap().weight().unwrap().clone();
    let gens: Vec<Expression> = ["I0", "I1", "L1", "L3"].iter().map(|n| w(n)).collect();
    let all: Vec<Expression> = cat
        .relative
        .iter()
        .map(|r| if r.name == "L9" { e(L9_WEIGHT) } else { r.weight().unwrap().clone() })
        .collect();
    let span = weight_span(&gens, &all).unwrap();
    assert!(span.generates());
    assert_eq!(span.generator_rank, 3);
}

#[test]
fn corrected_syzygies_vanish() {
    let cat = catalog_pitilde(Chart::POSITIVE);
    for s in [SYZYGY_1, SYZYGY_3] {
        assert!(realize(&cat, &e(s)).unwrap().is_zero(), "{s}");
    }
}

#[test]
fn jacobi_relations_span_corrected_syzygies() {
    let cat = catalog_pitilde(Chart::POSITIVE);
    let corrected = [SYZYGY_1, SYZYGIES[1], SYZYGY_3, SYZYGIES[3], SYZYGIES[4]];
    let coords = jacobi_in_span(&cat, &corrected);
    assert!(coords.iter().all(Option::is_some));
    // each relation is a multiple of one corrected syzygy among the first three
    for c in coords.into_iter().flatten() {
        let nonzero = c.iter().enumerate().filter(|(_, v)| !num_traits::Zero::is_zero(*v)).count();
        assert_eq!(nonzero, 1);
        assert!(c[3..].iter().all(num_traits::Zero::is_zero));
    }
}

#[test]
fn det_u12_exponents() {
    let cat = catalog_pi(Sign::Positive);
    let rows = u12_rows(&cat).unwrap();
    let cols = cat.bundle.jets_of_order(2);
    let rhs = [
        cat.formula("2*I0^26*I1^13*(L1*L3 + L2*L4)/L1^25"),
        cat.formula("2*I0^26*I1^11*(J2 + J1*J3)/L1^22"),
    ];
    let r = check_symbol_determinant(&rows, &cols, &rhs, 20, 7).unwrap();
    assert!(r.passed(), "{r:?}");
}

#[test]
fn det_u10_exponent() {
    let cat = catalog_pitilde(Chart::POSITIVE);
    let rows = u10_rows(&cat).unwrap();
    let cols = cat.bundle.jets_of_order(3);
    let rhs = [cat.formula("-3^20*I0^30/I1^20")];
    let r = check_symbol_determinant(&rows, &cols, &rhs, 20, 7).unwrap();
    assert!(r.passed(), "{r:?}");
}
