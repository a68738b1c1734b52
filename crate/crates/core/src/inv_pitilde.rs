//! Invariants of the projective action on second-order ODEs `y'' = f(x, y, y')`.

use std::sync::Arc;

use crate::catalog::{catalog, jacobi_relations, Catalog, Chart, Coordinate, Spec};
use crate::expr::{parse, ExprError, Expression, Rational, Sign, Var};
use crate::inv_pi::{check_symbol_determinant, DetReport};
use crate::jets::{restrict_to_section, BundleKind, JetError, Section, TotalDerivation};
use crate::linalg;

pub(crate) static SPEC: Spec = Spec {
    bundle: BundleKind::PiTilde,
    relative: &[
        ("I0", "f", "-2*a11 + a22 - 3*a12*p - 3*c1*x - 3*c2*x*p"),
        (
            "I1",
            "p*f_y*f_p - 3*f*f_y + f_x*f_p",
            "-4*a11 + a22 - 5*a12*p - 7*c1*x - c2*(5*x*p + 2*y)",
        ),
        (
            "H1",
            "3*f_pp*f^2 - 2*f*f_p^2",
            "-4*a11 + a22 - 5*a12*p - 7*c1*x - c2*(5*x*p + 2*y)",
        ),
        (
            "H2",
            "3*f*(f_xx + 2*p*f_xy + p^2*f_yy) - 4*(p*f_y + f_x)^2",
            "2*(-3*a11 + a22 - 4*a12*p - 5*c1*x - c2*(4*x*p + y))",
        ),
        (
            "H3",
            "3*f*f_p*f_xp + 3*f*(p*f_p - 3*f)*f_yp + 3*f*(p*f_y + f_x)*f_pp \
             + f_p*(9*f*f_y - 5*f_p*(p*f_y + f_x))",
            "-5*a11 + a22 - 6*a12*p - 9*c1*x - 3*c2*(2*x*p + y)",
        ),
        (
            "H4",
            "3*f*(f_p*f_xx + (2*p*f_p - 3*f)*f_xy + (p*f_y + f_x)*(f_xp + p*f_yp) \
             + p*(p*f_p - 3*f)*f_yy) - (p*f_y + f_x)*(7*f_p*(p*f_y + f_x) - 12*f*f_y)",
            "-7*a11 + 2*a22 - 9*a12*p - 12*c1*x - 3*c2*(3*x*p + y)",
        ),
        (
            "H5",
            "3*f*(f_p^2*f_xx + 2*f_p*(p*f_p - 3*f)*f_xy + (p*f_p - 3*f)^2*f_yy \
             + 2*(2*p*f_y*f_p + 2*f_x*f_p - 3*f*f_y)*f_xp \
             + 2*(2*p^2*f_y*f_p + 2*p*f_x*f_p - 6*p*f*f_y - 3*f*f_x)*f_yp \
             + (p*f_y + f_x)^2*f_pp) - 18*f_p^2*(p*f_y + f_x)^2 \
             + 60*f*f_y*f_p*(p*f_y + f_x) - 36*f^2*f_y^2",
            "2*(-4*a11 + a22 - 5*a12*p - 7*c1*x - c2*(5*x*p + 2*y))",
        ),
    ],
    absolute: &[
        ("M1", &[("H1", (1, 1)), ("I1", (-1, 1))]),
        ("M2", &[("H2", (1, 1)), ("I0", (-1, 1)), ("I1", (-1, 1))]),
        ("M3", &[("I0", (1, 2)), ("H3", (1, 1)), ("I1", (-3, 2))]),
        ("M4", &[("H4", (1, 1)), ("I0", (-1, 2)), ("I1", (-3, 2))]),
        ("M5", &[("H5", (1, 1)), ("I1", (-2, 1))]),
    ],
    derivations: [
        ([None, None, Some("1")], &[("I0", (3, 2)), ("I1", (-1, 2))]),
        ([Some("1"), Some("p"), None], &[("I0", (1, 2)), ("I1", (-1, 2))]),
        (
            [Some("f_p"), Some("p*f_p - 3*f"), Some("p*f_y + f_x")],
            &[("I0", (1, 1)), ("I1", (-1, 1))],
        ),
    ],
    commutators: &[
        (0, 1, ["1/6*e0*e1*M4", "-1/6*e0*e1*M3", "-1/3*e1"]),
        (0, 2, ["1/6*(M5 - 4)", "1/3*e0*M1", "-1/3*e0*e1*M3"]),
        (1, 2, ["1/3*e0*M2", "1/6*(M5 + 4)", "-1/3*e0*e1*M4"]),
    ],
    signature: &[
        ("m1", Coordinate::Entry("M1")),
        ("m2", Coordinate::Entry("M2")),
        ("m3", Coordinate::Entry("M3")),
        ("m4", Coordinate::Entry("M4")),
        ("m5", Coordinate::Entry("M5")),
        ("m11", Coordinate::Nabla(0, "M1")),
        ("m12", Coordinate::Nabla(0, "M2")),
        ("m13", Coordinate::Nabla(0, "M3")),
        ("m21", Coordinate::Nabla(1, "M1")),
        ("m22", Coordinate::Nabla(1, "M2")),
    ],
};

pub const M_SYMBOLS: [&str; 5] = ["M1", "M2", "M3", "M4", "M5"];

/// The five syzygies among `M_k` and `M_ik = ∇_i M_k`.
pub const SYZYGIES: [&str; 5] = [
    "6*M34 - 6*M25 - M4*M5 + 12*M4 + 6*M2*M3 + 12*M2",
    "12*M33 - 12*M15 + 24*M21 + 12*M1*M4 - 2*M3*M5 - 24*M3",
    "3*M23 - 3*M14 + M5",
    "6*M31 - 6*M13 + 2*M1*M5 - 3*M3^2 - 6*M1",
    "6*M32 - 6*M24 + 2*M2*M5 - 3*M4^2 + 6*M2",
];

/// The third-order invariants whose symbols are independent.
pub const U10_ROWS: [(usize, &str); 10] = [
    (0, "M1"),
    (0, "M2"),
    (0, "M3"),
    (0, "M4"),
    (0, "M5"),
    (1, "M1"),
    (1, "M2"),
    (1, "M4"),
    (1, "M5"),
    (2, "M5"),
];

pub fn catalog_pitilde(chart: Chart) -> Arc<Catalog> {
    catalog(BundleKind::PiTilde, chart)
}

pub fn derivations_pitilde(chart: Chart) -> [TotalDerivation; 3] {
    catalog_pitilde(chart).derivations.clone()
}

/// Replaces formal symbols `M_k`, `M_ik` by the catalog expressions.
pub fn realize(cat: &Catalog, formal: &Expression) -> Result<Expression, JetError> {
    let mut map = std::collections::HashMap::new();
    for v in formal.free_vars() {
        let name = v.name();
        let digits = &name[1..];
        let value = match digits.len() {
            1 => cat.expr(&name).clone(),
            2 => {
                let i = (digits.as_bytes()[0] - b'1') as usize;
                cat.nabla(i, cat.expr(&format!("M{}", &digits[1..])))?
            }
            _ => continue,
        };
        map.insert(v, value);
    }
    Ok(formal.substitute(&map)?)
}

/// The syzygy residuals evaluated on the catalog.
pub fn syzygy_residuals(cat: &Catalog) -> Result<Vec<Expression>, JetError> {
    SYZYGIES
        .iter()
        .map(|s| realize(cat, &parse(s).expect("syzygy")))
        .collect()
}

/// Residuals restricted to a section.
pub fn syzygy_residuals_on(cat: &Catalog, s: &Section) -> Result<Vec<Expression>, JetError> {
    syzygy_residuals(cat)?
        .iter()
        .map(|r| restrict_to_section(r, s))
        .collect()
}

/// Coordinates of the Jacobi relations in the span of [`SYZYGIES`], with
/// coefficients in `ℚ`; `None` for a relation outside the span.
pub fn jacobi_in_syzygy_span(cat: &Catalog) -> Vec<Option<Vec<Rational>>> {
    jacobi_in_span(cat, &SYZYGIES)
}

/// As [`jacobi_in_syzygy_span`] for any list of relations in `M_k`, `M_ik`.
pub fn jacobi_in_span(cat: &Catalog, relations: &[&str]) -> Vec<Option<Vec<Rational>>> {
    let jac = jacobi_relations(&cat.commutators_formal(), &M_SYMBOLS);
    let syz: Vec<Expression> = relations.iter().map(|s| parse(s).unwrap()).collect();
    let mut monomials: Vec<Vec<(Var, u32)>> = Vec::new();
    let mut coords = |e: &Expression| -> Vec<(usize, Rational)> {
        let terms = e.polynomial_terms().expect("polynomial relation");
        terms
            .into_iter()
            .map(|(m, c)| {
                let idx = match monomials.iter().position(|x| *x == m) {
                    Some(i) => i,
                    None => {
                        monomials.push(m);
                        monomials.len() - 1
                    }
                };
                (idx, c)
            })
            .collect()
    };
    let sparse_syz: Vec<_> = syz.iter().map(&mut coords).collect();
    let sparse_jac: Vec<_> = jac.iter().map(&mut coords).collect();
    let dim = monomials.len();
    let dense = |sp: &Vec<(usize, Rational)>| {
        let mut v = vec![Rational::from_integer(0.into()); dim];
        for (i, c) in sp {
            v[*i] += c;
        }
        v
    };
    let gens: Vec<Vec<Rational>> = sparse_syz.iter().map(dense).collect();
    sparse_jac
        .iter()
        .map(|j| linalg::express(&gens, &dense(j)))
        .collect()
}

/// The ten third-order invariants of [`U10_ROWS`].
pub fn u10_rows(cat: &Catalog) -> Result<Vec<Expression>, JetError> {
    U10_ROWS
        .iter()
        .map(|(i, name)| cat.nabla(*i, cat.expr(name)))
        .collect()
}

/// `−3^20 I0^30 / I1^25`.
pub fn det_u10_formula(cat: &Catalog) -> Expression {
    cat.formula("-3^20*I0^30/I1^25")
}

pub fn check_det_u10(points: usize, seed: u64) -> Result<DetReport, ExprError> {
    let cat = catalog_pitilde(Chart::POSITIVE);
    let rows = u10_rows(&cat).map_err(|e| ExprError::Unsupported(e.to_string()))?;
    let cols = cat.bundle.jets_of_order(3);
    check_symbol_determinant(&rows, &cols, &[det_u10_formula(&cat)], points, seed)
}

/// An ODE `y'' = f` as a section of π̃.
pub fn section(f: &str) -> Result<Section, ExprError> {
    Ok(Section::pitilde(parse(f)?))
}

/// Chart of a point from the signs of `I0` and `I1` there.
pub fn chart_of(i0: f64, i1: f64) -> Chart {
    Chart::new(Sign::of(i0), Sign::of(i1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_shape() {
        let cat = catalog_pitilde(Chart::POSITIVE);
        assert_eq!(cat.relative.len(), 7);
        assert_eq!(cat.absolute.len(), 5);
        assert!(cat.absolute.iter().all(|e| e.order == 2));
        assert_eq!(cat.signature_names().len(), 10);
    }

    #[test]
    fn weight_balance_of_absolutes() {
        let cat = catalog_pitilde(Chart::POSITIVE);
        for e in &cat.absolute {
            assert!(cat.weight_balance(e).unwrap().is_zero(), "{}", e.name);
        }
    }

    #[test]
    fn yp_has_constant_m1_ratio() {
        let cat = catalog_pitilde(Chart::new(Sign::Positive, Sign::Negative));
        let s = section("y*p").unwrap();
        let m1 = restrict_to_section(cat.expr("M1"), &s).unwrap();
        assert_eq!(m1, parse("y^2/p").unwrap());
        let i1 = restrict_to_section(cat.expr("I1"), &s).unwrap();
        assert_eq!(i1, parse("-2*p^2*y").unwrap());
    }
}
