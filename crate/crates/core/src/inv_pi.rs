//! Invariants of the projective action on sections `(f, g)` of π.

use std::sync::Arc;

use num_traits::Zero;

use crate::catalog::{catalog, Catalog, Chart, Coordinate, Spec};
use crate::expr::{
    parse, probabilistic_zero, Expression, ExprError, PointSampler, PowerMode, Rational, Sign, Var,
};
use crate::jets::{Base, BundleKind, TotalDerivation};
use crate::linalg;

pub(crate) static SPEC: Spec = Spec {
    bundle: BundleKind::Pi,
    relative: &[
        ("I0", "p - g", "-a11 + a22 - a12*(p + g) - c1*x + c2*(y - x*(p + g))"),
        ("I1", "g_p", "2*(c2*x + a12)*(p - g)"),
        ("L1", "g_x + g*g_y + f*g_p", "-2*a11 + a22 - 3*a12*g - 3*c1*x - 3*c2*g*x"),
        (
            "L2",
            "(-2 + g_p)*f + (p - g)*f_p - p*g_y - g_x",
            "-2*a11 + a22 - a12*(p + 2*g) - 3*c1*x - c2*(p + 2*g)*x",
        ),
        (
            "L3",
            "-f^2 + (p*g_y + g_x)*f + (p*f_y + f_x)*(p - g)",
            "-4*a11 + 2*a22 - 2*a12*(2*p + g) - 6*c1*x - 2*c2*(2*p + g)*x",
        ),
        (
            "L4",
            "(-2 + g_p)*f^2 + (g_x + g*g_y)*f + (f_x + g*f_y + f*f_p)*(p - g)",
            "-4*a11 + 2*a22 - 3*a12*(p + g) - 6*c1*x - 3*c2*(p + g)*x",
        ),
        (
            "L5",
            "(p - g)*(f_pp*(p - g) + f*g_pp + 2*f_p*(g_p - 1)) + 2*f*(g_p - 1)^2",
            "-2*a11 + a22 - 3*a12*g - 3*c1*x - 3*c2*g*x",
        ),
        (
            "L6",
            "(p - g)*(g_xp + g*g_yp + f*g_pp + (4*f_p - 2*g_y)*g_p) + 6*f*g_p*(g_p - 1)",
            "-2*a11 + a22 + a12*(p - 4*g) - 3*c1*x + c2*(p - 4*g)*x",
        ),
        ("L7", "g_pp*(p - g) + 2*g_p^2 + 2*g_p", "3*(c2*x + a12)*(p - g)"),
        (
            "L8",
            "p*(p - g)*g_yp + (p - g)*g_xp + 2*g_p*(p*g_y + g_x + f)",
            "-2*a11 + a22 - 3*a12*g - 3*c1*x - 3*c2*g*x",
        ),
        (
            "L9",
            "(p - g)*(g_xx + 2*g*g_xy + g^2*g_yy + f*(2*g_xp + 2*g*g_yp + f*g_pp) \
             + 4*f_p*(g_x + g*g_y + f*g_p)) + 2*f*g_p*(3*f*(g_p - 1) + 4*g_x + 4*g*g_y) \
             - 2*(g_x + g*g_y)*(4*f - g_x - g*g_y)",
            "-4*a11 + 2*a22 - a12*(p + 5*g) - c2*(p + 5*g)*x",
        ),
        (
            "L10",
            "(p - g)*(g_xx + (p + g)*g_xy + p*g*g_yy + f*(g_xp + p*g_yp) \
             + g_p*(p*f_y + f_x + 3*f*g_y)) + 3*f*g_p*(g_x + g*g_y) \
             + (g_x + p*g_y)*(3*g_x + (p + 2*g)*g_y)",
            "-4*a11 + 2*a22 - 2*a12*(p + 2*g) - 6*c1*x - 2*c2*(p + 2*g)*x",
        ),
    ],
    absolute: &[
        ("J1", &[("I1", (1, 2)), ("L2", (1, 1)), ("L1", (-1, 1))]),
        ("J2", &[("I1", (2, 1)), ("L3", (1, 1)), ("L1", (-2, 1))]),
        ("J3", &[("I1", (3, 2)), ("L4", (1, 1)), ("L1", (-2, 1))]),
        ("K1", &[("L5", (1, 1)), ("L1", (-1, 1))]),
        ("K2", &[("L6", (1, 1)), ("I1", (-1, 2)), ("L1", (-1, 1))]),
        ("K3", &[("L7", (1, 1)), ("I1", (-3, 2))]),
        ("K4", &[("L8", (1, 1)), ("L1", (-1, 1))]),
        ("K5", &[("I1", (1, 2)), ("L9", (1, 1)), ("L1", (-2, 1))]),
        ("K6", &[("I1", (1, 1)), ("L10", (1, 1)), ("L1", (-2, 1))]),
    ],
    derivations: [
        ([None, None, Some("1")], &[("I0", (1, 1)), ("I1", (-1, 2))]),
        ([Some("1"), Some("p"), None], &[("I0", (1, 1)), ("I1", (1, 1)), ("L1", (-1, 1))]),
        ([Some("1"), Some("g"), Some("f")], &[("I0", (1, 1)), ("I1", (1, 2)), ("L1", (-1, 1))]),
    ],
    commutators: &[
        (0, 1, ["1/2*K4", "e1*K3 - K2 + 3*e1*J1", "-e1"]),
        (0, 2, ["1/2*(e1*K2 - 2*J1)", "1", "1/2*(e1*K3 - 2*K2 + 6*e1*J1)"]),
        (1, 2, ["e1*J2", "K5 - e1*K2 + e1*J3", "1/2*(K4 - 2*K6)"]),
    ],
    signature: &[
        ("j1", Coordinate::Entry("J1")),
        ("j2", Coordinate::Entry("J2")),
        ("j3", Coordinate::Entry("J3")),
        ("k1", Coordinate::Entry("K1")),
        ("k2", Coordinate::Entry("K2")),
        ("k3", Coordinate::Entry("K3")),
        ("j11", Coordinate::Nabla(0, "J1")),
        ("j12", Coordinate::Nabla(1, "J1")),
        ("j13", Coordinate::Nabla(2, "J1")),
        ("j21", Coordinate::Nabla(0, "J2")),
        ("j22", Coordinate::Nabla(1, "J2")),
        ("j23", Coordinate::Nabla(2, "J2")),
        ("j31", Coordinate::Nabla(0, "J3")),
        ("j32", Coordinate::Nabla(1, "J3")),
        ("j33", Coordinate::Nabla(2, "J3")),
    ],
};

/// The catalog on the chart `sign(I1) = chart`.
pub fn catalog_pi(chart: Sign) -> Arc<Catalog> {
    catalog(BundleKind::Pi, Chart::new(Sign::Positive, chart))
}

pub fn derivations_pi(chart: Sign) -> [TotalDerivation; 3] {
    catalog_pi(chart).derivations.clone()
}

/// The twelve second-order invariants `K1, K2, K3, ∇_i J_k`.
pub fn u12_rows(cat: &Catalog) -> Result<Vec<Expression>, crate::jets::JetError> {
    let mut rows: Vec<Expression> = ["K1", "K2", "K3"].iter().map(|n| cat.expr(n).clone()).collect();
    for i in 0..3 {
        for k in ["J1", "J2", "J3"] {
            rows.push(cat.nabla(i, cat.expr(k))?);
        }
    }
    Ok(rows)
}

/// `2 I0^23 I1^14 (L1 L3 + L2 L4) / L1^23`.
pub fn det_u12_formula(cat: &Catalog) -> Expression {
    cat.formula("2*I0^23*I1^14*(L1*L3 + L2*L4)/L1^23")
}

/// `2 I0^23 I1^12 (J2 + J1 J3) / L1^20`.
pub fn det_u12_formula_j(cat: &Catalog) -> Expression {
    cat.formula("2*I0^23*I1^12*(J2 + J1*J3)/L1^20")
}

/// Outcome of evaluating a determinant identity at exact rational points.
#[derive(Clone, Debug, Default)]
pub struct DetReport {
    pub points: usize,
    pub failures: usize,
    /// Points where the determinant equals minus the formula.
    pub sign_flips: usize,
}

impl DetReport {
    pub fn passed(&self) -> bool {
        self.points > 0 && self.failures == 0
    }
}

/// Compares `det(∂row/∂col)` with `rhs` at `points` exact rational points.
pub fn check_symbol_determinant(
    rows: &[Expression],
    cols: &[Var],
    rhs: &[Expression],
    points: usize,
    seed: u64,
) -> Result<DetReport, ExprError> {
    let matrix = Catalog::symbol_matrix(rows, cols);
    let mut vars: Vec<Var> = Vec::new();
    let mut atoms: Vec<Var> = Vec::new();
    for e in matrix.iter().flatten().chain(rhs.iter()) {
        vars.extend(e.free_vars());
        atoms.extend(e.atoms());
    }
    vars.sort_unstable();
    vars.dedup();
    atoms.sort_unstable();
    atoms.dedup();
    let mut sampler = PointSampler::new(&vars, &atoms, seed)?;
    let mut report = DetReport::default();
    for _ in 0..points {
        let mut failed = false;
        let mut flipped = false;
        probabilistic_zero(&mut sampler, 1, &mut |pt| {
            let m: Vec<Vec<Rational>> = matrix
                .iter()
                .map(|row| row.iter().map(|e| e.eval_exact(pt, PowerMode::Strict)).collect())
                .collect::<Result<_, _>>()?;
            let det = linalg::determinant(&m);
            let mut zero = true;
            for r in rhs {
                let v = r.eval_exact(pt, PowerMode::Strict)?;
                if det != v {
                    zero = false;
                    flipped = !v.is_zero() && det == -v;
                }
            }
            failed = !zero;
            Ok(Rational::zero())
        })?;
        report.points += 1;
        report.failures += failed as usize;
        report.sign_flips += flipped as usize;
    }
    Ok(report)
}

/// `det U12` against both printed forms.
pub fn check_det_u12(points: usize, seed: u64) -> Result<DetReport, ExprError> {
    let cat = catalog_pi(Sign::Positive);
    let rows = u12_rows(&cat).map_err(|e| ExprError::Unsupported(e.to_string()))?;
    let cols = cat.bundle.jets_of_order(2);
    check_symbol_determinant(
        &rows,
        &cols,
        &[det_u12_formula(&cat), det_u12_formula_j(&cat)],
        points,
        seed,
    )
}

/// `det U = −(L1² / (I0⁴ I1)) det W` at exact rational points, with
/// `U = (dJ_i/dx_k)` and `W = (∇_k J_i)`.
pub fn check_det_u_w(points: usize, seed: u64) -> Result<DetReport, ExprError> {
    let cat = catalog_pi(Sign::Positive);
    let to_expr = |e: crate::jets::JetError| ExprError::Unsupported(e.to_string());
    let js: Vec<&Expression> = ["J1", "J2", "J3"].iter().map(|n| cat.expr(n)).collect();
    let mut u = Vec::new();
    let mut w = Vec::new();
    for k in 0..3 {
        let mut urow = Vec::new();
        let mut wrow = Vec::new();
        for j in &js {
            urow.push(cat.bundle.total_derivative(j, Base::ALL[k]).map_err(to_expr)?);
            wrow.push(cat.nabla(k, j).map_err(to_expr)?);
        }
        u.push(urow);
        w.push(wrow);
    }
    let factor = cat.formula("-L1^2/(I0^4*I1)");
    let mut vars: Vec<Var> = Vec::new();
    let mut atoms: Vec<Var> = Vec::new();
    for e in u.iter().chain(w.iter()).flatten().chain(std::iter::once(&factor)) {
        vars.extend(e.free_vars());
        atoms.extend(e.atoms());
    }
    vars.sort_unstable();
    vars.dedup();
    atoms.sort_unstable();
    atoms.dedup();
    let mut sampler = PointSampler::new(&vars, &atoms, seed)?;
    let mut report = DetReport::default();
    let eval = |m: &Vec<Vec<Expression>>, pt: &_| -> Result<Rational, ExprError> {
        let rows: Vec<Vec<Rational>> = m
            .iter()
            .map(|r| r.iter().map(|e| e.eval_exact(pt, PowerMode::Strict)).collect())
            .collect::<Result<_, _>>()?;
        Ok(linalg::determinant(&rows))
    };
    for _ in 0..points {
        let mut failed = false;
        probabilistic_zero(&mut sampler, 1, &mut |pt| {
            let du = eval(&u, pt)?;
            let dw = eval(&w, pt)?;
            let f = factor.eval_exact(pt, PowerMode::Strict)?;
            failed = du != f * dw;
            Ok(Rational::zero())
        })?;
        report.points += 1;
        report.failures += failed as usize;
    }
    Ok(report)
}

/// Parses a section of π from two formulas.
pub fn section(f: &str, g: &str) -> Result<crate::jets::Section, ExprError> {
    Ok(crate::jets::Section::pi(parse(f)?, parse(g)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::restrict_to_section;

    #[test]
    fn catalog_shape() {
        let cat = catalog_pi(Sign::Positive);
        assert_eq!(cat.relative.len(), 12);
        assert_eq!(cat.absolute.len(), 9);
        assert_eq!(cat.get("L1").unwrap().order, 1);
        assert_eq!(cat.get("K3").unwrap().order, 2);
        assert_eq!(cat.signature_names().len(), 15);
    }

    #[test]
    fn derivations_on_base_coordinates() {
        let cat = catalog_pi(Sign::Positive);
        let d = &cat.derivations;
        assert!(d[0].on(Base::X).is_zero());
        assert_eq!(d[0].on(Base::P), &parse("(p - g)/abs(g_p)^(1/2)").unwrap());
        assert_eq!(d[1].on(Base::Y), &(parse("p").unwrap() * d[1].on(Base::X).clone()));
        assert_eq!(
            d[2].on(Base::Y).checked_div(d[2].on(Base::X)).unwrap(),
            parse("g").unwrap()
        );
    }

    #[test]
    fn hand_evaluated_section() {
        let cat = catalog_pi(Sign::Positive);
        let s = section("1", "p + x").unwrap();
        let j1 = restrict_to_section(cat.expr("J1"), &s).unwrap();
        assert_eq!(j1, Expression::int(-1));
        let reg = restrict_to_section(&cat.formula("L1*L3 + L2*L4"), &s).unwrap();
        assert!(reg.is_zero());
        let flat = section("y", "p").unwrap();
        assert!(restrict_to_section(cat.expr("I0"), &flat).unwrap().is_zero());
        assert_eq!(restrict_to_section(cat.expr("I1"), &flat).unwrap(), Expression::one());
    }
}
