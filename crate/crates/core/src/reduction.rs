//! From two-parameter families of contact curves to sections of π, and the
//! associated second-order equation of a pair of roots.

use std::collections::HashMap;

use thiserror::Error;

use crate::expr::{ExprError, Expression, Rational, Var};
use crate::jets::{Base, Section};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("degenerate family: a_y*b_p - a_p*b_y vanishes identically")]
    DegenerateFamily,
    #[error("roots {0} and {1} coincide")]
    IndistinctRoots(usize, usize),
    #[error("`{function}` is not an integral of the field of root {root}")]
    NotAnIntegral { root: usize, function: String },
    #[error("h does not vary with b1")]
    VanishingHb,
    #[error("h(a1, b1, a2) does not reproduce b2")]
    Interdependency,
    #[error("cannot solve for `{0}`: the relation is not linear fractional in it")]
    NotSolvable(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// The family `{a = const, b = const}` of curves in `ℝ³(x, y, p)`.
#[derive(Clone, Debug)]
pub struct CurveFamily {
    pub a: Expression,
    pub b: Expression,
}

impl CurveFamily {
    pub fn new(a: Expression, b: Expression) -> CurveFamily {
        CurveFamily { a, b }
    }

    /// `(φ(a, b), ψ(a, b))` for `φ`, `ψ` written in the variables `a`, `b`.
    pub fn reparametrize(&self, phi: &Expression, psi: &Expression) -> Result<CurveFamily, ExprError> {
        let map: HashMap<Var, Expression> = [
            (Var::named("a"), self.a.clone()),
            (Var::named("b"), self.b.clone()),
        ]
        .into_iter()
        .collect();
        Ok(CurveFamily::new(phi.substitute(&map)?, psi.substitute(&map)?))
    }
}

fn partials(e: &Expression) -> [Expression; 3] {
    Base::ALL.map(|v| e.differentiate(v.var()))
}

/// The section `(f, g)` of π whose fibers are the values of `a` and `b`.
pub fn family_to_section(fam: &CurveFamily) -> Result<Section, ReductionError> {
    let [ax, ay, ap] = partials(&fam.a);
    let [bx, by, bp] = partials(&fam.b);
    let den = &ay * &bp - &ap * &by;
    if den.is_zero() {
        return Err(ReductionError::DegenerateFamily);
    }
    let f = (&ax * &by - &ay * &bx).checked_div(&den)?;
    let g = (&ap * &bx - &ax * &bp).checked_div(&den)?;
    Ok(Section::pi(f, g))
}

/// `X = ∂x + p ∂y + λ ∂p` applied to `e`.
pub fn along_field(lambda: &Expression, e: &Expression) -> Expression {
    let [ex, ey, ep] = partials(e);
    ex + Base::P.expr() * ey + lambda * &ep
}

#[derive(Clone, Debug)]
pub struct Integrality {
    /// `g = p` and `f = G` for the induced section.
    pub integral: bool,
    /// The induced `f` when `g = p`.
    pub induced_f: Option<Expression>,
}

/// Whether the family consists of integral curves of `y'' = G`.
pub fn check_contact_integrality(fam: &CurveFamily, g: &Expression) -> Integrality {
    let Ok(s) = family_to_section(fam) else {
        return Integrality {
            integral: false,
            induced_f: None,
        };
    };
    if *s.component("g").unwrap() != Base::P.expr() {
        return Integrality {
            integral: false,
            induced_f: None,
        };
    }
    let f = s.component("f").unwrap().clone();
    Integrality {
        integral: f == *g,
        induced_f: Some(f),
    }
}

/// The associated equation `y'' = G2` in coordinates `(a, b, c)`.
#[derive(Clone, Debug)]
pub struct AssociatedEquation {
    /// `c` as a function of `a`, `b` and `a2`.
    pub c: Expression,
    /// `G2` in `a`, `b`, `c`; still in `a2` when `eliminated` is false.
    pub g2: Expression,
    pub eliminated: bool,
}

fn var(name: &str) -> Var {
    Var::named(name)
}

fn rename(e: &Expression, pairs: &[(&str, &str)]) -> Result<Expression, ExprError> {
    let map: HashMap<Var, Expression> = pairs
        .iter()
        .map(|(from, to)| (var(from), Expression::var(to)))
        .collect();
    e.substitute(&map)
}

/// Coefficients `(α, β)` of a polynomial `α v + β`, or `None` when the
/// degree in `v` exceeds one.
fn linear_parts(e: &Expression, v: Var) -> Option<(Expression, Expression)> {
    let mut alpha = Expression::zero();
    let mut beta = Expression::zero();
    for (mono, c) in e.polynomial_terms()? {
        let mut term = Expression::constant(c);
        let mut power = 0;
        for (w, k) in mono {
            if w == v {
                power = k;
            } else {
                term = term * Expression::from_var(w).pow(k as i64).ok()?;
            }
        }
        match power {
            0 => beta = beta + term,
            1 => alpha = alpha + term,
            _ => return None,
        }
    }
    Some((alpha, beta))
}

/// Solves `e(v) = t` for `v` when `e` is linear fractional in `v`.
pub fn solve_linear_fractional(
    e: &Expression,
    v: Var,
    t: &Expression,
) -> Result<Expression, ReductionError> {
    let fail = || ReductionError::NotSolvable(v.name());
    let (a, b) = linear_parts(&e.numerator(), v).ok_or_else(fail)?;
    let (c, d) = linear_parts(&e.denominator(), v).ok_or_else(fail)?;
    // (a v + b) = t (c v + d)
    let den = &a - &(t * &c);
    if den.is_zero() || e.atoms().iter().any(|x| *x == v) {
        return Err(fail());
    }
    Ok((&(t * &d) - &b).checked_div(&den)?)
}

/// `c = −h_a1/h_b1` and `G2` for `b2 = h(a1, b1, a2)`.
pub fn associated_equation(h: &Expression) -> Result<AssociatedEquation, ReductionError> {
    let (a1, b1) = (var("a1"), var("b1"));
    let ha = h.differentiate(a1);
    let hb = h.differentiate(b1);
    if hb.is_zero() {
        return Err(ReductionError::VanishingHb);
    }
    let haa = ha.differentiate(a1);
    let hab = ha.differentiate(b1);
    let hbb = hb.differentiate(b1);
    let cross = &(&ha * &hb) * &hab;
    let num = &haa * &hb.pow(2)? - cross.scale(&Rational::from_integer(2.into())) + &hbb * &ha.pow(2)?;
    let g2 = -num.checked_div(&hb.pow(3)?)?;
    let c = -ha.checked_div(&hb)?;
    let to_abc = [("a1", "a"), ("b1", "b")];
    let c = rename(&c, &to_abc)?;
    let mut g2 = rename(&g2, &to_abc)?;
    let a2 = var("a2");
    let mut eliminated = !g2.depends_on(a2);
    if !eliminated {
        if let Ok(sol) = solve_linear_fractional(&c, a2, &Expression::var("c")) {
            g2 = g2.substitute_one(a2, &sol)?;
            eliminated = true;
        }
    }
    Ok(AssociatedEquation { c, g2, eliminated })
}

/// Two roots with user-supplied integrals and the interdependency
/// `b2 = h(a1, b1, a2)`.
#[derive(Clone, Debug)]
pub struct RootPair {
    pub lambda: [Expression; 2],
    pub a: [Expression; 2],
    pub b: [Expression; 2],
    pub h: Expression,
}

impl RootPair {
    /// Checks distinct roots, the integrals, and the interdependency, all
    /// canonically.
    pub fn verify(&self) -> Result<(), ReductionError> {
        if self.lambda[0] == self.lambda[1] {
            return Err(ReductionError::IndistinctRoots(1, 2));
        }
        for i in 0..2 {
            for e in [&self.a[i], &self.b[i]] {
                if !along_field(&self.lambda[i], e).is_zero() {
                    return Err(ReductionError::NotAnIntegral {
                        root: i + 1,
                        function: e.to_string(),
                    });
                }
            }
        }
        let map: HashMap<Var, Expression> = [
            (var("a1"), self.a[0].clone()),
            (var("b1"), self.b[0].clone()),
            (var("a2"), self.a[1].clone()),
        ]
        .into_iter()
        .collect();
        if self.h.substitute(&map)? != self.b[1] {
            return Err(ReductionError::Interdependency);
        }
        Ok(())
    }

    /// The same pair with the roles of the two roots exchanged; `h` is
    /// inverted for `b1`.
    pub fn swapped(&self) -> Result<RootPair, ReductionError> {
        let b1 = solve_linear_fractional(&self.h, var("b1"), &Expression::var("b2"))?;
        let h = rename(&b1, &[("a1", "a2"), ("a2", "a1"), ("b2", "b1")])?;
        Ok(RootPair {
            lambda: [self.lambda[1].clone(), self.lambda[0].clone()],
            a: [self.a[1].clone(), self.a[0].clone()],
            b: [self.b[1].clone(), self.b[0].clone()],
            h,
        })
    }
}

/// The dual associated equations `(E1, E2)`: `E2` from the pair as given,
/// `E1` with the roots exchanged.
pub fn dual_swap(pair: &RootPair) -> Result<(AssociatedEquation, AssociatedEquation), ReductionError> {
    pair.verify()?;
    let swapped = pair.swapped()?;
    swapped.verify()?;
    Ok((associated_equation(&swapped.h)?, associated_equation(&pair.h)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn e(s: &str) -> Expression {
        parse(s).unwrap()
    }

    fn family(a: &str, b: &str) -> CurveFamily {
        CurveFamily::new(e(a), e(b))
    }

    fn linear_pair() -> RootPair {
        RootPair {
            lambda: [e("0"), e("1/2")],
            a: [e("p"), e("p - x/2")],
            b: [e("p*x - y - p^2"), e("y - p*x + x^2/4")],
            h: e("a2^2 - 2*a1*a2 - b1"),
        }
    }

    #[test]
    fn lines_give_free_particle() {
        let s = family_to_section(&family("y - p*x", "p")).unwrap();
        assert_eq!(s.component("f").unwrap(), &e("0"));
        assert_eq!(s.component("g").unwrap(), &e("p"));
    }

    #[test]
    fn degenerate_family() {
        assert_eq!(
            family_to_section(&family("x", "y")).unwrap_err(),
            ReductionError::DegenerateFamily
        );
    }

    #[test]
    fn integrality() {
        let lines = family("y - p*x", "p");
        assert!(check_contact_integrality(&lines, &e("0")).integral);
        let r = check_contact_integrality(&lines, &e("1"));
        assert!(!r.integral);
        assert_eq!(r.induced_f, Some(e("0")));
        assert!(!check_contact_integrality(&family("x", "y"), &e("0")).integral);
    }

    #[test]
    fn associated_examples() {
        let r = associated_equation(&e("b1")).unwrap();
        assert_eq!((r.c, r.g2), (e("0"), e("0")));
        let r = associated_equation(&e("a1*b1")).unwrap();
        assert_eq!((r.c, r.g2), (e("-b/a"), e("2*b/a^2")));
        let r = associated_equation(&e("a1 + b1")).unwrap();
        assert_eq!((r.c, r.g2), (e("-1"), e("0")));
        assert_eq!(
            associated_equation(&e("a1*a2")).unwrap_err(),
            ReductionError::VanishingHb
        );
    }

    #[test]
    fn parabolas_eliminate_a2() {
        let r = associated_equation(&e("a1 + (b1 - a2)^2/2")).unwrap();
        assert!(r.eliminated);
        assert_eq!(r.g2, e("c^3"));
    }

    #[test]
    fn dual_pair() {
        let pair = linear_pair();
        pair.verify().unwrap();
        let (e1, e2) = dual_swap(&pair).unwrap();
        assert!(e2.g2.is_zero());
        assert_eq!(e1.g2, e("2"));
        let back = pair.swapped().unwrap().swapped().unwrap();
        assert_eq!(back.h, pair.h);
        assert_eq!(back.lambda, pair.lambda);
    }

    #[test]
    fn dual_rejections() {
        let mut pair = linear_pair();
        pair.lambda[1] = e("0");
        assert_eq!(pair.verify().unwrap_err(), ReductionError::IndistinctRoots(1, 2));
        let mut pair = linear_pair();
        pair.b[0] = e("y");
        assert!(matches!(
            pair.verify().unwrap_err(),
            ReductionError::NotAnIntegral { root: 1, .. }
        ));
        let mut pair = linear_pair();
        pair.h = e("a2^2 - b1");
        assert_eq!(pair.verify().unwrap_err(), ReductionError::Interdependency);
    }

    #[test]
    fn verified_integral_of_lines() {
        assert!(along_field(&e("0"), &e("y - p*x")).is_zero());
        assert!(along_field(&e("0"), &e("p")).is_zero());
    }
}
