//! The projective algebra sl₃ acting on the plane, its lifts to jets, and
//! the invariance checks built on them.
//!
//! An element with parameters `(a0, b0, a11, a12, a21, a22, c1, c2)` is the
//! point field
//!
//! ```text
//! (a0 + a11 x + a12 y) ∂x + (b0 + a21 x + a22 y) ∂y + (c1 x + c2 y)(x ∂x + y ∂y)
//! ```

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::expr::{ExprError, Expression, Rational, Var};
use crate::jets::{prolong_contact, prolong_to_jets, Base, Bundle, BundleKind, JetError, LiftedField};
use crate::linalg;

pub const PARAM_NAMES: [&str; 8] = ["a0", "b0", "a11", "a12", "a21", "a22", "c1", "c2"];

#[derive(Debug, Error, PartialEq)]
pub enum Sl3Error {
    #[error("field is not of the projective form")]
    NotInAlgebra,
    #[error("projective matrix is singular")]
    SingularMatrix,
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// A weight: an expression over base and fiber coordinates, linear in the
/// algebra parameters.
pub type Weight = Expression;

#[derive(Clone, Debug, PartialEq)]
pub struct Sl3Element {
    pub params: [Expression; 8],
}

fn param_vars() -> [Var; 8] {
    PARAM_NAMES.map(Var::named)
}

impl Sl3Element {
    /// The element with formal parameters `a0, …, c2`.
    pub fn generic() -> Sl3Element {
        Sl3Element {
            params: PARAM_NAMES.map(Expression::var),
        }
    }

    pub fn zero() -> Sl3Element {
        Sl3Element {
            params: std::array::from_fn(|_| Expression::zero()),
        }
    }

    pub fn from_rationals(values: &[Rational; 8]) -> Sl3Element {
        Sl3Element {
            params: std::array::from_fn(|i| Expression::constant(values[i].clone())),
        }
    }

    /// The eight coordinate elements, in parameter order.
    pub fn basis() -> Vec<Sl3Element> {
        (0..8)
            .map(|i| {
                let mut e = Sl3Element::zero();
                e.params[i] = Expression::one();
                e
            })
            .collect()
    }

    pub fn param(&self, name: &str) -> &Expression {
        let i = PARAM_NAMES.iter().position(|&n| n == name).expect("unknown parameter");
        &self.params[i]
    }

    /// `(ξ, η)` on the plane.
    pub fn point_field(&self) -> (Expression, Expression) {
        let [a0, b0, a11, a12, a21, a22, c1, c2] = &self.params;
        let (x, y) = (Base::X.expr(), Base::Y.expr());
        let r = c1 * &x + c2 * &y;
        let xi = a0 + &(a11 * &x) + a12 * &y + &r * &x;
        let eta = b0 + &(a21 * &x) + a22 * &y + &r * &y;
        (xi, eta)
    }

    /// `(ξ, η, ζ)` on `ℝ³(x, y, p)`.
    pub fn contact_field(&self) -> [Expression; 3] {
        let (xi, eta) = self.point_field();
        prolong_contact(&xi, &eta).expect("point field has no p dependence")
    }

    pub fn lift(&self, bundle: &Bundle, order: u8) -> Result<LiftedField, Sl3Error> {
        Ok(prolong_to_jets(&self.contact_field(), bundle, order)?)
    }

    /// Reads the parameters off a point field, failing when the field is not
    /// in the algebra.
    pub fn from_point_field(xi: &Expression, eta: &Expression) -> Result<Sl3Element, Sl3Error> {
        let (x, y) = (Base::X.var(), Base::Y.var());
        let at0 = |e: &Expression| -> Result<Expression, Sl3Error> {
            let mut m = HashMap::new();
            m.insert(x, Expression::zero());
            m.insert(y, Expression::zero());
            Ok(e.substitute(&m)?)
        };
        let dx = |e: &Expression| e.differentiate(x);
        let dy = |e: &Expression| e.differentiate(y);
        let half = Rational::new(1.into(), 2.into());
        let out = Sl3Element {
            params: [
                at0(xi)?,
                at0(eta)?,
                at0(&dx(xi))?,
                at0(&dy(xi))?,
                at0(&dx(eta))?,
                at0(&dy(eta))?,
                at0(&dx(&dx(xi)))?.scale(&half),
                at0(&dx(&dy(xi)))?,
            ],
        };
        let (xi2, eta2) = out.point_field();
        if &xi2 != xi || &eta2 != eta {
            return Err(Sl3Error::NotInAlgebra);
        }
        Ok(out)
    }

    /// Bracket of point fields `[X, Y] = XY − YX`.
    pub fn bracket(&self, other: &Sl3Element) -> Result<Sl3Element, Sl3Error> {
        let (x, y) = (Base::X.var(), Base::Y.var());
        let (a1, b1) = self.point_field();
        let (a2, b2) = other.point_field();
        let apply = |(u, v): (&Expression, &Expression), e: &Expression| {
            u * &e.differentiate(x) + v * &e.differentiate(y)
        };
        let xi = apply((&a1, &b1), &a2) - apply((&a2, &b2), &a1);
        let eta = apply((&a1, &b1), &b2) - apply((&a2, &b2), &b1);
        Sl3Element::from_point_field(&xi, &eta)
    }

    /// Specializes the formal parameters of `e` to this element.
    pub fn specialize(&self, e: &Expression) -> Result<Expression, Sl3Error> {
        let map: HashMap<Var, Expression> =
            param_vars().into_iter().zip(self.params.iter().cloned()).collect();
        Ok(e.substitute(&map)?)
    }
}

type LiftKey = (BundleKind, u8);

static GENERIC_LIFTS: LazyLock<Mutex<HashMap<LiftKey, Arc<LiftedField>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// The generic element lifted to `order`, cached per bundle.
pub fn generic_lift(bundle: &Bundle, order: u8) -> Result<Arc<LiftedField>, Sl3Error> {
    let key = (bundle.kind, order);
    if let Some(l) = GENERIC_LIFTS.lock().unwrap().get(&key) {
        return Ok(l.clone());
    }
    let lifted = Arc::new(Sl3Element::generic().lift(bundle, order)?);
    GENERIC_LIFTS.lock().unwrap().insert(key, lifted.clone());
    Ok(lifted)
}

/// `L_X̂(e)` for the generic element.
pub fn lie_derivative(e: &Expression, bundle: &Bundle) -> Result<Expression, Sl3Error> {
    let lift = generic_lift(bundle, bundle.jet_order(e))?;
    Ok(lift.apply(e)?)
}

/// `L_X̂(F) = μ·F` for every element at once.
pub fn check_relative(f: &Expression, mu: &Weight, bundle: &Bundle) -> Result<bool, Sl3Error> {
    Ok((lie_derivative(f, bundle)? - mu * f).is_zero())
}

/// `L_X̂(I) = 0` for every element at once.
pub fn check_absolute(i: &Expression, bundle: &Bundle) -> Result<bool, Sl3Error> {
    Ok(lie_derivative(i, bundle)?.is_zero())
}

/// `μ_[X,Y] = L_X̂(μ_Y) − L_Ŷ(μ_X)` over all pairs of basis elements.
pub fn check_weight_cocycle(mu: &Weight, bundle: &Bundle) -> Result<bool, Sl3Error> {
    let basis = Sl3Element::basis();
    let order = bundle.jet_order(mu);
    let lifts = basis
        .iter()
        .map(|b| b.lift(bundle, order))
        .collect::<Result<Vec<_>, _>>()?;
    let mus = basis
        .iter()
        .map(|b| b.specialize(mu))
        .collect::<Result<Vec<_>, _>>()?;
    for i in 0..8 {
        for j in i + 1..8 {
            let br = basis[i].bracket(&basis[j])?;
            let lhs = br.specialize(mu)?;
            let rhs = lifts[i].apply(&mus[j])? - lifts[j].apply(&mus[i])?;
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Result of comparing the ℚ-span of a list of weights with that of a set
/// of generators.
#[derive(Clone, Debug)]
pub struct WeightSpan {
    pub generator_rank: usize,
    pub total_rank: usize,
    /// Coordinates of each weight in the generators, when it lies in their span.
    pub coordinates: Vec<Option<Vec<Rational>>>,
}

impl WeightSpan {
    /// Every weight lies in the span of the generators.
    pub fn generates(&self) -> bool {
        self.total_rank == self.generator_rank && self.coordinates.iter().all(Option::is_some)
    }
}

/// Coefficient vectors of polynomial weights over their joint monomials.
pub fn weight_vectors(weights: &[Weight]) -> Result<Vec<Vec<Rational>>, Sl3Error> {
    let mut keys: Vec<Vec<(Var, u32)>> = Vec::new();
    let mut per: Vec<Vec<(usize, Rational)>> = Vec::new();
    for w in weights {
        let terms = w.polynomial_terms().ok_or(Sl3Error::NotInAlgebra)?;
        let mut row = Vec::new();
        for (m, c) in terms {
            let k = match keys.iter().position(|k| *k == m) {
                Some(k) => k,
                None => {
                    keys.push(m);
                    keys.len() - 1
                }
            };
            row.push((k, c));
        }
        per.push(row);
    }
    Ok(per
        .into_iter()
        .map(|row| {
            let mut v = vec![Rational::zero(); keys.len()];
            for (k, c) in row {
                v[k] = c;
            }
            v
        })
        .collect())
}

pub fn weight_span(generators: &[Weight], weights: &[Weight]) -> Result<WeightSpan, Sl3Error> {
    let mut all = generators.to_vec();
    all.extend_from_slice(weights);
    let vecs = weight_vectors(&all)?;
    let (gens, rest) = vecs.split_at(generators.len());
    Ok(WeightSpan {
        generator_rank: linalg::rank(gens),
        total_rank: linalg::rank(&vecs),
        coordinates: rest.iter().map(|w| linalg::express(gens, w)).collect(),
    })
}

/// A projective transformation of the plane, `(x, y) ↦ (M·(x, y, 1))` in
/// homogeneous coordinates.
#[derive(Clone, Debug)]
pub struct ProjectiveMap {
    m: [[Rational; 3]; 3],
    inv: [[Rational; 3]; 3],
}

fn det3(m: &[[Rational; 3]; 3]) -> Rational {
    let rows: Vec<Vec<Rational>> = m.iter().map(|r| r.to_vec()).collect();
    linalg::determinant(&rows)
}

fn inverse3(m: &[[Rational; 3]; 3]) -> Option<[[Rational; 3]; 3]> {
    let d = det3(m);
    if d.is_zero() {
        return None;
    }
    let c = |i: usize, j: usize| {
        let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        &m[i1][j1] * &m[i2][j2] - &m[i1][j2] * &m[i2][j1]
    };
    // inverse = adjugate / det, adjugate = transposed cofactors
    Some(std::array::from_fn(|i| std::array::from_fn(|j| c(j, i) / &d)))
}

impl ProjectiveMap {
    pub fn from_matrix(m: [[Rational; 3]; 3]) -> Result<ProjectiveMap, Sl3Error> {
        let inv = inverse3(&m).ok_or(Sl3Error::SingularMatrix)?;
        Ok(ProjectiveMap { m, inv })
    }

    /// `I + ε·A` where `A` is the matrix of a rational algebra element.
    pub fn near_identity(g: &Sl3Element, eps: &Rational) -> Result<ProjectiveMap, Sl3Error> {
        let p: Vec<Rational> = g
            .params
            .iter()
            .map(|e| e.as_constant().ok_or(Sl3Error::NotInAlgebra))
            .collect::<Result<_, _>>()?;
        let [a0, b0, a11, a12, a21, a22, c1, c2] = <[Rational; 8]>::try_from(p).unwrap();
        let z = Rational::zero();
        let a = [[a11, a12, a0], [a21, a22, b0], [-c1, -c2, z]];
        let m = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                let id = if i == j { Rational::one() } else { Rational::zero() };
                id + eps * &a[i][j]
            })
        });
        ProjectiveMap::from_matrix(m)
    }

    pub fn matrix(&self) -> &[[Rational; 3]; 3] {
        &self.m
    }

    pub fn inverse(&self) -> ProjectiveMap {
        ProjectiveMap {
            m: self.inv.clone(),
            inv: self.m.clone(),
        }
    }

    fn plane_map(m: &[[Rational; 3]; 3]) -> (Expression, Expression) {
        let (x, y) = (Base::X.expr(), Base::Y.expr());
        let row = |r: &[Rational; 3]| {
            x.scale(&r[0]) + y.scale(&r[1]) + Expression::constant(r[2].clone())
        };
        let den = row(&m[2]);
        let xx = row(&m[0]).checked_div(&den).expect("nonzero row");
        let yy = row(&m[1]).checked_div(&den).expect("nonzero row");
        (xx, yy)
    }

    /// `(X, Y, P)` in terms of `(x, y, p)`, with `P` the prolonged slope.
    pub fn contact_map(&self) -> Result<[Expression; 3], Sl3Error> {
        contact_of(&self.m)
    }

    /// Image of a point of `ℝ³(x, y, p)`; `None` on the singular locus.
    pub fn apply_point(&self, pt: [f64; 3]) -> Option<[f64; 3]> {
        let m: Vec<Vec<f64>> = self
            .m
            .iter()
            .map(|r| r.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
            .collect();
        let [x, y, p] = pt;
        let w = m[2][0] * x + m[2][1] * y + m[2][2];
        let u = m[0][0] * x + m[0][1] * y + m[0][2];
        let v = m[1][0] * x + m[1][1] * y + m[1][2];
        // derivatives of X = u/w, Y = v/w along (1, p)
        let du = m[0][0] + m[0][1] * p;
        let dv = m[1][0] + m[1][1] * p;
        let dw = m[2][0] + m[2][1] * p;
        let dx = (du * w - u * dw) / (w * w);
        let dy = (dv * w - v * dw) / (w * w);
        if w.abs() < 1e-12 || dx.abs() < 1e-12 {
            return None;
        }
        Some([u / w, v / w, dy / dx])
    }

    /// Whether the map and its prolongation stay away from their singular
    /// loci on a box of `(x, y, p)`: the denominators keep one sign and
    /// their smallest modulus is at least `margin` times the largest.
    pub fn regular_on(&self, bounds: &[[f64; 2]; 3], margin: f64) -> bool {
        let m: Vec<Vec<f64>> = self
            .m
            .iter()
            .map(|r| r.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
            .collect();
        // both denominators are affine in each coordinate separately
        let mut w = Vec::with_capacity(8);
        let mut d = Vec::with_capacity(8);
        for k in 0..8 {
            let [x, y, p] = std::array::from_fn(|i| bounds[i][(k >> i) & 1]);
            let wv = m[2][0] * x + m[2][1] * y + m[2][2];
            let uv = m[0][0] * x + m[0][1] * y + m[0][2];
            w.push(wv);
            d.push((m[0][0] + m[0][1] * p) * wv - uv * (m[2][0] + m[2][1] * p));
        }
        let tame = |vals: &[f64]| {
            let lo = vals.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
            let hi = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let same = vals.iter().all(|v| v.signum() == vals[0].signum());
            same && lo.is_finite() && lo >= margin * hi
        };
        tame(&w) && tame(&d)
    }

    /// A map `I + ε·A` with parameters of `A` drawn from `{k/8 : |k| ≤ 8}`,
    /// redrawn until [`ProjectiveMap::regular_on`] holds on the box.
    pub fn random_near_identity<R: rand::Rng>(
        rng: &mut R,
        eps: &Rational,
        bounds: &[[f64; 2]; 3],
        margin: f64,
    ) -> ProjectiveMap {
        loop {
            let params: [Rational; 8] =
                std::array::from_fn(|_| Rational::new(rng.gen_range(-8..=8).into(), 8.into()));
            let g = Sl3Element::from_rationals(&params);
            if let Ok(m) = ProjectiveMap::near_identity(&g, eps) {
                if m.regular_on(bounds, margin) {
                    return m;
                }
            }
        }
    }

    /// Bounding box of the image of a set of points.
    pub fn image_bounds(&self, points: &[[f64; 3]]) -> Option<[[f64; 2]; 3]> {
        let mut bb = [[f64::INFINITY, f64::NEG_INFINITY]; 3];
        for q in points {
            let r = self.apply_point(*q)?;
            for k in 0..3 {
                bb[k][0] = bb[k][0].min(r[k]);
                bb[k][1] = bb[k][1].max(r[k]);
            }
        }
        Some(bb)
    }

    /// The equation `y'' = f` transported by the map, in the new coordinates.
    pub fn pushforward_ode(&self, f: &Expression) -> Result<Expression, Sl3Error> {
        let [xx, _, pp] = self.contact_map()?;
        let d = |e: &Expression| -> Expression {
            let (x, y, p) = (Base::X.var(), Base::Y.var(), Base::P.var());
            e.differentiate(x) + Base::P.expr() * e.differentiate(y) + f * &e.differentiate(p)
        };
        let new_f = d(&pp).checked_div(&d(&xx))?;
        self.to_new_coordinates(&new_f)
    }

    /// A section `(f, g)` of π transported by the map.
    pub fn pushforward_pi(
        &self,
        f: &Expression,
        g: &Expression,
    ) -> Result<(Expression, Expression), Sl3Error> {
        let [xx, yy, pp] = self.contact_map()?;
        let d = |e: &Expression| -> Expression {
            let (x, y, p) = (Base::X.var(), Base::Y.var(), Base::P.var());
            e.differentiate(x) + g * &e.differentiate(y) + f * &e.differentiate(p)
        };
        let dx = d(&xx);
        let new_f = d(&pp).checked_div(&dx)?;
        let new_g = d(&yy).checked_div(&dx)?;
        Ok((self.to_new_coordinates(&new_f)?, self.to_new_coordinates(&new_g)?))
    }

    /// Rewrites an expression in old coordinates through the inverse map.
    fn to_new_coordinates(&self, e: &Expression) -> Result<Expression, Sl3Error> {
        let [xi, yi, pi] = contact_of(&self.inv)?;
        let map: HashMap<Var, Expression> = [
            (Base::X.var(), xi),
            (Base::Y.var(), yi),
            (Base::P.var(), pi),
        ]
        .into_iter()
        .collect();
        Ok(e.substitute(&map)?)
    }
}

fn contact_of(m: &[[Rational; 3]; 3]) -> Result<[Expression; 3], Sl3Error> {
    let (xx, yy) = ProjectiveMap::plane_map(m);
    let (x, y) = (Base::X.var(), Base::Y.var());
    let pe = Base::P.expr();
    let num = yy.differentiate(x) + &pe * &yy.differentiate(y);
    let den = xx.differentiate(x) + &pe * &xx.differentiate(y);
    let pp = num.checked_div(&den)?;
    Ok([xx, yy, pp])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn e(s: &str) -> Expression {
        parse(s).unwrap()
    }

    #[test]
    fn basis_fields() {
        let b = Sl3Element::basis();
        assert_eq!(b.len(), 8);
        assert_eq!(b[0].point_field(), (e("1"), e("0")));
        assert_eq!(b[6].point_field(), (e("x^2"), e("x*y")));
        let all: Vec<Expression> = b
            .iter()
            .map(|g| {
                let (xi, eta) = g.point_field();
                xi + eta * e("q")
            })
            .collect();
        assert_eq!(linalg::rank(&weight_vectors(&all).unwrap()), 8);
    }

    #[test]
    fn generic_lift_on_base() {
        let pi = Bundle::pi();
        let lift = Sl3Element::generic().lift(&pi, 1).unwrap();
        let (xi, eta) = Sl3Element::generic().point_field();
        assert_eq!(lift.apply(&e("x")).unwrap(), xi);
        let zeta = prolong_contact(&xi, &eta).unwrap()[2].clone();
        assert_eq!(lift.apply(&e("p")).unwrap(), zeta);
        assert_eq!(
            zeta,
            e("a21 + c1*y + p*(a22 - a11 - c1*x + c2*y) - p^2*(a12 + c2*x)")
        );
        let zero = Sl3Element::zero().lift(&pi, 2).unwrap();
        assert!(zero.apply(&e("f_xy*g + p")).unwrap().is_zero());
    }

    #[test]
    fn bracket_closes() {
        let b = Sl3Element::basis();
        // [∂x, x(x∂x + y∂y)] = 2x∂x + y∂y
        let br = b[0].bracket(&b[6]).unwrap();
        assert_eq!(br.point_field(), (e("2*x"), e("y")));
        assert!(matches!(
            Sl3Element::from_point_field(&e("x^3"), &e("0")),
            Err(Sl3Error::NotInAlgebra)
        ));
    }

    #[test]
    fn relative_and_absolute() {
        let pi = Bundle::pi();
        let i0 = e("p - g");
        let mu0 = e("-a11 + a22 - a12*(p + g) - c1*x + c2*(y - x*(p + g))");
        assert!(check_relative(&i0, &mu0, &pi).unwrap());
        let i1 = e("g_p");
        let mu1 = e("2*(c2*x + a12)*(p - g)");
        assert!(check_relative(&i1, &mu1, &pi).unwrap());
        assert!(!check_relative(&i1, &Expression::zero(), &pi).unwrap());
        assert!(!check_absolute(&i0, &pi).unwrap());
        assert!(check_weight_cocycle(&mu0, &pi).unwrap());
        let bad = e("-a11 + a22 + a12*(p + g) - c1*x + c2*(y - x*(p + g))");
        assert!(!check_weight_cocycle(&bad, &pi).unwrap());
    }

    #[test]
    fn scaling_pushforward() {
        let m = ProjectiveMap::from_matrix([
            [Rational::one(), Rational::zero(), Rational::zero()],
            [Rational::zero(), Rational::from_integer(2.into()), Rational::zero()],
            [Rational::zero(), Rational::zero(), Rational::one()],
        ])
        .unwrap();
        assert_eq!(m.pushforward_ode(&e("y*p")).unwrap(), e("y*p/2"));
        let back = m.inverse().pushforward_ode(&e("y*p/2")).unwrap();
        assert_eq!(back, e("y*p"));
        assert_eq!(m.apply_point([1.0, 2.0, 3.0]), Some([1.0, 4.0, 6.0]));
    }

    #[test]
    fn flat_equation_is_preserved() {
        let g = Sl3Element::from_rationals(&std::array::from_fn(|i| {
            Rational::new((i as i64 - 3).into(), 5.into())
        }));
        let m = ProjectiveMap::near_identity(&g, &Rational::new(1.into(), 4.into())).unwrap();
        assert!(m.pushforward_ode(&Expression::zero()).unwrap().is_zero());
    }
}
