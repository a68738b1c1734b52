//! Jet bookkeeping over the base `ℝ³(x, y, p)`.
//!
//! The bundle π carries two fiber functions `(f, g)`, the subbundle π̃ only
//! `f` (with `g = p`). Jet coordinates are ordinary interned variables named
//! `f_xyp…`; derivative letters are normalized so `f_yx` and `f_xy` coincide.

use std::cell::Cell;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::multi_indices;
use crate::expr::{ExprError, Expression, Var, VariableSpace};

#[derive(Debug, Error, PartialEq)]
pub enum JetError {
    #[error("jet order {order} exceeds the bundle budget {budget}")]
    OrderBudget { order: u8, budget: u8 },
    #[error("point field component depends on p")]
    DependsOnP,
    #[error("section has no component for fiber `{0}`")]
    MissingFiber(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// A base coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    X,
    Y,
    P,
}

impl Base {
    pub const ALL: [Base; 3] = [Base::X, Base::Y, Base::P];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["x", "y", "p"][self.index()]
    }

    pub fn var(self) -> Var {
        Var::named(self.name())
    }

    pub fn expr(self) -> Expression {
        Expression::from_var(self.var())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BundleKind {
    Pi,
    #[serde(alias = "pi_tilde")]
    PiTilde,
}

/// A bundle together with its jet-order budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bundle {
    pub kind: BundleKind,
    pub order: u8,
}

pub const DEFAULT_ORDER: u8 = 4;

fn order_of(counts: [u8; 3]) -> u8 {
    counts.iter().sum()
}

impl Bundle {
    pub fn pi() -> Bundle {
        Bundle {
            kind: BundleKind::Pi,
            order: DEFAULT_ORDER,
        }
    }

    pub fn pitilde() -> Bundle {
        Bundle {
            kind: BundleKind::PiTilde,
            order: DEFAULT_ORDER,
        }
    }

    pub fn with_order(self, order: u8) -> Bundle {
        Bundle { order, ..self }
    }

    pub fn fibers(&self) -> &'static [&'static str] {
        match self.kind {
            BundleKind::Pi => &["f", "g"],
            BundleKind::PiTilde => &["f"],
        }
    }

    fn is_fiber(&self, func: &str) -> bool {
        self.fibers().contains(&func)
    }

    /// Jet coordinates `(func, counts)` of `var`, if it is one on this bundle.
    pub fn jet_parts(&self, v: Var) -> Option<(String, [u8; 3])> {
        let (func, counts) = v.jet_parts()?;
        self.is_fiber(&func).then(|| (func.to_string(), counts))
    }

    /// All jet coordinates of order exactly `k`, fiber by fiber.
    pub fn jets_of_order(&self, k: u8) -> Vec<Var> {
        let mut out = Vec::new();
        for f in self.fibers() {
            for c in multi_indices(k) {
                if order_of(c) == k {
                    out.push(Var::jet(f, c));
                }
            }
        }
        out
    }

    /// Base coordinates followed by every jet coordinate of order ≤ `k`.
    pub fn coordinates(&self, k: u8) -> Vec<Var> {
        let mut out: Vec<Var> = Base::ALL.iter().map(|b| b.var()).collect();
        for j in 0..=k {
            out.extend(self.jets_of_order(j));
        }
        out
    }

    pub fn space(&self) -> VariableSpace {
        VariableSpace::jet_space(self.fibers(), self.order)
    }

    /// Highest jet order occurring in `e` (0 when only base coordinates or
    /// fiber values appear).
    pub fn jet_order(&self, e: &Expression) -> u8 {
        e.free_vars()
            .into_iter()
            .filter_map(|v| self.jet_parts(v))
            .map(|(_, c)| order_of(c))
            .max()
            .unwrap_or(0)
    }

    /// The total derivative `d/dv`.
    pub fn total_derivative(&self, e: &Expression, v: Base) -> Result<Expression, JetError> {
        let over = Cell::new(None);
        let target = v.var();
        let i = v.index();
        let out = e.derive_with(&|u| {
            if u == target {
                return Some(Expression::one());
            }
            let (func, mut counts) = self.jet_parts(u)?;
            counts[i] += 1;
            let order = order_of(counts);
            if order > self.order {
                over.set(Some(order));
                return None;
            }
            Some(Expression::from_var(Var::jet(&func, counts)))
        });
        match over.get() {
            Some(order) => Err(JetError::OrderBudget {
                order,
                budget: self.order,
            }),
            None => Ok(out),
        }
    }

    /// `D = d/dx + g d/dy + f d/dp`, the total derivative along the curves of
    /// a section (with `g = p` on π̃).
    pub fn along_curves(&self, e: &Expression) -> Result<Expression, JetError> {
        let g = match self.kind {
            BundleKind::Pi => Expression::var("g"),
            BundleKind::PiTilde => Base::P.expr(),
        };
        let f = Expression::var("f");
        let dx = self.total_derivative(e, Base::X)?;
        let dy = self.total_derivative(e, Base::Y)?;
        let dp = self.total_derivative(e, Base::P)?;
        Ok(dx + g * dy + f * dp)
    }
}

/// `A d/dx + B d/dy + C d/dp` with coefficients over jets.
#[derive(Clone, Debug)]
pub struct TotalDerivation {
    pub coeffs: [Expression; 3],
}

impl TotalDerivation {
    pub fn new(a: Expression, b: Expression, c: Expression) -> TotalDerivation {
        TotalDerivation { coeffs: [a, b, c] }
    }

    /// Value on a base coordinate.
    pub fn on(&self, v: Base) -> &Expression {
        &self.coeffs[v.index()]
    }

    pub fn apply(&self, bundle: &Bundle, e: &Expression) -> Result<Expression, JetError> {
        let mut acc = Expression::zero();
        for v in Base::ALL {
            let c = &self.coeffs[v.index()];
            if c.is_zero() {
                continue;
            }
            acc = acc + c * &bundle.total_derivative(e, v)?;
        }
        Ok(acc)
    }
}

/// Contact prolongation of a point field `ξ ∂x + η ∂y` to `ℝ³(x, y, p)`:
/// `ζ = η_x + p(η_y − ξ_x) − p² ξ_y`.
pub fn prolong_contact(xi: &Expression, eta: &Expression) -> Result<[Expression; 3], JetError> {
    let p = Base::P.var();
    if xi.depends_on(p) || eta.depends_on(p) {
        return Err(JetError::DependsOnP);
    }
    let (x, y) = (Base::X.var(), Base::Y.var());
    let pe = Base::P.expr();
    let zeta = eta.differentiate(x) + &pe * &(eta.differentiate(y) - xi.differentiate(x))
        - &(&pe * &pe) * &xi.differentiate(y);
    Ok([xi.clone(), eta.clone(), zeta])
}

/// A field on `ℝ³(x, y, p)` lifted to the jets of a bundle up to a fixed
/// order.
#[derive(Clone, Debug)]
pub struct LiftedField {
    pub bundle: Bundle,
    pub base: [Expression; 3],
    order: u8,
    components: HashMap<Var, Expression>,
}

/// Lifts `(ξ, η, ζ)` to jets of order ≤ `order`.
///
/// Order zero: `Φ_f = D(ζ) − f D(ξ)`, `Φ_g = D(η) − g D(ξ)` with `D` the
/// derivative along the section's curves. Higher orders follow
/// `Φ_{σ+v} = D_v Φ_σ − Σ_w u_{σ+w} D_v ξ^w`.
pub fn prolong_to_jets(
    field: &[Expression; 3],
    bundle: &Bundle,
    order: u8,
) -> Result<LiftedField, JetError> {
    if order > bundle.order {
        return Err(JetError::OrderBudget {
            order,
            budget: bundle.order,
        });
    }
    let [xi, eta, zeta] = field;
    let d_xi = bundle.along_curves(xi)?;
    let mut components = HashMap::new();
    let f = Var::named("f");
    components.insert(
        f,
        bundle.along_curves(zeta)? - Expression::from_var(f) * d_xi.clone(),
    );
    if bundle.kind == BundleKind::Pi {
        let g = Var::named("g");
        components.insert(
            g,
            bundle.along_curves(eta)? - Expression::from_var(g) * d_xi.clone(),
        );
    }
    // D_v ξ^w for every pair, reused across all jets.
    let mut d_base = [[Expression::zero(), Expression::zero(), Expression::zero()],
        [Expression::zero(), Expression::zero(), Expression::zero()],
        [Expression::zero(), Expression::zero(), Expression::zero()]];
    for v in Base::ALL {
        for w in Base::ALL {
            d_base[v.index()][w.index()] = bundle.total_derivative(&field[w.index()], v)?;
        }
    }
    for k in 1..=order {
        for func in bundle.fibers() {
            for counts in multi_indices(k) {
                if order_of(counts) != k {
                    continue;
                }
                // pick the first direction v with counts[v] > 0 as the step
                let vi = counts.iter().position(|&c| c > 0).unwrap();
                let mut parent = counts;
                parent[vi] -= 1;
                let phi_parent = &components[&Var::jet(func, parent)];
                let mut acc = bundle.total_derivative(phi_parent, Base::ALL[vi])?;
                for w in Base::ALL {
                    let dw = &d_base[vi][w.index()];
                    if dw.is_zero() {
                        continue;
                    }
                    let mut c = parent;
                    c[w.index()] += 1;
                    acc = acc - Expression::from_var(Var::jet(func, c)) * dw.clone();
                }
                components.insert(Var::jet(func, counts), acc);
            }
        }
    }
    Ok(LiftedField {
        bundle: *bundle,
        base: field.clone(),
        order,
        components,
    })
}

impl LiftedField {
    pub fn order(&self) -> u8 {
        self.order
    }

    /// Coefficient on a jet coordinate.
    pub fn component(&self, v: Var) -> Option<&Expression> {
        self.components.get(&v)
    }

    /// Applies the lifted field as a derivation. Variables that are neither
    /// base nor fiber coordinates are treated as constants.
    pub fn apply(&self, e: &Expression) -> Result<Expression, JetError> {
        let need = self.bundle.jet_order(e);
        if need > self.order {
            return Err(JetError::OrderBudget {
                order: need,
                budget: self.order,
            });
        }
        let base_vars = [Base::X.var(), Base::Y.var(), Base::P.var()];
        Ok(e.derive_with(&|u| {
            if let Some(i) = base_vars.iter().position(|&b| b == u) {
                return Some(self.base[i].clone());
            }
            self.components.get(&u).cloned()
        }))
    }
}

/// A concrete section: one expression in `(x, y, p)` per fiber function.
#[derive(Clone, Debug)]
pub struct Section {
    pub bundle: BundleKind,
    pub components: Vec<(String, Expression)>,
}

impl Section {
    pub fn pi(f: Expression, g: Expression) -> Section {
        Section {
            bundle: BundleKind::Pi,
            components: vec![("f".into(), f), ("g".into(), g)],
        }
    }

    pub fn pitilde(f: Expression) -> Section {
        Section {
            bundle: BundleKind::PiTilde,
            components: vec![("f".into(), f)],
        }
    }

    pub fn component(&self, func: &str) -> Option<&Expression> {
        self.components.iter().find(|(n, _)| n == func).map(|(_, e)| e)
    }

    /// Partial derivative of a component with the given counts.
    pub fn jet_value(&self, func: &str, counts: [u8; 3]) -> Result<Expression, JetError> {
        let mut e = self
            .component(func)
            .ok_or_else(|| JetError::MissingFiber(func.to_string()))?
            .clone();
        for v in Base::ALL {
            for _ in 0..counts[v.index()] {
                e = e.differentiate(v.var());
            }
        }
        Ok(e)
    }

    /// All jet values up to `order`, keyed by jet variable.
    pub fn jets(&self, order: u8) -> Result<HashMap<Var, Expression>, JetError> {
        let mut out = HashMap::new();
        for (func, _) in &self.components {
            for c in multi_indices(order) {
                out.insert(Var::jet(func, c), self.jet_value(func, c)?);
            }
        }
        Ok(out)
    }
}

/// Replaces every jet coordinate in `e` by the corresponding derivative of
/// the section.
pub fn restrict_to_section(e: &Expression, s: &Section) -> Result<Expression, JetError> {
    let mut map = HashMap::new();
    for v in e.free_vars() {
        if let Some((func, counts)) = v.jet_parts() {
            if s.component(&func).is_some() {
                map.insert(v, s.jet_value(&func, counts)?);
            }
        }
    }
    Ok(e.substitute(&map)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn e(s: &str) -> Expression {
        parse(s).unwrap()
    }

    #[test]
    fn total_derivatives() {
        let pi = Bundle::pi();
        assert_eq!(pi.total_derivative(&e("f"), Base::X).unwrap(), e("f_x"));
        assert_eq!(pi.total_derivative(&e("p*g"), Base::P).unwrap(), e("g + p*g_p"));
        assert_eq!(
            pi.total_derivative(&e("f*g_y"), Base::X).unwrap(),
            e("f_x*g_y + f*g_xy")
        );
    }

    #[test]
    fn order_budget() {
        let b = Bundle::pi().with_order(2);
        assert_eq!(
            b.total_derivative(&e("f_xy"), Base::P),
            Err(JetError::OrderBudget { order: 3, budget: 2 })
        );
    }

    #[test]
    fn total_derivatives_commute() {
        let b = Bundle::pi();
        let u = e("f*g_y^2 + p*x*g_p/(1 + f_x)");
        let xy = b.total_derivative(&b.total_derivative(&u, Base::X).unwrap(), Base::Y).unwrap();
        let yx = b.total_derivative(&b.total_derivative(&u, Base::Y).unwrap(), Base::X).unwrap();
        assert_eq!(xy, yx);
    }

    #[test]
    fn contact_prolongation() {
        let z = |a: &str, b: &str| prolong_contact(&e(a), &e(b)).unwrap()[2].clone();
        assert!(z("x", "y").is_zero());
        assert_eq!(z("x^2", "x*y"), e("y - p*x"));
        assert!(z("1", "0").is_zero());
        assert_eq!(prolong_contact(&e("p"), &e("0")).unwrap_err(), JetError::DependsOnP);
    }

    #[test]
    fn order_zero_lift() {
        let pi = Bundle::pi();
        let scale = prolong_to_jets(&[e("x"), e("y"), e("0")], &pi, 1).unwrap();
        assert_eq!(scale.apply(&e("f")).unwrap(), e("-f"));
        let lift = prolong_to_jets(&[e("0"), e("y"), e("p")], &pi, 1).unwrap();
        assert_eq!(lift.apply(&e("g")).unwrap(), e("g"));
        let tr = prolong_to_jets(&[e("1"), e("0"), e("0")], &pi, 2).unwrap();
        assert!(tr.apply(&e("f_x")).unwrap().is_zero());
        assert!(tr.apply(&e("g_xp*f")).unwrap().is_zero());
        assert_eq!(tr.apply(&e("x*f")).unwrap(), e("f"));
    }

    #[test]
    fn restriction() {
        let s = Section::pitilde(e("y*p"));
        assert_eq!(restrict_to_section(&e("f_p"), &s).unwrap(), e("y"));
        let flat = Section::pi(e("0"), e("p"));
        assert!(restrict_to_section(&e("g_x + g*g_y + f*g_p"), &flat).unwrap().is_zero());
        let sq = Section::pitilde(e("x^2"));
        assert_eq!(restrict_to_section(&e("f"), &sq).unwrap(), e("x^2"));
    }

    #[test]
    fn restriction_commutes_with_total_derivative() {
        let b = Bundle::pi();
        let s = Section::pi(e("x*y + p^2"), e("y/(1 + x^2) + p"));
        let u = e("f*g_y - x*f_p*g");
        for v in Base::ALL {
            let lhs = restrict_to_section(&b.total_derivative(&u, v).unwrap(), &s).unwrap();
            let rhs = restrict_to_section(&u, &s).unwrap().differentiate(v.var());
            assert_eq!(lhs, rhs);
        }
    }
}
