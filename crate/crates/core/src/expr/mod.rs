//! Exact symbolic expressions: rational functions over ℚ in named variables,
//! extended by formal rational powers `|B|^(m/d)` of polynomials.
//!
//! An [`Expression`] is always stored in canonical form: an expanded numerator
//! polynomial over a denominator kept as a product of registered, primitive
//! factor polynomials. Radicals are opaque atoms `t = B^(1/d)` that obey
//! `t^d = B`; numerators are reduced so every atom exponent stays below `d`.

mod eval;
mod identity;
mod parse;
pub(crate) mod poly;
mod print;
mod space;
mod store;

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, ToPrimitive, Zero};
use smallvec::SmallVec;
use thiserror::Error;

pub use eval::{Compiled, Number, PowerMode};
pub use identity::{canonical_equal, probabilistic_equal, probabilistic_zero, PointSampler};
pub use parse::{parse, parse_in};
pub use space::{multi_indices, Role, VariableSpace};
pub use store::Var;

use poly::{Monomial, Poly};

pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` is not declared")]
    UndeclaredVariable(String),
    #[error("variable `{0}` is unbound")]
    UnboundVariable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("negative base under a rational power")]
    NegativeBase,
    #[error("value is irrational and has no exact representation")]
    Irrational,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("unable to sample a non-singular point")]
    UnableToSample,
}

/// Sign chart on which a formal `|B|^q` is resolved: `|B| = B` or `|B| = -B`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn of(v: f64) -> Sign {
        if v < 0.0 {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }
}

pub(crate) type Denom = SmallVec<[(u32, u32); 4]>;

/// Canonical exact expression.
///
/// Equality is semantic: two values compare equal when their difference
/// reduces to zero.
#[derive(Clone, Debug)]
pub struct Expression {
    pub(crate) num: Poly,
    pub(crate) den: Denom,
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        (self.num == other.num && self.den == other.den) || (self - other).is_zero()
    }
}

impl Eq for Expression {}

pub(crate) fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

impl Default for Expression {
    fn default() -> Self {
        Self::zero()
    }
}

impl Expression {
    pub fn zero() -> Self {
        Expression {
            num: Poly::zero(),
            den: Denom::new(),
        }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Expression {
            num: Poly::constant(c),
            den: Denom::new(),
        }
    }

    pub fn int(n: i64) -> Self {
        Self::constant(rat(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::constant(Rational::new(n.into(), d.into()))
    }

    pub fn var(name: &str) -> Self {
        Self::from_var(Var::named(name))
    }

    pub fn from_var(v: Var) -> Self {
        Expression {
            num: Poly::var(v.id()),
            den: Denom::new(),
        }
    }

    pub(crate) fn from_poly(p: Poly) -> Self {
        Expression {
            num: p,
            den: Denom::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// Number of numerator terms; a rough size measure.
    pub fn size(&self) -> usize {
        self.num.len()
    }

    /// Variables the expression depends on, including those inside radicals.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut ids: Vec<u32> = Vec::new();
        let push_poly = |p: &Poly, ids: &mut Vec<u32>| {
            for v in p.vars() {
                if v & store::ATOM_BIT != 0 {
                    ids.extend(store::atom(v).base.vars());
                } else {
                    ids.push(v);
                }
            }
        };
        push_poly(&self.num, &mut ids);
        for &(f, _) in &self.den {
            push_poly(&store::factor(f).poly, &mut ids);
        }
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter().map(Var).collect()
    }

    /// Radical atoms appearing in the numerator.
    pub fn atoms(&self) -> Vec<Var> {
        self.num
            .vars()
            .into_iter()
            .filter(|&v| v & store::ATOM_BIT != 0)
            .map(Var)
            .collect()
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.free_vars().binary_search(&v).is_ok()
    }

    /// Numerator as an expression.
    pub fn numerator(&self) -> Expression {
        Expression::from_poly(self.num.clone())
    }

    /// Denominator as an expression (always a polynomial).
    pub fn denominator(&self) -> Expression {
        Expression::from_poly(denom_poly(&self.den))
    }

    /// Terms `(monomial, coefficient)` of a polynomial expression, with
    /// monomials as `(variable, exponent)` lists.
    pub fn polynomial_terms(&self) -> Option<Vec<(Vec<(Var, u32)>, Rational)>> {
        if !self.den.is_empty() {
            return None;
        }
        Some(
            self.num
                .terms()
                .iter()
                .map(|(m, c)| (m.iter().map(|(v, e)| (Var(v), e)).collect(), c.clone()))
                .collect(),
        )
    }

    // ---- canonicalization ----------------------------------------------

    fn normalize(num: Poly, den: Denom) -> Expression {
        let num = reduce_atoms(num);
        if num.is_zero() {
            return Expression::zero();
        }
        if den.is_empty() {
            return Expression { num, den };
        }
        let mut num = num;
        let mut out = Denom::new();
        let mut rng_state = num.len() as u64 ^ 0x2545_F491_4F6C_DD1D;
        for &(f, k) in den.iter() {
            let info = store::factor(f);
            let mut k = k;
            while k > 0 && store::may_divide(&info, &num, &mut rng_state) {
                match num.div_exact(&info.poly) {
                    Some(q) => {
                        num = q;
                        k -= 1;
                    }
                    None => break,
                }
            }
            if k > 0 {
                out.push((f, k));
            }
        }
        Expression { num, den: out }
    }

    pub fn checked_add(&self, other: &Expression) -> Expression {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            let num = self.num.add(&other.num);
            if self.den.is_empty() {
                return Expression {
                    num,
                    den: Denom::new(),
                };
            }
            return Self::normalize(num, self.den.clone());
        }
        let (lcm, ca, cb) = denom_lcm(&self.den, &other.den);
        let num = self.num.mul(&ca).add(&other.num.mul(&cb));
        Self::normalize(num, lcm)
    }

    pub fn checked_mul(&self, other: &Expression) -> Expression {
        if self.is_zero() || other.is_zero() {
            return Expression::zero();
        }
        let num = self.num.mul(&other.num);
        let den = denom_mul(&self.den, &other.den);
        if den.is_empty() {
            return Expression {
                num: reduce_atoms(num),
                den,
            };
        }
        Self::normalize(num, den)
    }

    pub fn scale(&self, c: &Rational) -> Expression {
        if c.is_zero() {
            return Expression::zero();
        }
        Expression {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// Multiplicative inverse.
    pub fn checked_inv(&self) -> Result<Expression, ExprError> {
        if self.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        if let Some(c) = self.num.as_constant() {
            let num = Poly::constant(Rational::one() / c).mul(&denom_poly(&self.den));
            return Ok(Expression {
                num,
                den: Denom::new(),
            });
        }
        let (multiplier, plain) = rationalize(&self.num)?;
        let (c, factors) = store::factorize(&plain);
        let num = multiplier
            .mul(&denom_poly(&self.den))
            .scale(&(Rational::one() / c));
        Ok(Self::normalize(num, factors.into_iter().collect()))
    }

    pub fn checked_div(&self, other: &Expression) -> Result<Expression, ExprError> {
        Ok(self.checked_mul(&other.checked_inv()?))
    }

    pub fn pow(&self, n: i64) -> Result<Expression, ExprError> {
        if n < 0 {
            return self.checked_inv()?.pow(-n);
        }
        let n = n as u32;
        if n == 0 {
            return Ok(Expression::one());
        }
        let num = reduce_atoms(self.num.pow(n));
        let den = self.den.iter().map(|&(f, k)| (f, k * n)).collect();
        Ok(Expression { num, den })
    }

    /// Formal power with rational exponent; the base is assumed positive on
    /// the working chart.
    pub fn rational_pow(&self, q: &Rational) -> Result<Expression, ExprError> {
        if q.is_integer() {
            let n = q.to_integer().to_i64().ok_or_else(|| {
                ExprError::Unsupported("exponent out of range".into())
            })?;
            return self.pow(n);
        }
        if self.is_zero() {
            return if q.is_positive() {
                Ok(Expression::zero())
            } else {
                Err(ExprError::DivisionByZero)
            };
        }
        let mut result = poly_rational_pow(&self.num, q)?;
        for &(f, k) in &self.den {
            let info = store::factor(f);
            let e = -(q * rat(k as i64));
            result = result.checked_mul(&poly_rational_pow(&info.poly, &e)?);
        }
        Ok(result)
    }

    /// `|self|^q` resolved on the given sign chart of `self`.
    pub fn abs_pow(&self, q: &Rational, chart: Sign) -> Result<Expression, ExprError> {
        match chart {
            Sign::Positive => self.rational_pow(q),
            Sign::Negative => (-self).rational_pow(q),
        }
    }

    // ---- derivations -----------------------------------------------------

    /// Applies the derivation determined by its values on variables; `None`
    /// means the variable is annihilated. Radical atoms follow the chain rule
    /// `δ(B^(1/d)) = B^(1/d) · δB / (d·B)`.
    pub fn derive_with(&self, delta: &dyn Fn(Var) -> Option<Expression>) -> Expression {
        let mut cache: HashMap<u32, Option<Expression>> = HashMap::new();
        self.derive_cached(delta, &mut cache)
    }

    pub(crate) fn derive_cached(
        &self,
        delta: &dyn Fn(Var) -> Option<Expression>,
        cache: &mut HashMap<u32, Option<Expression>>,
    ) -> Expression {
        let d_num = derive_poly(&self.num, delta, cache);
        if self.den.is_empty() {
            return d_num;
        }
        // δ(N/D) = (δN − N Σ k_i δF_i / F_i) / D
        let mut log_der = Expression::zero();
        for &(f, k) in &self.den {
            let info = store::factor(f);
            let d_f = derive_poly(&info.poly, delta, cache);
            if d_f.is_zero() {
                continue;
            }
            let inv_f = Expression {
                num: Poly::one(),
                den: SmallVec::from_slice(&[(f, 1)]),
            };
            log_der = log_der + d_f.checked_mul(&inv_f).scale(&rat(k as i64));
        }
        let numerator = if log_der.is_zero() {
            d_num
        } else {
            d_num - self.numerator().checked_mul(&log_der)
        };
        let inv_den = Expression {
            num: Poly::one(),
            den: self.den.clone(),
        };
        numerator.checked_mul(&inv_den)
    }

    /// Partial derivative ∂/∂v.
    pub fn differentiate(&self, v: Var) -> Expression {
        self.derive_with(&|u| if u == v { Some(Expression::one()) } else { None })
    }

    // ---- substitution ----------------------------------------------------

    /// Simultaneous substitution of variables by expressions.
    pub fn substitute(&self, map: &HashMap<Var, Expression>) -> Result<Expression, ExprError> {
        let mut cache: HashMap<u32, Expression> = HashMap::new();
        let num = substitute_poly(&self.num, map, &mut cache)?;
        let mut den = Expression::one();
        for &(f, k) in &self.den {
            let info = store::factor(f);
            let fv = substitute_poly(&info.poly, map, &mut cache)?;
            den = den.checked_mul(&fv.pow(k as i64)?);
        }
        num.checked_div(&den)
    }

    pub fn substitute_one(&self, v: Var, value: &Expression) -> Result<Expression, ExprError> {
        let mut map = HashMap::new();
        map.insert(v, value.clone());
        self.substitute(&map)
    }
}

// ---- helpers over numerators / denominators -----------------------------

pub(crate) fn denom_poly(den: &Denom) -> Poly {
    let mut p = Poly::one();
    for &(f, k) in den {
        p = p.mul(&store::factor(f).power(k));
    }
    p
}

fn denom_mul(a: &Denom, b: &Denom) -> Denom {
    let mut out = Denom::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Least common multiple of two factored denominators and the cofactors
/// `lcm / a`, `lcm / b`.
fn denom_lcm(a: &Denom, b: &Denom) -> (Denom, Poly, Poly) {
    let mut lcm = Denom::new();
    let mut ca = Poly::one();
    let mut cb = Poly::one();
    let (mut i, mut j) = (0, 0);
    let mut push = |f: u32, ea: u32, eb: u32, lcm: &mut Denom| {
        let e = ea.max(eb);
        lcm.push((f, e));
        if e > ea || e > eb {
            let info = store::factor(f);
            if e > ea {
                ca = ca.mul(&info.power(e - ea));
            }
            if e > eb {
                cb = cb.mul(&info.power(e - eb));
            }
        }
    };
    while i < a.len() || j < b.len() {
        let fa = a.get(i).map(|t| t.0).unwrap_or(u32::MAX);
        let fb = b.get(j).map(|t| t.0).unwrap_or(u32::MAX);
        if fa < fb {
            push(fa, a[i].1, 0, &mut lcm);
            i += 1;
        } else if fb < fa {
            push(fb, 0, b[j].1, &mut lcm);
            j += 1;
        } else {
            push(fa, a[i].1, b[j].1, &mut lcm);
            i += 1;
            j += 1;
        }
    }
    (lcm, ca, cb)
}

/// Rewrites `t^e` with `e ≥ d` using `t^d = B`.
fn reduce_atoms(p: Poly) -> Poly {
    let needs = p.terms.iter().any(|(m, _)| {
        m.iter()
            .any(|(v, e)| v & store::ATOM_BIT != 0 && e >= 2 && e >= store::atom(v).degree)
    });
    if !needs {
        return p;
    }
    let mut plain: Vec<(Monomial, Rational)> = Vec::new();
    let mut expanded = Poly::zero();
    for (m, c) in p.terms {
        let mut mono = m.clone();
        let mut extra = Poly::one();
        for (v, e) in m.iter() {
            if v & store::ATOM_BIT == 0 {
                continue;
            }
            let info = store::atom(v);
            if e >= info.degree {
                mono = mono.with_exponent(v, e % info.degree);
                extra = extra.mul(&info.base.pow(e / info.degree));
            }
        }
        if extra.is_one() {
            plain.push((mono, c));
        } else {
            expanded = expanded.add(&extra.mul_monomial(&mono, &c));
        }
    }
    Poly::from_terms(plain).add(&expanded)
}

/// Returns `(M, P)` with `1/num = M/P` and `P` free of radical atoms.
fn rationalize(num: &Poly) -> Result<(Poly, Poly), ExprError> {
    let mut multiplier = Poly::one();
    let mut current = num.clone();
    loop {
        let Some(t) = current.vars().into_iter().find(|&v| v & store::ATOM_BIT != 0) else {
            return Ok((multiplier, current));
        };
        let info = store::atom(t);
        if info.degree != 2 {
            return Err(ExprError::Unsupported(
                "division by a sum involving higher-order radicals".into(),
            ));
        }
        let conj = Poly::from_terms(current.terms.iter().map(|(m, c)| {
            if m.exponent(t) % 2 == 1 {
                (m.clone(), -c)
            } else {
                (m.clone(), c.clone())
            }
        }));
        current = reduce_atoms(current.mul(&conj));
        multiplier = reduce_atoms(multiplier.mul(&conj));
    }
}

fn exact_root(q: &Rational, d: u32) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().nth_root(d);
    let m = q.denom().nth_root(d);
    if num_traits::pow(n.clone(), d as usize) == *q.numer()
        && num_traits::pow(m.clone(), d as usize) == *q.denom()
    {
        Some(Rational::new(n, m))
    } else {
        None
    }
}

/// `P^q` for a polynomial `P` and non-integer `q = m/d`.
fn poly_rational_pow(p: &Poly, q: &Rational) -> Result<Expression, ExprError> {
    if q.is_integer() {
        return Expression::from_poly(p.clone()).pow(q.to_integer().to_i64().unwrap_or(0));
    }
    let d = q
        .denom()
        .to_u32()
        .ok_or_else(|| ExprError::Unsupported("root degree out of range".into()))?;
    let m = q.numer().clone();
    let d_big: num_bigint::BigInt = d.into();
    let whole = num_integer::Integer::div_floor(&m, &d_big);
    let frac = (&m - &whole * &d_big).to_u32().unwrap();
    let whole = whole
        .to_i64()
        .ok_or_else(|| ExprError::Unsupported("exponent out of range".into()))?;
    if p.vars().iter().any(|&v| v & store::ATOM_BIT != 0) {
        return Err(ExprError::Unsupported("nested radicals".into()));
    }
    let radical = if let Some(c) = p.as_constant() {
        if !c.is_positive() {
            return Err(ExprError::NegativeBase);
        }
        match exact_root(&c, d) {
            Some(r) => Expression::constant(num_traits::pow(r, frac as usize)),
            None => {
                let t = store::intern_atom(p, d);
                Expression::from_poly(Poly::monomial(Monomial::var(t, frac), Rational::one()))
            }
        }
    } else {
        let t = store::intern_atom(p, d);
        Expression::from_poly(Poly::monomial(Monomial::var(t, frac), Rational::one()))
    };
    Ok(Expression::from_poly(p.clone()).pow(whole)?.checked_mul(&radical))
}

fn derive_poly(
    p: &Poly,
    delta: &dyn Fn(Var) -> Option<Expression>,
    cache: &mut HashMap<u32, Option<Expression>>,
) -> Expression {
    let mut poly_acc = Poly::zero();
    let mut rational_acc = Expression::zero();
    for v in p.vars() {
        let dv = match cache.get(&v) {
            Some(d) => d.clone(),
            None => {
                let d = if v & store::ATOM_BIT != 0 {
                    let info = store::atom(v);
                    let d_base = derive_poly(&info.base, delta, cache);
                    if d_base.is_zero() {
                        None
                    } else {
                        let t = Expression::from_poly(Poly::var(v));
                        Some(
                            t.checked_mul(&d_base)
                                .checked_mul(&info.inv_base)
                                .scale(&Rational::new(1.into(), info.degree.into())),
                        )
                    }
                } else {
                    delta(Var(v)).filter(|e| !e.is_zero())
                };
                cache.insert(v, d.clone());
                d
            }
        };
        let Some(dv) = dv else { continue };
        let partial = p.derivative(v);
        if dv.den.is_empty() {
            poly_acc = poly_acc.add(&partial.mul(&dv.num));
        } else {
            rational_acc = rational_acc + Expression::from_poly(partial).checked_mul(&dv);
        }
    }
    Expression::from_poly(reduce_atoms(poly_acc)) + rational_acc
}

fn substitute_poly(
    p: &Poly,
    map: &HashMap<Var, Expression>,
    cache: &mut HashMap<u32, Expression>,
) -> Result<Expression, ExprError> {
    let mut acc = Expression::zero();
    let mut plain: Vec<(Monomial, Rational)> = Vec::new();
    for (m, c) in &p.terms {
        let mut rest = Monomial::one();
        let mut term = Expression::one();
        let mut touched = false;
        for (v, e) in m.iter() {
            let value = if v & store::ATOM_BIT != 0 {
                match cache.get(&v) {
                    Some(x) => Some(x.clone()),
                    None => {
                        let info = store::atom(v);
                        let base = substitute_poly(&info.base, map, cache)?;
                        if base.num == info.base && base.den.is_empty() {
                            None
                        } else {
                            let r = base.rational_pow(&Rational::new(1.into(), info.degree.into()))?;
                            cache.insert(v, r.clone());
                            Some(r)
                        }
                    }
                }
            } else {
                map.get(&Var(v)).cloned()
            };
            match value {
                Some(x) => {
                    touched = true;
                    term = term.checked_mul(&x.pow(e as i64)?);
                }
                None => rest = rest.mul(&Monomial::var(v, e)),
            }
        }
        if touched {
            let mono = Expression::from_poly(Poly::monomial(rest, c.clone()));
            acc = acc + term.checked_mul(&mono);
        } else {
            plain.push((rest, c.clone()));
        }
    }
    Ok(Expression::from_poly(reduce_atoms(Poly::from_terms(plain))) + acc)
}

// ---- operator impls ------------------------------------------------------

impl Add<&Expression> for &Expression {
    type Output = Expression;
    fn add(self, rhs: &Expression) -> Expression {
        self.checked_add(rhs)
    }
}

impl Add for Expression {
    type Output = Expression;
    fn add(self, rhs: Expression) -> Expression {
        self.checked_add(&rhs)
    }
}

impl Sub<&Expression> for &Expression {
    type Output = Expression;
    fn sub(self, rhs: &Expression) -> Expression {
        self.checked_add(&-rhs)
    }
}

impl Sub for Expression {
    type Output = Expression;
    fn sub(self, rhs: Expression) -> Expression {
        self.checked_add(&-rhs)
    }
}

impl Mul<&Expression> for &Expression {
    type Output = Expression;
    fn mul(self, rhs: &Expression) -> Expression {
        self.checked_mul(rhs)
    }
}

impl Mul for Expression {
    type Output = Expression;
    fn mul(self, rhs: Expression) -> Expression {
        self.checked_mul(&rhs)
    }
}

impl Neg for &Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
}

impl Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        -&self
    }
}

impl From<i64> for Expression {
    fn from(n: i64) -> Self {
        Expression::int(n)
    }
}

impl From<Rational> for Expression {
    fn from(q: Rational) -> Self {
        Expression::constant(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Expression {
        parse(s).unwrap()
    }

    #[test]
    fn cancellation_gives_polynomial() {
        let a = e("(x^2 - y^2)/(x - y)");
        assert_eq!(a, e("x + y"));
        assert!(a.is_polynomial());
    }

    #[test]
    fn common_denominators_add() {
        let a = e("1/x + 1/y");
        let b = e("(x + y)/(x*y)");
        assert_eq!(a, b);
    }

    #[test]
    fn radical_squares_to_base() {
        let s = e("abs(u)^(1/2)");
        assert_eq!(&s * &s, e("u"));
        let inv = Expression::one().checked_div(&s).unwrap();
        assert_eq!(inv, e("abs(u)^(1/2)/u"));
    }

    #[test]
    fn rationalizes_radical_sums() {
        let s = e("abs(u)^(1/2)");
        let d = &s + &Expression::one();
        let q = Expression::one().checked_div(&d).unwrap();
        assert!(canonical_equal(&(&q * &d), &Expression::one()));
    }

    #[test]
    fn negative_chart_radical() {
        let u = e("u");
        let s = u.abs_pow(&Rational::new(1.into(), 2.into()), Sign::Negative).unwrap();
        assert_eq!(&s * &s, -u);
    }

    #[test]
    fn chain_rule_on_radical() {
        let s = e("abs(u)^(1/2)");
        let d = s.differentiate(Var::named("u"));
        assert_eq!(d, e("1/2*abs(u)^(1/2)/u"));
        assert_eq!(d, e("1/2*abs(u)^(-1/2)"));
    }

    #[test]
    fn quotient_rule() {
        let q = e("x/(x + y)");
        let d = q.differentiate(Var::named("x"));
        assert_eq!(d, e("y/(x + y)^2"));
    }

    #[test]
    fn substitution_composes() {
        let q = e("x^2 + y");
        let mut m = HashMap::new();
        m.insert(Var::named("x"), e("a + 1"));
        m.insert(Var::named("y"), e("1/a"));
        let out = q.substitute(&m).unwrap();
        assert_eq!(out, e("(a + 1)^2 + 1/a"));
    }

    #[test]
    fn division_by_zero() {
        assert_eq!(e("x").checked_div(&Expression::zero()), Err(ExprError::DivisionByZero));
    }
}
