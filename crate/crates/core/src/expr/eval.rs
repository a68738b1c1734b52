//! Numeric evaluation: exact over ℚ where possible, `f64` otherwise, plus a
//! compiled evaluator for repeated floating-point evaluation on grids.

use std::collections::HashMap;

use num_traits::{Signed, ToPrimitive, Zero};
use smallvec::SmallVec;

use super::poly::Poly;
use super::store::{self, ATOM_BIT};
use super::{exact_root, ExprError, Expression, Rational, Var};

/// How radical atoms `B^(1/d)` treat their base.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PowerMode {
    /// The base must evaluate to a non-negative number.
    #[default]
    Strict,
    /// The base is replaced by its absolute value before taking the root.
    Abs,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(Rational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Number::Float(x) => *x,
        }
    }
}

fn unbound(v: u32) -> ExprError {
    ExprError::UnboundVariable(store::var_name(v).to_string())
}

fn exact_values(
    polys: &[&Poly],
    values: &HashMap<Var, Rational>,
    mode: PowerMode,
) -> Result<HashMap<u32, Rational>, ExprError> {
    let mut out: HashMap<u32, Rational> = values.iter().map(|(k, v)| (k.0, v.clone())).collect();
    for p in polys {
        for v in p.vars() {
            if out.contains_key(&v) {
                continue;
            }
            if v & ATOM_BIT == 0 {
                return Err(unbound(v));
            }
            let info = store::atom(v);
            let base = info
                .base
                .eval_rational_cached(&out)
                .ok_or_else(|| first_unbound(&info.base, &out))?;
            let base = match mode {
                PowerMode::Strict if base.is_negative() => return Err(ExprError::NegativeBase),
                PowerMode::Strict => base,
                PowerMode::Abs => base.abs(),
            };
            let root = exact_root(&base, info.degree).ok_or(ExprError::Irrational)?;
            out.insert(v, root);
        }
    }
    Ok(out)
}

fn first_unbound<T>(p: &Poly, known: &HashMap<u32, T>) -> ExprError {
    p.vars()
        .into_iter()
        .find(|v| !known.contains_key(v))
        .map(unbound)
        .unwrap_or(ExprError::Irrational)
}

fn f64_values(
    polys: &[&Poly],
    values: &HashMap<Var, f64>,
    mode: PowerMode,
) -> Result<HashMap<u32, f64>, ExprError> {
    let mut out: HashMap<u32, f64> = values.iter().map(|(k, v)| (k.0, *v)).collect();
    for p in polys {
        for v in p.vars() {
            if out.contains_key(&v) {
                continue;
            }
            if v & ATOM_BIT == 0 {
                return Err(unbound(v));
            }
            let info = store::atom(v);
            let base = eval_poly_f64(&info.base, &out).ok_or_else(|| first_unbound(&info.base, &out))?;
            let base = match mode {
                PowerMode::Strict if base < 0.0 => return Err(ExprError::NegativeBase),
                PowerMode::Strict => base,
                PowerMode::Abs => base.abs(),
            };
            out.insert(v, base.powf(1.0 / info.degree as f64));
        }
    }
    Ok(out)
}

fn eval_poly_f64(p: &Poly, values: &HashMap<u32, f64>) -> Option<f64> {
    let mut acc = 0.0;
    for (m, c) in p.terms() {
        let mut t = c.to_f64()?;
        for (v, e) in m.iter() {
            t *= values.get(&v)?.powi(e as i32);
        }
        acc += t;
    }
    Some(acc)
}

impl Expression {
    /// Exact evaluation. Radicals must evaluate to exact rational roots.
    pub fn eval_exact(
        &self,
        values: &HashMap<Var, Rational>,
        mode: PowerMode,
    ) -> Result<Rational, ExprError> {
        let vals = exact_values(&[&self.num], values, mode)?;
        let mut den = Rational::from_integer(1.into());
        for &(f, k) in &self.den {
            let info = store::factor(f);
            let fv = info
                .poly
                .eval_rational_cached(&vals)
                .ok_or_else(|| first_unbound(&info.poly, &vals))?;
            if fv.is_zero() {
                return Err(ExprError::DivisionByZero);
            }
            den *= num_traits::pow(fv, k as usize);
        }
        let num = self.num.eval_rational_cached(&vals).unwrap();
        Ok(num / den)
    }

    pub fn eval_f64(&self, values: &HashMap<Var, f64>, mode: PowerMode) -> Result<f64, ExprError> {
        let vals = f64_values(&[&self.num], values, mode)?;
        let mut den = 1.0;
        for &(f, k) in &self.den {
            let info = store::factor(f);
            let fv = eval_poly_f64(&info.poly, &vals).ok_or_else(|| first_unbound(&info.poly, &vals))?;
            if fv == 0.0 {
                return Err(ExprError::DivisionByZero);
            }
            den *= fv.powi(k as i32);
        }
        Ok(eval_poly_f64(&self.num, &vals).unwrap() / den)
    }

    /// Evaluates under a mixed binding: exact when every bound value is exact
    /// and all radicals have rational roots, floating point otherwise.
    pub fn eval(&self, binding: &HashMap<Var, Number>, mode: PowerMode) -> Result<Number, ExprError> {
        let exact: Option<HashMap<Var, Rational>> = binding
            .iter()
            .map(|(k, v)| match v {
                Number::Exact(q) => Some((*k, q.clone())),
                Number::Float(_) => None,
            })
            .collect();
        if let Some(exact) = exact {
            match self.eval_exact(&exact, mode) {
                Err(ExprError::Irrational) => {}
                other => return other.map(Number::Exact),
            }
        }
        let floats: HashMap<Var, f64> = binding.iter().map(|(k, v)| (*k, v.to_f64())).collect();
        self.eval_f64(&floats, mode).map(Number::Float)
    }
}

#[derive(Clone, Debug)]
struct CPoly {
    terms: Vec<(f64, SmallVec<[(u16, u16); 6]>)>,
}

impl CPoly {
    fn compile(p: &Poly, slot: &dyn Fn(u32) -> Result<u16, ExprError>) -> Result<Self, ExprError> {
        let mut terms = Vec::with_capacity(p.len());
        for (m, c) in p.terms() {
            let mut mono = SmallVec::new();
            for (v, e) in m.iter() {
                mono.push((slot(v)?, e as u16));
            }
            terms.push((c.to_f64().unwrap_or(f64::NAN), mono));
        }
        Ok(CPoly { terms })
    }

    fn eval(&self, values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, mono) in &self.terms {
            let mut t = *c;
            for &(s, e) in mono {
                let x = values[s as usize];
                t *= match e {
                    1 => x,
                    2 => x * x,
                    _ => x.powi(e as i32),
                };
            }
            acc += t;
        }
        acc
    }
}

/// Expression compiled against a fixed variable ordering for fast `f64`
/// evaluation with absolute-value radical semantics.
#[derive(Clone, Debug)]
pub struct Compiled {
    inputs: usize,
    atoms: Vec<(CPoly, f64)>,
    num: CPoly,
    den: Vec<(CPoly, i32)>,
}

impl Compiled {
    pub fn new(e: &Expression, vars: &[Var]) -> Result<Compiled, ExprError> {
        let mut index: HashMap<u32, u16> =
            vars.iter().enumerate().map(|(i, v)| (v.0, i as u16)).collect();
        let mut atom_ids: Vec<u32> = e.num.vars().into_iter().filter(|v| v & ATOM_BIT != 0).collect();
        atom_ids.sort_unstable();
        let input_slot = |v: u32| -> Result<u16, ExprError> {
            index.get(&v).copied().ok_or_else(|| unbound(v))
        };
        let mut atoms = Vec::new();
        for &a in &atom_ids {
            let info = store::atom(a);
            atoms.push((CPoly::compile(&info.base, &input_slot)?, 1.0 / info.degree as f64));
        }
        for (i, &a) in atom_ids.iter().enumerate() {
            index.insert(a, (vars.len() + i) as u16);
        }
        let slot = |v: u32| -> Result<u16, ExprError> {
            index.get(&v).copied().ok_or_else(|| unbound(v))
        };
        let num = CPoly::compile(&e.num, &slot)?;
        let den = e
            .den
            .iter()
            .map(|&(f, k)| Ok((CPoly::compile(&store::factor(f).poly, &slot)?, k as i32)))
            .collect::<Result<Vec<_>, ExprError>>()?;
        Ok(Compiled {
            inputs: vars.len(),
            atoms,
            num,
            den,
        })
    }

    /// Evaluates at `values` (one per input variable). Returns `None` when a
    /// denominator vanishes exactly.
    pub fn eval(&self, values: &[f64]) -> Option<f64> {
        debug_assert_eq!(values.len(), self.inputs);
        let mut d = 1.0;
        let mut slots: SmallVec<[f64; 64]> = SmallVec::from_slice(values);
        for (base, inv_deg) in &self.atoms {
            slots.push(base.eval(values).abs().powf(*inv_deg));
        }
        for (f, k) in &self.den {
            d *= f.eval(&slots).powi(*k);
        }
        if d == 0.0 {
            return None;
        }
        Some(self.num.eval(&slots) / d)
    }

    /// The denominator factors evaluated at `values`, for singularity checks.
    pub fn denominator_factors(&self, values: &[f64]) -> Vec<f64> {
        let mut slots: SmallVec<[f64; 64]> = SmallVec::from_slice(values);
        for (base, inv_deg) in &self.atoms {
            slots.push(base.eval(values).abs().powf(*inv_deg));
        }
        self.den.iter().map(|(f, _)| f.eval(&slots)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, rat};

    fn bind(pairs: &[(&str, i64)]) -> HashMap<Var, Rational> {
        pairs.iter().map(|(n, v)| (Var::named(n), rat(*v))).collect()
    }

    #[test]
    fn exact_evaluation() {
        let e = parse("p - g").unwrap();
        assert_eq!(e.eval_exact(&bind(&[("p", 2), ("g", 1)]), PowerMode::Strict), Ok(rat(1)));
    }

    #[test]
    fn division_by_zero_is_reported() {
        let e = parse("x/y").unwrap();
        assert_eq!(
            e.eval_exact(&bind(&[("x", 1), ("y", 0)]), PowerMode::Strict),
            Err(ExprError::DivisionByZero)
        );
    }

    #[test]
    fn abs_mode_radical() {
        let e = parse("abs(u)^(1/2)").unwrap();
        let b = bind(&[("u", -4)]);
        assert_eq!(e.eval_exact(&b, PowerMode::Abs), Ok(rat(2)));
        assert_eq!(e.eval_exact(&b, PowerMode::Strict), Err(ExprError::NegativeBase));
        let fb: HashMap<Var, f64> = [(Var::named("u"), -4.0)].into_iter().collect();
        assert_eq!(e.eval_f64(&fb, PowerMode::Abs), Ok(2.0));
    }

    #[test]
    fn mixed_binding_falls_back_to_float() {
        let e = parse("abs(u)^(1/2)").unwrap();
        let b: HashMap<Var, Number> = [(Var::named("u"), Number::Exact(rat(2)))].into_iter().collect();
        match e.eval(&b, PowerMode::Strict).unwrap() {
            Number::Float(x) => assert!((x - 2f64.sqrt()).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn compiled_matches_direct() {
        let e = parse("(x^2 + abs(y)^(1/2))/(x - 3*y)").unwrap();
        let vars = [Var::named("x"), Var::named("y")];
        let c = Compiled::new(&e, &vars).unwrap();
        let direct: HashMap<Var, f64> = [(vars[0], 1.5), (vars[1], 0.25)].into_iter().collect();
        let a = c.eval(&[1.5, 0.25]).unwrap();
        let b = e.eval_f64(&direct, PowerMode::Strict).unwrap();
        assert!((a - b).abs() < 1e-14);
    }
}
