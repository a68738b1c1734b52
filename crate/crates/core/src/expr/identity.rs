//! Identity testing: exact canonical comparison and randomized evaluation
//! at exact rational points.
//!
//! Expressions with radical atoms `B^(1/d)` are sampled on points where every
//! base is an exact `d`-th power of a rational: for each atom one variable in
//! which its base is linear is solved for, so that the radical evaluates to a
//! prescribed positive rational.

use std::collections::{HashMap, HashSet};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::Poly;
use super::store::{self, ATOM_BIT};
use super::{ExprError, Expression, PowerMode, Rational, Var};

/// Exact semantic equality.
pub fn canonical_equal(a: &Expression, b: &Expression) -> bool {
    (a - b).is_zero()
}

struct Solve {
    var: u32,
    coeff: Poly,
    rest: Poly,
    degree: u32,
}

/// Draws random rational points for a set of variables, honouring
/// perfect-power constraints for radical atoms.
pub struct PointSampler {
    vars: Vec<u32>,
    solves: Vec<Solve>,
    rng: ChaCha8Rng,
    numer_range: i64,
    denom_range: i64,
}

impl PointSampler {
    pub fn new(vars: &[Var], atoms: &[Var], seed: u64) -> Result<PointSampler, ExprError> {
        let mut all: HashSet<u32> = vars.iter().map(|v| v.0).collect();
        let infos: Vec<_> = atoms
            .iter()
            .map(|a| {
                debug_assert!(a.0 & ATOM_BIT != 0);
                store::atom(a.0)
            })
            .collect();
        for info in &infos {
            all.extend(info.base.vars());
        }
        let bases: Vec<(&Poly, u32)> = infos.iter().map(|i| (&i.base, i.degree)).collect();
        let plan = plan_solves(&bases).ok_or_else(|| {
            ExprError::Unsupported("no variable to solve radical bases for".into())
        })?;
        let mut vars: Vec<u32> = all.into_iter().collect();
        vars.sort_unstable();
        Ok(PointSampler {
            vars,
            solves: plan,
            rng: ChaCha8Rng::seed_from_u64(seed),
            numer_range: 60,
            denom_range: 11,
        })
    }

    pub fn random_rational(&mut self) -> Rational {
        let n = self.rng.gen_range(-self.numer_range..=self.numer_range);
        let d = self.rng.gen_range(1..=self.denom_range);
        Rational::new(n.into(), d.into())
    }

    fn random_positive(&mut self) -> Rational {
        let n = self.rng.gen_range(1..=self.numer_range / 4);
        let d = self.rng.gen_range(1..=self.denom_range / 2);
        Rational::new(n.into(), d.into())
    }

    /// One candidate point; `None` when a solved variable has a vanishing
    /// coefficient (the caller retries).
    pub fn sample(&mut self) -> Option<HashMap<Var, Rational>> {
        let mut point: HashMap<u32, Rational> = HashMap::new();
        for i in 0..self.vars.len() {
            let v = self.vars[i];
            let q = self.random_rational();
            point.insert(v, q);
        }
        for i in 0..self.solves.len() {
            let target = num_traits::pow(self.random_positive(), self.solves[i].degree as usize);
            let s = &self.solves[i];
            let c = s.coeff.eval_rational_cached(&point)?;
            if c.is_zero() {
                return None;
            }
            let r = s.rest.eval_rational_cached(&point)?;
            point.insert(s.var, (target - r) / c);
        }
        Some(point.into_iter().map(|(k, v)| (Var(k), v)).collect())
    }
}

/// Orders the atoms and picks a distinct linear variable for each so that no
/// later solve disturbs an earlier base.
fn plan_solves(bases: &[(&Poly, u32)]) -> Option<Vec<Solve>> {
    fn dfs(
        bases: &[(&Poly, u32)],
        done: &mut Vec<(usize, u32)>,
        used: &mut Vec<bool>,
    ) -> bool {
        if done.len() == bases.len() {
            return true;
        }
        for i in 0..bases.len() {
            if used[i] {
                continue;
            }
            let (base, _) = bases[i];
            for v in base.vars() {
                if base.degree_in(v) != 1 || v & ATOM_BIT != 0 {
                    continue;
                }
                if done.iter().any(|&(j, w)| w == v || bases[j].0.contains_var(v)) {
                    continue;
                }
                used[i] = true;
                done.push((i, v));
                if dfs(bases, done, used) {
                    return true;
                }
                done.pop();
                used[i] = false;
            }
        }
        false
    }
    let mut done = Vec::new();
    let mut used = vec![false; bases.len()];
    if !dfs(bases, &mut done, &mut used) {
        return None;
    }
    Some(
        done.into_iter()
            .map(|(i, v)| {
                let cs = bases[i].0.coefficients_in(v);
                Solve {
                    var: v,
                    coeff: cs[1].clone(),
                    rest: cs[0].clone(),
                    degree: bases[i].1,
                }
            })
            .collect(),
    )
}

/// Evaluates `f` at `trials` random exact points drawn from `sampler`; true
/// iff every evaluation is exactly zero. Points hitting a singular
/// denominator are redrawn.
pub fn probabilistic_zero(
    sampler: &mut PointSampler,
    trials: usize,
    f: &mut dyn FnMut(&HashMap<Var, Rational>) -> Result<Rational, ExprError>,
) -> Result<bool, ExprError> {
    const ATTEMPTS: usize = 50;
    for _ in 0..trials {
        let mut evaluated = false;
        for _ in 0..ATTEMPTS {
            let Some(point) = sampler.sample() else {
                continue;
            };
            match f(&point) {
                Ok(v) => {
                    if !v.is_zero() {
                        return Ok(false);
                    }
                    evaluated = true;
                    break;
                }
                Err(ExprError::DivisionByZero) => continue,
                Err(e) => return Err(e),
            }
        }
        if !evaluated {
            return Err(ExprError::UnableToSample);
        }
    }
    Ok(true)
}

/// Randomized equality test at `trials` exact rational points.
pub fn probabilistic_equal(
    a: &Expression,
    b: &Expression,
    trials: usize,
    seed: u64,
) -> Result<bool, ExprError> {
    let mut vars = a.free_vars();
    vars.extend(b.free_vars());
    vars.sort_unstable();
    vars.dedup();
    let mut atoms = a.atoms();
    atoms.extend(b.atoms());
    atoms.sort_unstable();
    atoms.dedup();
    let mut sampler = PointSampler::new(&vars, &atoms, seed)?;
    probabilistic_zero(&mut sampler, trials, &mut |pt| {
        let x = a.eval_exact(pt, PowerMode::Strict)?;
        let y = b.eval_exact(pt, PowerMode::Strict)?;
        Ok(x - y)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn equal_and_unequal() {
        let a = parse("(p - g)^2").unwrap();
        let b = parse("p^2 - 2*p*g + g^2").unwrap();
        assert!(canonical_equal(&a, &b));
        assert!(probabilistic_equal(&a, &b, 20, 1).unwrap());
        let c = parse("g_p").unwrap();
        let d = parse("g_p + 1").unwrap();
        assert!(!canonical_equal(&c, &d));
        assert!(!probabilistic_equal(&c, &d, 20, 1).unwrap());
    }

    #[test]
    fn radicals_sampled_exactly() {
        // |f|^(1/2) and |I1|^(1/2) where I1 depends on f: needs ordered solves
        let a = parse("abs(f)^(1/2)*abs(p*f_y*f_p - 3*f*f_y + f_x*f_p)^(1/2)").unwrap();
        let b = parse("abs(f)^(1/2)*abs(p*f_y*f_p - 3*f*f_y + f_x*f_p)^(1/2)*(x + 1)/(1 + x)").unwrap();
        assert!(probabilistic_equal(&a, &b, 30, 7).unwrap());
        let c = &a * &parse("1 + x/1000").unwrap();
        assert!(!probabilistic_equal(&a, &c, 30, 7).unwrap());
    }

    #[test]
    fn unable_to_sample_everywhere_singular() {
        let x = parse("x").unwrap();
        let mut sampler = PointSampler::new(&x.free_vars(), &[], 3).unwrap();
        let r = probabilistic_zero(&mut sampler, 5, &mut |_| Err(ExprError::DivisionByZero));
        assert_eq!(r, Err(ExprError::UnableToSample));
    }
}
