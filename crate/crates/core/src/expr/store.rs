//! Process-wide symbol tables: interned variable names, radical atoms and
//! denominator factors.
//!
//! All three tables are append-only. Reads take a shared lock; inserts are
//! serialized behind the write lock.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex, RwLock};

use super::poly::Poly;
use super::Rational;
use num_traits::One;

pub(crate) const ATOM_BIT: u32 = 1 << 31;

/// Interned variable handle.
///
/// Atoms (formal rational powers `|B|^(1/d)`) share the id space and are
/// tagged with the high bit.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var(pub(crate) u32);

impl Var {
    pub fn named(name: &str) -> Var {
        intern(name)
    }

    pub fn name(self) -> String {
        if self.is_atom() {
            return format!("<atom {}>", self.0 & !ATOM_BIT);
        }
        STORE.read().unwrap().vars[self.0 as usize].name.to_string()
    }

    pub fn is_atom(self) -> bool {
        self.0 & ATOM_BIT != 0
    }

    /// Jet decomposition `(function, [#x, #y, #p])` when the name has the
    /// form `f_xyp…`; bare names decompose with zero counts.
    pub fn jet_parts(self) -> Option<(Arc<str>, [u8; 3])> {
        if self.is_atom() {
            return None;
        }
        let store = STORE.read().unwrap();
        let info = &store.vars[self.0 as usize];
        Some(match &info.jet {
            Some((f, c)) => (f.clone(), *c),
            None => (info.name.clone(), [0, 0, 0]),
        })
    }

    /// The jet coordinate of `func` with the given derivative counts.
    pub fn jet(func: &str, counts: [u8; 3]) -> Var {
        intern(&jet_name(func, counts))
    }

    pub(crate) fn id(self) -> u32 {
        self.0
    }
}

pub(crate) struct VarInfo {
    name: Arc<str>,
    jet: Option<(Arc<str>, [u8; 3])>,
}

/// `t = base^(1/degree)` with the base assumed positive on the working chart.
pub(crate) struct AtomInfo {
    pub base: Poly,
    pub degree: u32,
    /// `1/base` as a canonical expression, used by the chain rule.
    pub inv_base: super::Expression,
}

pub(crate) struct FactorInfo {
    pub poly: Poly,
    pub vars: Vec<u32>,
    /// A variable in which the factor has degree one, with its coefficient and
    /// the remaining part: `poly = coeff * v + rest`.
    pub linear: Option<(u32, Poly, Poly)>,
    powers: Mutex<Vec<Arc<Poly>>>,
}

impl FactorInfo {
    fn new(poly: Poly) -> Self {
        let vars = poly.vars();
        let linear = vars
            .iter()
            .copied()
            .filter(|&v| poly.degree_in(v) == 1)
            .map(|v| {
                let cs = poly.coefficients_in(v);
                (v, cs[1].clone(), cs[0].clone())
            })
            // prefer the simplest coefficient
            .min_by_key(|(_, c, _)| c.len());
        FactorInfo {
            poly,
            vars,
            linear,
            powers: Mutex::new(vec![Arc::new(Poly::one())]),
        }
    }

    pub fn power(&self, k: u32) -> Arc<Poly> {
        let mut cache = self.powers.lock().unwrap();
        while cache.len() <= k as usize {
            let next = cache.last().unwrap().mul(&self.poly);
            cache.push(Arc::new(next));
        }
        cache[k as usize].clone()
    }
}

#[derive(Default)]
pub(crate) struct Store {
    vars: Vec<VarInfo>,
    by_name: HashMap<Arc<str>, u32>,
    atoms: Vec<Arc<AtomInfo>>,
    atom_by_key: HashMap<(Poly, u32), u32>,
    factors: Vec<Arc<FactorInfo>>,
    factor_by_poly: HashMap<Poly, u32>,
}

pub(crate) static STORE: LazyLock<RwLock<Store>> = LazyLock::new(|| RwLock::new(Store::default()));

const BASE_LETTERS: [char; 3] = ['x', 'y', 'p'];

/// Splits `f_yx` into (`f`, counts) and returns the normalized name `f_xy`.
fn split_jet_name(name: &str) -> Option<(String, [u8; 3])> {
    let (head, tail) = name.rsplit_once('_')?;
    if head.is_empty()
        || tail.is_empty()
        || head.contains('_')
        || !head.chars().next().unwrap().is_ascii_alphabetic()
    {
        return None;
    }
    let mut counts = [0u8; 3];
    for ch in tail.chars() {
        let i = BASE_LETTERS.iter().position(|&b| b == ch)?;
        counts[i] += 1;
    }
    Some((head.to_string(), counts))
}

pub(crate) fn jet_name(func: &str, counts: [u8; 3]) -> String {
    if counts == [0, 0, 0] {
        return func.to_string();
    }
    let mut s = String::from(func);
    s.push('_');
    for (i, &c) in counts.iter().enumerate() {
        for _ in 0..c {
            s.push(BASE_LETTERS[i]);
        }
    }
    s
}

pub(crate) fn intern(name: &str) -> Var {
    let (canonical, jet) = match split_jet_name(name) {
        Some((f, c)) => (jet_name(&f, c), Some((Arc::<str>::from(f.as_str()), c))),
        None => (name.to_string(), None),
    };
    if let Some(&id) = STORE.read().unwrap().by_name.get(canonical.as_str()) {
        return Var(id);
    }
    let mut store = STORE.write().unwrap();
    if let Some(&id) = store.by_name.get(canonical.as_str()) {
        return Var(id);
    }
    let id = store.vars.len() as u32;
    assert!(id < ATOM_BIT, "variable table exhausted");
    let name: Arc<str> = Arc::from(canonical.as_str());
    store.vars.push(VarInfo {
        name: name.clone(),
        jet,
    });
    store.by_name.insert(name, id);
    Var(id)
}

pub(crate) fn var_name(id: u32) -> Arc<str> {
    STORE.read().unwrap().vars[id as usize].name.clone()
}

pub(crate) fn atom(id: u32) -> Arc<AtomInfo> {
    STORE.read().unwrap().atoms[(id & !ATOM_BIT) as usize].clone()
}

pub(crate) fn factor(id: u32) -> Arc<FactorInfo> {
    STORE.read().unwrap().factors[id as usize].clone()
}

/// Returns the atom for `base^(1/degree)`; `base` must be atom-free.
pub(crate) fn intern_atom(base: &Poly, degree: u32) -> u32 {
    let key = (base.clone(), degree);
    if let Some(&id) = STORE.read().unwrap().atom_by_key.get(&key) {
        return id;
    }
    // computed outside the lock: inverting registers denominator factors
    let inv_base = super::Expression::from_poly(base.clone())
        .checked_inv()
        .expect("atom base must be nonzero");
    let mut store = STORE.write().unwrap();
    if let Some(&id) = store.atom_by_key.get(&key) {
        return id;
    }
    let id = store.atoms.len() as u32 | ATOM_BIT;
    store.atoms.push(Arc::new(AtomInfo {
        base: base.clone(),
        degree,
        inv_base,
    }));
    store.atom_by_key.insert(key, id);
    id
}

/// Factors a nonzero atom-free polynomial over the registered factor basis,
/// registering whatever does not divide out. Returns `(c, factors)` with
/// `poly = c · Π F_i^{k_i}`.
pub(crate) fn factorize(poly: &Poly) -> (Rational, Vec<(u32, u32)>) {
    debug_assert!(!poly.is_zero());
    let c = poly.content();
    let mut rest = poly.scale(&(Rational::one() / &c));
    let mut out: Vec<(u32, u32)> = Vec::new();

    let mono = rest.monomial_content();
    if !mono.is_one() {
        rest = rest.div_exact(&Poly::monomial(mono.clone(), Rational::one())).unwrap();
        for (v, e) in mono.iter() {
            out.push((register_factor(Poly::var(v)), e));
        }
    }
    if rest.as_constant().is_none() {
        if let Some(&id) = STORE.read().unwrap().factor_by_poly.get(&rest) {
            out.push((id, 1));
            rest = Poly::one();
        }
    }
    if rest.as_constant().is_none() {
        let known: Vec<(u32, Arc<FactorInfo>)> = {
            let store = STORE.read().unwrap();
            store
                .factors
                .iter()
                .enumerate()
                .map(|(i, f)| (i as u32, f.clone()))
                .collect()
        };
        let rest_vars = rest.vars();
        for (id, f) in known {
            if f.vars.iter().any(|v| rest_vars.binary_search(v).is_err()) {
                continue;
            }
            let mut k = 0;
            while rest.as_constant().is_none() {
                match rest.div_exact(&f.poly) {
                    Some(q) => {
                        rest = q;
                        k += 1;
                    }
                    None => break,
                }
            }
            if k > 0 {
                out.push((id, k));
            }
        }
    }
    let leftover = rest.as_constant();
    let mut c = c;
    match leftover {
        Some(k) => c *= k,
        None => {
            let cc = rest.content();
            let prim = rest.scale(&(Rational::one() / &cc));
            c *= cc;
            out.push((register_factor(prim), 1));
        }
    }
    out.sort_unstable();
    // merge duplicates
    let mut merged: Vec<(u32, u32)> = Vec::with_capacity(out.len());
    for (id, k) in out {
        match merged.last_mut() {
            Some(last) if last.0 == id => last.1 += k,
            _ => merged.push((id, k)),
        }
    }
    (c, merged)
}

/// Registers a primitive polynomial with positive leading coefficient.
fn register_factor(poly: Poly) -> u32 {
    if let Some(&id) = STORE.read().unwrap().factor_by_poly.get(&poly) {
        return id;
    }
    let info = Arc::new(FactorInfo::new(poly.clone()));
    let mut store = STORE.write().unwrap();
    if let Some(&id) = store.factor_by_poly.get(&poly) {
        return id;
    }
    let id = store.factors.len() as u32;
    store.factors.push(info);
    store.factor_by_poly.insert(poly, id);
    id
}

/// Probabilistic test for `factor | num`. Never answers `false` when the
/// division is exact.
pub(crate) fn may_divide(f: &FactorInfo, num: &Poly, rng_state: &mut u64) -> bool {
    let Some((v, coeff, rest)) = &f.linear else {
        return true;
    };
    let mut next = || {
        // splitmix64
        *rng_state = rng_state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = *rng_state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        (z ^ (z >> 31)) % super::poly::PRIME
    };
    let mut values: HashMap<u32, u64> = HashMap::new();
    for u in num.vars().into_iter().chain(f.vars.iter().copied()) {
        if u != *v {
            values.entry(u).or_insert_with(&mut next);
        }
    }
    let lookup = |u: u32| values.get(&u).copied().unwrap_or(0);
    let (Some(c), Some(r)) = (coeff.eval_mod(&lookup), rest.eval_mod(&lookup)) else {
        return true;
    };
    let Some(ci) = super::poly::inv_mod(c) else {
        return true;
    };
    let root = super::poly::mul_mod(super::poly::PRIME - r, ci);
    let at_root = |u: u32| if u == *v { root } else { lookup(u) };
    match num.eval_mod(&at_root) {
        Some(val) => val == 0,
        None => true,
    }
}
