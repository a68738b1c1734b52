//! Shared shape of the invariant catalogs: relative and absolute
//! invariants, invariant derivations, and their structure relations.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex, OnceLock};

use crate::expr::{parse, ExprError, Expression, Rational, Sign, Var};
use crate::jets::{Base, Bundle, BundleKind, JetError, TotalDerivation};
use crate::sl3::{check_absolute, check_relative, generic_lift, Sl3Element, Sl3Error, Weight};

/// Sign chart of the two radicands `I0` and `I1`. On π only `i1` matters and
/// `i0` is kept positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Chart {
    pub i0: Sign,
    pub i1: Sign,
}

impl Chart {
    pub const POSITIVE: Chart = Chart {
        i0: Sign::Positive,
        i1: Sign::Positive,
    };

    pub fn new(i0: Sign, i1: Sign) -> Chart {
        Chart { i0, i1 }
    }

    /// Charts that matter on a bundle.
    pub fn all(kind: BundleKind) -> Vec<Chart> {
        let signs = [Sign::Positive, Sign::Negative];
        match kind {
            BundleKind::Pi => signs.iter().map(|&s| Chart::new(Sign::Positive, s)).collect(),
            BundleKind::PiTilde => signs
                .iter()
                .flat_map(|&a| signs.iter().map(move |&b| Chart::new(a, b)))
                .collect(),
        }
    }

    /// Normalizes a chart for a bundle.
    pub fn on(self, kind: BundleKind) -> Chart {
        match kind {
            BundleKind::Pi => Chart::new(Sign::Positive, self.i1),
            BundleKind::PiTilde => self,
        }
    }

    pub fn signs(&self, kind: BundleKind) -> Vec<i64> {
        match kind {
            BundleKind::Pi => vec![self.i1.as_i64()],
            BundleKind::PiTilde => vec![self.i0.as_i64(), self.i1.as_i64()],
        }
    }
}

#[derive(Clone, Debug)]
pub enum Kind {
    Relative { weight: Weight },
    /// A monomial `Π R_i^{q_i}` in relative invariants; fractional powers
    /// are taken of absolute values.
    Absolute { composition: Vec<(String, Rational)> },
}

#[derive(Clone, Debug)]
pub struct InvariantEntry {
    pub name: String,
    pub bundle: BundleKind,
    pub order: u8,
    pub expr: Expression,
    pub kind: Kind,
}

impl InvariantEntry {
    pub fn is_relative(&self) -> bool {
        matches!(self.kind, Kind::Relative { .. })
    }

    pub fn weight(&self) -> Option<&Weight> {
        match &self.kind {
            Kind::Relative { weight } => Some(weight),
            Kind::Absolute { .. } => None,
        }
    }
}

/// `[∇_i, ∇_j] = Σ_k coeffs[k] ∇_k` (indices from zero).
#[derive(Clone, Debug)]
pub struct Commutator {
    pub i: usize,
    pub j: usize,
    pub coeffs: [Expression; 3],
}

/// A signature coordinate: either a catalog entry or `∇_k` of one.
#[derive(Clone, Debug)]
pub enum Coordinate {
    Entry(&'static str),
    Nabla(usize, &'static str),
}

/// Static description used to build a catalog on a chart.
pub(crate) struct Spec {
    pub bundle: BundleKind,
    /// `(name, formula, weight)`.
    pub relative: &'static [(&'static str, &'static str, &'static str)],
    pub absolute: &'static [(&'static str, &'static [(&'static str, (i64, i64))])],
    /// Per derivation: a polynomial prefactor for each base direction
    /// (`None` for a vanishing coefficient) and a shared monomial in
    /// relative invariants.
    pub derivations: [([Option<&'static str>; 3], &'static [(&'static str, (i64, i64))]); 3],
    /// `(i, j, [c1, c2, c3])` with formulas over catalog names and the chart
    /// signs `e0 = sign I0`, `e1 = sign I1`.
    pub commutators: &'static [(usize, usize, [&'static str; 3])],
    pub signature: &'static [(&'static str, Coordinate)],
}

pub struct Catalog {
    pub bundle: Bundle,
    pub chart: Chart,
    pub relative: Vec<InvariantEntry>,
    pub absolute: Vec<InvariantEntry>,
    pub derivations: [TotalDerivation; 3],
    pub commutators: Vec<Commutator>,
    commutator_spec: &'static [(usize, usize, [&'static str; 3])],
    signature_spec: &'static [(&'static str, Coordinate)],
    signature: OnceLock<Vec<Expression>>,
}

fn q((n, d): (i64, i64)) -> Rational {
    Rational::new(n.into(), d.into())
}

impl Catalog {
    pub(crate) fn build(spec: &Spec, chart: Chart) -> Catalog {
        let bundle = Bundle {
            kind: spec.bundle,
            order: crate::jets::DEFAULT_ORDER,
        };
        let chart = chart.on(spec.bundle);
        let relative: Vec<InvariantEntry> = spec
            .relative
            .iter()
            .map(|(name, formula, weight)| {
                let expr = parse(formula).expect("catalog formula");
                InvariantEntry {
                    name: name.to_string(),
                    bundle: spec.bundle,
                    order: bundle.jet_order(&expr),
                    expr,
                    kind: Kind::Relative {
                        weight: parse(weight).expect("catalog weight"),
                    },
                }
            })
            .collect();
        let mut cat = Catalog {
            bundle,
            chart,
            relative,
            absolute: Vec::new(),
            derivations: std::array::from_fn(|_| {
                TotalDerivation::new(Expression::zero(), Expression::zero(), Expression::zero())
            }),
            commutators: Vec::new(),
            commutator_spec: spec.commutators,
            signature_spec: spec.signature,
            signature: OnceLock::new(),
        };
        for (name, parts) in spec.absolute {
            let composition: Vec<(String, Rational)> =
                parts.iter().map(|(n, e)| (n.to_string(), q(*e))).collect();
            let expr = cat.monomial(&composition);
            cat.absolute.push(InvariantEntry {
                name: name.to_string(),
                bundle: spec.bundle,
                order: bundle.jet_order(&expr),
                expr,
                kind: Kind::Absolute { composition },
            });
        }
        for (k, (prefactors, parts)) in spec.derivations.iter().enumerate() {
            let composition: Vec<(String, Rational)> =
                parts.iter().map(|(n, e)| (n.to_string(), q(*e))).collect();
            let common = cat.monomial(&composition);
            let coeffs = std::array::from_fn(|m| match prefactors[m] {
                Some(pre) => parse(pre).expect("derivation prefactor") * common.clone(),
                None => Expression::zero(),
            });
            cat.derivations[k] = TotalDerivation { coeffs };
        }
        for (i, j, cs) in spec.commutators {
            let coeffs = std::array::from_fn(|m| cat.formula(cs[m]));
            cat.commutators.push(Commutator { i: *i, j: *j, coeffs });
        }
        cat
    }

    /// `Π R^q` over relative invariants, on this chart.
    pub fn monomial(&self, composition: &[(String, Rational)]) -> Expression {
        let mut acc = Expression::one();
        for (name, e) in composition {
            let base = &self.relative_entry(name).expr;
            let factor = if e.is_integer() {
                let n: i64 = e.to_integer().try_into().expect("small exponent");
                base.pow(n).expect("nonzero relative invariant")
            } else {
                let sign = match name.as_str() {
                    "I0" => self.chart.i0,
                    "I1" => self.chart.i1,
                    other => panic!("fractional power of {other}"),
                };
                base.abs_pow(e, sign).expect("nonzero relative invariant")
            };
            acc = acc * factor;
        }
        acc
    }

    fn relative_entry(&self, name: &str) -> &InvariantEntry {
        self.relative
            .iter()
            .find(|e| e.name == name)
            .unwrap_or_else(|| panic!("no relative invariant {name}"))
    }

    pub fn get(&self, name: &str) -> Option<&InvariantEntry> {
        self.relative
            .iter()
            .chain(self.absolute.iter())
            .find(|e| e.name == name)
    }

    pub fn entries(&self) -> impl Iterator<Item = &InvariantEntry> {
        self.relative.iter().chain(self.absolute.iter())
    }

    /// The expression of a catalog entry.
    pub fn expr(&self, name: &str) -> &Expression {
        &self
            .get(name)
            .unwrap_or_else(|| panic!("no catalog entry {name}"))
            .expr
    }

    /// Parses a formula and replaces the chart signs `e0`, `e1` by their
    /// values.
    fn with_signs(&self, text: &str) -> Result<Expression, ExprError> {
        let e = parse(text)?;
        let map: HashMap<Var, Expression> = [("e0", self.chart.i0), ("e1", self.chart.i1)]
            .into_iter()
            .map(|(n, s)| (Var::named(n), Expression::int(s.as_i64())))
            .collect();
        e.substitute(&map)
    }

    /// Evaluates a formula whose variables are catalog names, chart signs
    /// and base or jet coordinates.
    pub fn try_formula(&self, text: &str) -> Result<Expression, ExprError> {
        let e = self.with_signs(text)?;
        let map: HashMap<Var, Expression> = e
            .free_vars()
            .into_iter()
            .filter_map(|v| self.get(&v.name()).map(|entry| (v, entry.expr.clone())))
            .collect();
        e.substitute(&map)
    }

    /// [`Catalog::try_formula`] for formulas known to be well formed.
    pub fn formula(&self, text: &str) -> Expression {
        self.try_formula(text).expect("catalog formula")
    }

    /// `∇_k(e)`, zero-based.
    pub fn nabla(&self, k: usize, e: &Expression) -> Result<Expression, JetError> {
        self.derivations[k].apply(&self.bundle, e)
    }

    pub fn check_entry(&self, entry: &InvariantEntry) -> Result<bool, Sl3Error> {
        match &entry.kind {
            Kind::Relative { weight } => check_relative(&entry.expr, weight, &self.bundle),
            Kind::Absolute { .. } => check_absolute(&entry.expr, &self.bundle),
        }
    }

    /// `Σ q_i μ(R_i)` for an absolute entry; zero when weights balance.
    pub fn weight_balance(&self, entry: &InvariantEntry) -> Option<Expression> {
        let Kind::Absolute { composition } = &entry.kind else {
            return None;
        };
        let mut acc = Expression::zero();
        for (name, e) in composition {
            acc = acc + self.relative_entry(name).weight().unwrap().scale(e);
        }
        Some(acc)
    }

    /// Invariance of `∇_k`: `X̂(A^m) − ∇_k(ξ^m) = 0` for each base direction.
    pub fn derivation_defects(&self, k: usize) -> Result<[Expression; 3], Sl3Error> {
        let d = &self.derivations[k];
        let order = d.coeffs.iter().map(|c| self.bundle.jet_order(c)).max().unwrap_or(0);
        let lift = generic_lift(&self.bundle, order)?;
        let field = Sl3Element::generic().contact_field();
        let mut out: [Expression; 3] = std::array::from_fn(|_| Expression::zero());
        for m in Base::ALL {
            let lhs = lift.apply(d.on(m))?;
            let rhs = d.apply(&self.bundle, &field[m.index()])?;
            out[m.index()] = lhs - rhs;
        }
        Ok(out)
    }

    pub fn check_derivation(&self, k: usize) -> Result<bool, Sl3Error> {
        Ok(self.derivation_defects(k)?.iter().all(Expression::is_zero))
    }

    /// Coefficient-wise `[∇_i, ∇_j] − Σ c_k ∇_k` for a relation.
    pub fn commutator_defects(&self, c: &Commutator) -> Result<[Expression; 3], JetError> {
        let (di, dj) = (&self.derivations[c.i], &self.derivations[c.j]);
        let mut out: [Expression; 3] = std::array::from_fn(|_| Expression::zero());
        for m in 0..3 {
            let bracket = self.nabla(c.i, &dj.coeffs[m])? - self.nabla(c.j, &di.coeffs[m])?;
            let mut rhs = Expression::zero();
            for k in 0..3 {
                rhs = rhs + &c.coeffs[k] * &self.derivations[k].coeffs[m];
            }
            out[m] = bracket - rhs;
        }
        Ok(out)
    }

    /// Structure functions as formal polynomials in the catalog names.
    pub fn commutators_formal(&self) -> Vec<Commutator> {
        self.commutator_spec
            .iter()
            .map(|(i, j, cs)| Commutator {
                i: *i,
                j: *j,
                coeffs: std::array::from_fn(|m| self.with_signs(cs[m]).expect("structure function")),
            })
            .collect()
    }

    pub fn check_commutators(&self) -> Result<Vec<bool>, JetError> {
        self.commutators
            .iter()
            .map(|c| Ok(self.commutator_defects(c)?.iter().all(Expression::is_zero)))
            .collect()
    }

    pub fn signature_names(&self) -> Vec<&'static str> {
        self.signature_spec.iter().map(|(n, _)| *n).collect()
    }

    /// Signature coordinate expressions, built on first use.
    pub fn signature(&self) -> &[Expression] {
        self.signature.get_or_init(|| {
            self.signature_spec
                .iter()
                .map(|(_, c)| match c {
                    Coordinate::Entry(name) => self.expr(name).clone(),
                    Coordinate::Nabla(k, name) => self
                        .nabla(*k, self.expr(name))
                        .expect("signature within order budget"),
                })
                .collect()
        })
    }

    /// Matrix of coefficients `∂F_r/∂u_c` of functions affine in the jets `cols`.
    pub fn symbol_matrix(rows: &[Expression], cols: &[Var]) -> Vec<Vec<Expression>> {
        rows.iter()
            .map(|r| cols.iter().map(|&c| r.differentiate(c)).collect())
            .collect()
    }
}

type CatalogKey = (BundleKind, Chart);

static CATALOGS: LazyLock<Mutex<HashMap<CatalogKey, Arc<Catalog>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// The catalog of a bundle on a chart, cached.
pub fn catalog(kind: BundleKind, chart: Chart) -> Arc<Catalog> {
    let key = (kind, chart.on(kind));
    if let Some(c) = CATALOGS.lock().unwrap().get(&key) {
        return c.clone();
    }
    let spec = match kind {
        BundleKind::Pi => &crate::inv_pi::SPEC,
        BundleKind::PiTilde => &crate::inv_pitilde::SPEC,
    };
    let built = Arc::new(Catalog::build(spec, key.1));
    CATALOGS.lock().unwrap().entry(key).or_insert(built).clone()
}

/// A formal derivation on polynomials in symbols `M_k`, sending `M_k` to
/// `M_ik`; used to differentiate structure functions symbolically.
pub fn formal_nabla(e: &Expression, i: usize, symbols: &[&str]) -> Expression {
    let map: HashMap<Var, Var> = symbols
        .iter()
        .map(|s| (Var::named(s), Var::named(&format!("{}{}{}", &s[..1], i + 1, &s[1..]))))
        .collect();
    e.derive_with(&|v| map.get(&v).map(|&w| Expression::from_var(w)))
}

/// The three Jacobi relations `Σ_cyc ∇_i(c_jk^l) + c_jk^m c_im^l = 0`,
/// one per `l`, for structure functions given as formal polynomials.
pub fn jacobi_relations(
    structure: &[Commutator],
    symbols: &[&str],
) -> [Expression; 3] {
    let c = |i: usize, j: usize, l: usize| -> Expression {
        if i == j {
            return Expression::zero();
        }
        for r in structure {
            if (r.i, r.j) == (i, j) {
                return r.coeffs[l].clone();
            }
            if (r.i, r.j) == (j, i) {
                return -r.coeffs[l].clone();
            }
        }
        panic!("missing commutator ({i}, {j})")
    };
    std::array::from_fn(|l| {
        let mut acc = Expression::zero();
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            acc = acc + formal_nabla(&c(j, k, l), i, symbols);
            for m in 0..3 {
                acc = acc + c(j, k, m) * c(i, m, l);
            }
        }
        acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formal_derivation_of_symbols() {
        let e = parse("M1*M2 + 3*M5").unwrap();
        let d = formal_nabla(&e, 1, &["M1", "M2", "M3", "M4", "M5"]);
        assert_eq!(d, parse("M21*M2 + M1*M22 + 3*M25").unwrap());
    }

    #[test]
    fn charts() {
        assert_eq!(Chart::all(BundleKind::Pi).len(), 2);
        assert_eq!(Chart::all(BundleKind::PiTilde).len(), 4);
        let c = Chart::new(Sign::Negative, Sign::Negative);
        assert_eq!(c.on(BundleKind::Pi).i0, Sign::Positive);
        assert_eq!(c.signs(BundleKind::PiTilde), vec![-1, -1]);
    }
}
