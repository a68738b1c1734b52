//! Floating-point evaluation of catalog invariants on concrete sections.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use rayon::prelude::*;
use thiserror::Error;

use crate::catalog::{catalog, Catalog, Chart};
use crate::expr::{Compiled, ExprError, Expression, Sign, Var};
use crate::jets::{Base, Bundle, BundleKind, JetError, Section};

#[derive(Debug, Error)]
pub enum NumericError {
    #[error("singular point {point:?}: {factor} vanishes")]
    Singular { factor: String, point: [f64; 3] },
    #[error("section is not defined at {0:?}")]
    Undefined([f64; 3]),
    #[error("section belongs to {found:?}, expected {expected:?}")]
    WrongBundle {
        expected: BundleKind,
        found: BundleKind,
    },
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Highest jet order the signature of a bundle depends on.
pub fn signature_order(kind: BundleKind) -> u8 {
    match kind {
        BundleKind::Pi => 2,
        BundleKind::PiTilde => 3,
    }
}

/// Names of the polynomial factors whose non-vanishing defines regular
/// points, and their formulas over catalog names.
pub fn regularity_factors(kind: BundleKind) -> &'static [&'static str] {
    match kind {
        BundleKind::Pi => &["I0", "I1", "L1", "L1*L3 + L2*L4"],
        BundleKind::PiTilde => &["I0", "I1"],
    }
}

/// A catalog compiled for fast evaluation on jet values.
pub struct CompiledCatalog {
    pub kind: BundleKind,
    pub chart: Chart,
    /// Base coordinates followed by jets up to the signature order.
    pub inputs: Vec<Var>,
    pub signature_names: Vec<&'static str>,
    signature: Vec<Compiled>,
    regularity: Vec<(&'static str, Compiled)>,
    catalog: Arc<Catalog>,
    extra: Mutex<HashMap<String, Arc<Compiled>>>,
}

impl CompiledCatalog {
    fn build(kind: BundleKind, chart: Chart) -> Result<CompiledCatalog, ExprError> {
        let cat = catalog(kind, chart);
        let inputs = cat.bundle.coordinates(signature_order(kind));
        let signature = cat
            .signature()
            .iter()
            .map(|e| Compiled::new(e, &inputs))
            .collect::<Result<_, _>>()?;
        let regularity = regularity_factors(kind)
            .iter()
            .map(|name| Ok((*name, Compiled::new(&cat.formula(name), &inputs)?)))
            .collect::<Result<_, ExprError>>()?;
        Ok(CompiledCatalog {
            kind,
            chart: cat.chart,
            inputs,
            signature_names: cat.signature_names(),
            signature,
            regularity,
            catalog: cat,
            extra: Mutex::new(HashMap::new()),
        })
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    /// A compiled catalog entry or formula over catalog names.
    pub fn compiled(&self, formula: &str) -> Result<Arc<Compiled>, NumericError> {
        if let Some(c) = self.extra.lock().unwrap().get(formula) {
            return Ok(c.clone());
        }
        let e = self.catalog.try_formula(formula)?;
        let order = self.catalog.bundle.jet_order(&e);
        if order > signature_order(self.kind) {
            return Err(JetError::OrderBudget {
                order,
                budget: signature_order(self.kind),
            }
            .into());
        }
        let c = Arc::new(Compiled::new(&e, &self.inputs)?);
        self.extra
            .lock()
            .unwrap()
            .insert(formula.to_string(), c.clone());
        Ok(c)
    }
}

type CompiledKey = (BundleKind, Chart);

static COMPILED: LazyLock<Mutex<HashMap<CompiledKey, Arc<CompiledCatalog>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// The compiled catalog of a bundle on a chart, cached.
pub fn compiled_catalog(kind: BundleKind, chart: Chart) -> Arc<CompiledCatalog> {
    let key = (kind, chart.on(kind));
    if let Some(c) = COMPILED.lock().unwrap().get(&key) {
        return c.clone();
    }
    let built = Arc::new(CompiledCatalog::build(kind, key.1).expect("catalog compiles"));
    COMPILED.lock().unwrap().entry(key).or_insert(built).clone()
}

/// A section with its jets compiled as functions of `(x, y, p)`.
pub struct SectionJets {
    pub section: Section,
    inputs: Vec<Var>,
    jets: Vec<Compiled>,
}

impl SectionJets {
    pub fn new(section: &Section, order: u8) -> Result<SectionJets, NumericError> {
        let bundle = Bundle {
            kind: section.bundle,
            order,
        };
        let base: Vec<Var> = Base::ALL.iter().map(|b| b.var()).collect();
        let inputs = bundle.coordinates(order);
        let jets = inputs
            .iter()
            .map(|&v| {
                let e = match bundle.jet_parts(v) {
                    Some((func, counts)) => section.jet_value(&func, counts)?,
                    None => Expression::from_var(v),
                };
                if let Some(bad) = e.free_vars().into_iter().find(|v| !base.contains(v)) {
                    return Err(ExprError::UnboundVariable(bad.name()).into());
                }
                Ok(Compiled::new(&e, &base)?)
            })
            .collect::<Result<_, NumericError>>()?;
        Ok(SectionJets {
            section: section.clone(),
            inputs,
            jets,
        })
    }

    pub fn inputs(&self) -> &[Var] {
        &self.inputs
    }

    /// Base coordinates and jet values at a point.
    pub fn values(&self, pt: [f64; 3]) -> Result<Vec<f64>, NumericError> {
        self.jets
            .iter()
            .map(|c| c.eval(&pt).filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or(NumericError::Undefined(pt))
    }
}

/// A point of the signature manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct SignatureSample {
    pub base: [f64; 3],
    pub chart: Chart,
    pub coords: Vec<f64>,
}

/// Evaluates invariants of one section.
pub struct Evaluator {
    pub kind: BundleKind,
    pub tau_sing: f64,
    jets: SectionJets,
}

pub const DEFAULT_TAU_SING: f64 = 1e-9;

impl Evaluator {
    pub fn new(section: &Section, tau_sing: f64) -> Result<Evaluator, NumericError> {
        Ok(Evaluator {
            kind: section.bundle,
            tau_sing,
            jets: SectionJets::new(section, signature_order(section.bundle))?,
        })
    }

    pub fn section(&self) -> &Section {
        &self.jets.section
    }

    /// The chart at a point and the compiled catalog on it, after checking
    /// the regularity factors.
    fn prepare(&self, pt: [f64; 3]) -> Result<(Vec<f64>, Arc<CompiledCatalog>), NumericError> {
        let vals = self.jets.values(pt)?;
        let scale = self.tau_sing * (1.0 + vals.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let probe = compiled_catalog(self.kind, Chart::POSITIVE);
        let mut signs = [Sign::Positive; 2];
        for (k, (name, c)) in probe.regularity.iter().enumerate() {
            let v = c.eval(&vals).unwrap_or(0.0);
            if !v.is_finite() || v.abs() <= scale {
                return Err(NumericError::Singular {
                    factor: name.to_string(),
                    point: pt,
                });
            }
            if k < 2 {
                signs[k] = Sign::of(v);
            }
        }
        let chart = Chart::new(signs[0], signs[1]).on(self.kind);
        Ok((vals, compiled_catalog(self.kind, chart)))
    }

    /// The signature coordinates at a point.
    pub fn sample(&self, pt: [f64; 3]) -> Result<SignatureSample, NumericError> {
        let (vals, cc) = self.prepare(pt)?;
        let coords = cc
            .signature
            .iter()
            .map(|c| c.eval(&vals).filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| NumericError::Singular {
                factor: "denominator".into(),
                point: pt,
            })?;
        if self.kind == BundleKind::Pi {
            let w = det_w(&coords);
            let norm: f64 = (0..3)
                .map(|k| 1.0 + (0..3).map(|i| coords[6 + 3 * i + k].powi(2)).sum::<f64>().sqrt())
                .product();
            if w.abs() <= self.tau_sing * norm {
                return Err(NumericError::Singular {
                    factor: "det W".into(),
                    point: pt,
                });
            }
        }
        Ok(SignatureSample {
            base: pt,
            chart: cc.chart,
            coords,
        })
    }

    /// Value of a catalog entry (or formula over catalog names) at a point.
    pub fn eval(&self, formula: &str, pt: [f64; 3]) -> Result<f64, NumericError> {
        let (vals, cc) = self.prepare(pt)?;
        cc.compiled(formula)?
            .eval(&vals)
            .filter(|v| v.is_finite())
            .ok_or_else(|| NumericError::Singular {
                factor: "denominator".into(),
                point: pt,
            })
    }

    /// Values of named regularity factors at a point, without any
    /// threshold.
    pub fn regularity_values(&self, pt: [f64; 3]) -> Result<Vec<(&'static str, f64)>, NumericError> {
        let vals = self.jets.values(pt)?;
        let probe = compiled_catalog(self.kind, Chart::POSITIVE);
        Ok(probe
            .regularity
            .iter()
            .map(|(n, c)| (*n, c.eval(&vals).unwrap_or(f64::NAN)))
            .collect())
    }
}

/// `det (∇_k J_i)` from the fifteen signature coordinates on π.
pub fn det_w(coords: &[f64]) -> f64 {
    let w = |i: usize, k: usize| coords[6 + 3 * i + k];
    w(0, 0) * (w(1, 1) * w(2, 2) - w(1, 2) * w(2, 1)) - w(0, 1) * (w(1, 0) * w(2, 2) - w(1, 2) * w(2, 0))
        + w(0, 2) * (w(1, 0) * w(2, 1) - w(1, 1) * w(2, 0))
}

/// A rectangular grid `[x0,x1]×[y0,y1]×[p0,p1]` with inclusive end points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub bounds: [[f64; 2]; 3],
    pub counts: [usize; 3],
}

impl Grid {
    pub fn new(bounds: [[f64; 2]; 3], counts: [usize; 3]) -> Grid {
        Grid { bounds, counts }
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn axis(&self, a: usize, i: usize) -> f64 {
        let [lo, hi] = self.bounds[a];
        let n = self.counts[a];
        if n <= 1 {
            return 0.5 * (lo + hi);
        }
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }

    pub fn points(&self) -> Vec<[f64; 3]> {
        let [nx, ny, np] = self.counts;
        let mut out = Vec::with_capacity(self.len());
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..np {
                    out.push([self.axis(0, i), self.axis(1, j), self.axis(2, k)]);
                }
            }
        }
        out
    }
}

/// Outcome of sampling a signature on a grid.
#[derive(Clone, Debug)]
pub struct SignatureSet {
    pub kind: BundleKind,
    pub names: Vec<&'static str>,
    pub samples: Vec<SignatureSample>,
    pub attempted: usize,
    /// How many points were rejected, per failing factor.
    pub rejected: Vec<(String, usize)>,
}

impl SignatureSet {
    pub fn regular_fraction(&self) -> f64 {
        if self.attempted == 0 {
            return 0.0;
        }
        self.samples.len() as f64 / self.attempted as f64
    }
}

/// Runs `f` on a pool capped by `JETINV_THREADS` when set.
pub fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let threads = std::env::var("JETINV_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

/// Samples the signature of a section at every grid point.
pub fn sample_signature(ev: &Evaluator, grid: &Grid) -> SignatureSet {
    let points = grid.points();
    let results: Vec<Result<SignatureSample, NumericError>> =
        with_pool(|| points.par_iter().map(|&pt| ev.sample(pt)).collect());
    let mut samples = Vec::new();
    let mut rejected: Vec<(String, usize)> = Vec::new();
    for r in results {
        match r {
            Ok(s) => samples.push(s),
            Err(e) => {
                let key = match e {
                    NumericError::Singular { factor, .. } => factor,
                    other => other.to_string(),
                };
                match rejected.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, n)) => *n += 1,
                    None => rejected.push((key, 1)),
                }
            }
        }
    }
    SignatureSet {
        kind: ev.kind,
        names: compiled_catalog(ev.kind, Chart::POSITIVE).signature_names.clone(),
        samples,
        attempted: points.len(),
        rejected,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn ode(f: &str) -> Section {
        Section::pitilde(parse(f).unwrap())
    }

    #[test]
    fn yp_values_at_a_point() {
        let ev = Evaluator::new(&ode("y*p"), DEFAULT_TAU_SING).unwrap();
        let pt = [1.0, 1.0, 2.0];
        assert!((ev.eval("I0", pt).unwrap() - 2.0).abs() < 1e-12);
        assert!((ev.eval("I1", pt).unwrap() + 8.0).abs() < 1e-12);
        assert!((ev.eval("H1", pt).unwrap() + 4.0).abs() < 1e-12);
        assert!((ev.eval("M1", pt).unwrap() - 0.5).abs() < 1e-12);
        let s = ev.sample(pt).unwrap();
        assert_eq!(s.chart, Chart::new(Sign::Positive, Sign::Negative));
        assert_eq!(s.coords.len(), 10);
    }

    #[test]
    fn singular_points_name_the_factor() {
        let ev = Evaluator::new(&ode("3"), DEFAULT_TAU_SING).unwrap();
        match ev.sample([0.5, 0.5, 0.5]) {
            Err(NumericError::Singular { factor, .. }) => assert_eq!(factor, "I1"),
            other => panic!("{other:?}"),
        }
        let flat = Evaluator::new(&ode("0"), DEFAULT_TAU_SING).unwrap();
        match flat.sample([0.5, 0.5, 0.5]) {
            Err(NumericError::Singular { factor, .. }) => assert_eq!(factor, "I0"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grid_points_are_inclusive() {
        let g = Grid::new([[1.0, 2.0]; 3], [3, 2, 1]);
        let pts = g.points();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], [1.0, 1.0, 1.5]);
        assert_eq!(pts[5], [2.0, 2.0, 1.5]);
    }

    #[test]
    fn degenerate_pi_section_is_never_regular() {
        let s = Section::pi(parse("1").unwrap(), parse("p + x").unwrap());
        let ev = Evaluator::new(&s, DEFAULT_TAU_SING).unwrap();
        let set = sample_signature(&ev, &Grid::new([[0.5, 1.5], [0.5, 1.5], [2.0, 3.0]], [3, 3, 3]));
        assert!(set.samples.is_empty());
    }
}
