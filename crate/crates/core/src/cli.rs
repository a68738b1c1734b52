//! Job files and the commands behind the `jetinv` binary.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equiv::{compare, EquivConfig, EquivalenceVerdict};
use crate::expr::{parse, ExprError, Expression};
use crate::jets::{BundleKind, Section};
use crate::numeric::{sample_signature, Evaluator, Grid, NumericError, SignatureSet, DEFAULT_TAU_SING};
use crate::reduction::{
    associated_equation, check_contact_integrality, dual_swap, AssociatedEquation, CurveFamily, ReductionError,
    RootPair,
};
use crate::verify::{run_suite, Check, Suite};

pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid job: {0}")]
    Invalid(String),
    #[error("no regular points in the box ({0})")]
    NoRegularPoints(String),
    #[error("associated equation is not y'' = 0 (G2 = {0}); normalizing coordinates is left to the caller")]
    NotNormalized(String),
    #[error("jobs use different bundles")]
    BundleMismatch,
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BundleName {
    Pi,
    Pitilde,
}

impl From<BundleName> for BundleKind {
    fn from(b: BundleName) -> BundleKind {
        match b {
            BundleName::Pi => BundleKind::Pi,
            BundleName::Pitilde => BundleKind::PiTilde,
        }
    }
}

/// A section over a sampling box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    pub bundle: BundleName,
    pub f: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<String>,
    #[serde(rename = "box")]
    pub bounds: [[f64; 2]; 3],
    pub grid: [usize; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_sing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_match: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: name.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: name, source })
}

impl Job {
    pub fn new(bundle: BundleName, f: &str, g: Option<&str>, bounds: [[f64; 2]; 3], grid: [usize; 3]) -> Job {
        Job {
            bundle,
            f: f.into(),
            g: g.map(Into::into),
            bounds,
            grid,
            tau_sing: None,
            tau_match: None,
            output: None,
        }
    }

    pub fn load(path: &Path) -> Result<Job, CliError> {
        let job: Job = read_json(path)?;
        job.validate()?;
        Ok(job)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.grid.iter().any(|&n| n < 2) {
            return Err(CliError::Invalid("grid resolution must be at least 2 per axis".into()));
        }
        if self.bounds.iter().any(|[lo, hi]| !(lo.is_finite() && hi.is_finite() && lo < hi)) {
            return Err(CliError::Invalid("box must be finite and nondegenerate".into()));
        }
        match (self.bundle, &self.g) {
            (BundleName::Pi, None) => Err(CliError::Invalid("bundle pi needs g".into())),
            (BundleName::Pitilde, Some(_)) => Err(CliError::Invalid("bundle pitilde takes only f".into())),
            _ => Ok(()),
        }
    }

    pub fn section(&self) -> Result<Section, CliError> {
        let f = parse(&self.f)?;
        Ok(match &self.g {
            Some(g) => Section::pi(f, parse(g)?),
            None => Section::pitilde(f),
        })
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.bounds, self.grid)
    }

    pub fn evaluator(&self) -> Result<Evaluator, CliError> {
        Ok(Evaluator::new(&self.section()?, self.tau_sing.unwrap_or(DEFAULT_TAU_SING))?)
    }
}

/// One line of a signature file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignatureLine {
    pub base: [f64; 3],
    pub signs: Vec<i64>,
    pub coords: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SignatureSummary {
    pub names: Vec<&'static str>,
    pub samples: usize,
    pub attempted: usize,
    pub regular_fraction: f64,
    pub rejected: Vec<(String, usize)>,
}

/// Samples a job and writes one JSON line per regular point.
pub fn cmd_signature(job: &Job, out: &mut dyn Write) -> Result<SignatureSummary, CliError> {
    let ev = job.evaluator()?;
    let set: SignatureSet = sample_signature(&ev, &job.grid());
    if set.samples.is_empty() {
        let why: Vec<String> = set.rejected.iter().map(|(k, n)| format!("{k}: {n}")).collect();
        return Err(CliError::NoRegularPoints(why.join(", ")));
    }
    let io = |source| CliError::Io {
        path: "signature output".into(),
        source,
    };
    for s in &set.samples {
        let line = SignatureLine {
            base: s.base,
            signs: s.chart.signs(ev.kind),
            coords: s.coords.clone(),
        };
        serde_json::to_writer(&mut *out, &line).map_err(|source| CliError::Json {
            path: "signature output".into(),
            source,
        })?;
        out.write_all(b"\n").map_err(io)?;
    }
    Ok(SignatureSummary {
        names: set.names.clone(),
        samples: set.samples.len(),
        attempted: set.attempted,
        regular_fraction: set.regular_fraction(),
        rejected: set.rejected.clone(),
    })
}

/// Compares the signatures of two jobs; `tol` overrides the match tolerance.
pub fn cmd_equiv(a: &Job, b: &Job, tol: Option<f64>) -> Result<EquivalenceVerdict, CliError> {
    if a.bundle != b.bundle {
        return Err(CliError::BundleMismatch);
    }
    let mut cfg = EquivConfig::default();
    if let Some(t) = tol.or(a.tau_match).or(b.tau_match) {
        cfg.tau_match = t;
    }
    Ok(compare(&a.evaluator()?, &a.grid(), &b.evaluator()?, &b.grid(), &cfg)?)
}

pub fn cmd_verify(suite: Suite) -> Vec<Check> {
    run_suite(suite)
}

/// A cubic equation given by its roots, with integrals of the first two
/// root fields and their interdependency.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReduceInput {
    pub lambda: [String; 3],
    pub a: [String; 2],
    pub b: [String; 2],
    pub h: String,
    /// Optional integrals of the third root field.
    #[serde(default)]
    pub family: Option<[String; 2]>,
    #[serde(rename = "box", default = "default_box")]
    pub bounds: [[f64; 2]; 3],
    #[serde(default = "default_grid")]
    pub grid: [usize; 3],
}

fn default_box() -> [[f64; 2]; 3] {
    [[1.0, 2.0]; 3]
}

fn default_grid() -> [usize; 3] {
    [10; 3]
}

impl ReduceInput {
    pub fn load(path: &Path) -> Result<ReduceInput, CliError> {
        read_json(path)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquationReport {
    pub c: String,
    pub g: String,
    pub eliminated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReduceReport {
    /// The equation of the second root field, `y'' = G2`.
    pub associated: EquationReport,
    /// Its dual, with the roots exchanged, when `h` can be inverted for `b1`.
    pub dual: Option<EquationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_error: Option<String>,
    pub normalized: bool,
    pub job: Option<Job>,
}

fn roots(input: &ReduceInput) -> Result<[Expression; 3], CliError> {
    let l: Vec<Expression> = input.lambda.iter().map(|s| parse(s)).collect::<Result<_, _>>()?;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if l[i] == l[j] {
            return Err(ReductionError::IndistinctRoots(i + 1, j + 1).into());
        }
    }
    Ok(<[Expression; 3]>::try_from(l).unwrap())
}

/// Builds the associated equation of the first two roots and, when it is
/// `y'' = 0`, the π̃ job of the third root.
pub fn cmd_reduce(input: &ReduceInput) -> Result<ReduceReport, CliError> {
    let [l1, l2, l3] = roots(input)?;
    let p = |s: &String| parse(s);
    let pair = RootPair {
        lambda: [l1, l2],
        a: [p(&input.a[0])?, p(&input.a[1])?],
        b: [p(&input.b[0])?, p(&input.b[1])?],
        h: p(&input.h)?,
    };
    pair.verify()?;
    let e2 = associated_equation(&pair.h)?;
    let report = |e: &AssociatedEquation| EquationReport {
        c: e.c.to_string(),
        g: e.g2.to_string(),
        eliminated: e.eliminated,
    };
    let (dual, dual_error) = match dual_swap(&pair) {
        Ok((e1, _)) => (Some(report(&e1)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut out = ReduceReport {
        associated: report(&e2),
        dual,
        dual_error,
        normalized: e2.g2.is_zero(),
        job: None,
    };
    if !out.normalized {
        return Ok(out);
    }
    if let Some([a3, b3]) = &input.family {
        let fam = CurveFamily::new(p(a3)?, p(b3)?);
        if !check_contact_integrality(&fam, &l3).integral {
            return Err(ReductionError::NotAnIntegral {
                root: 3,
                function: format!("({a3}, {b3})"),
            }
            .into());
        }
    }
    let job = Job::new(BundleName::Pitilde, &l3.to_string(), None, input.bounds, input.grid);
    job.validate()?;
    out.job = Some(job);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(f: &str) -> Job {
        Job::new(BundleName::Pitilde, f, None, [[1.0, 2.0]; 3], [10, 10, 10])
    }

    #[test]
    fn job_json_round_trip() {
        let text = r#"{"bundle": "pitilde", "f": "y*p", "box": [[1,2],[1,2],[1,2]], "grid": [10,10,10]}"#;
        let j: Job = serde_json::from_str(text).unwrap();
        assert_eq!(j, job("y*p"));
        let back: Job = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
        assert_eq!(back, j);
    }

    #[test]
    fn job_validation() {
        let mut j = job("y*p");
        j.grid = [1, 10, 10];
        assert!(j.validate().is_err());
        let mut j = job("y*p");
        j.bounds[2] = [2.0, 2.0];
        assert!(j.validate().is_err());
        let j = Job::new(BundleName::Pi, "1", None, [[1.0, 2.0]; 3], [3, 3, 3]);
        assert!(j.validate().is_err());
    }

    #[test]
    fn signature_lines() {
        let mut j = job("y*p");
        j.grid = [3, 3, 3];
        let mut buf = Vec::new();
        let s = cmd_signature(&j, &mut buf).unwrap();
        assert_eq!(s.samples, 27);
        let text = String::from_utf8(buf).unwrap();
        let first: SignatureLine = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first.signs, vec![1, -1]);
        assert_eq!(first.coords.len(), s.names.len());
    }

    #[test]
    fn constant_has_no_regular_points() {
        let mut j = job("1");
        j.grid = [3, 3, 3];
        assert!(matches!(
            cmd_signature(&j, &mut Vec::new()),
            Err(CliError::NoRegularPoints(_))
        ));
    }

    fn reduce_input(h: &str) -> ReduceInput {
        ReduceInput {
            lambda: ["0".into(), "1/2".into(), "y*p".into()],
            a: ["p".into(), "p - x/2".into()],
            b: ["p*x - y - p^2".into(), "y - p*x + x^2/4".into()],
            h: h.into(),
            family: None,
            bounds: default_box(),
            grid: default_grid(),
        }
    }

    #[test]
    fn reduce_to_third_root() {
        let r = cmd_reduce(&reduce_input("a2^2 - 2*a1*a2 - b1")).unwrap();
        assert!(r.normalized);
        assert_eq!(r.dual.unwrap().g, "2");
        assert_eq!(r.job.unwrap().f, "y*p");
    }

    #[test]
    fn reduce_rejects_equal_roots() {
        let mut input = reduce_input("a2^2 - 2*a1*a2 - b1");
        input.lambda[2] = "1/2".into();
        assert!(matches!(
            cmd_reduce(&input),
            Err(CliError::Reduction(ReductionError::IndistinctRoots(2, 3)))
        ));
    }
}
