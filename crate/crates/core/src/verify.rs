//! Symbolic identity suites over both catalogs.

use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{Catalog, Chart};
use crate::expr::{Expression, Sign};
use crate::inv_pi::{self, catalog_pi, DetReport};
use crate::inv_pitilde::{self, catalog_pitilde};
use crate::sl3::weight_span;

/// Exact points per determinant identity.
pub const DET_POINTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    Weights,
    Absolutes,
    Generators,
    Derivations,
    Commutators,
    Syzygies,
    Determinants,
}

impl Suite {
    pub const EACH: [Suite; 7] = [
        Suite::Weights,
        Suite::Absolutes,
        Suite::Generators,
        Suite::Derivations,
        Suite::Commutators,
        Suite::Syzygies,
        Suite::Determinants,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Weights => "weights",
            Suite::Absolutes => "absolutes",
            Suite::Generators => "generators",
            Suite::Derivations => "derivations",
            Suite::Commutators => "commutators",
            Suite::Syzygies => "syzygies",
            Suite::Determinants => "determinants",
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Suite, String> {
        std::iter::once(Suite::All)
            .chain(Suite::EACH)
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Job = (&'static str, String, Box<dyn Fn() -> (bool, String) + Send + Sync>);

fn nonzero_count(es: &[Expression]) -> usize {
    es.iter().filter(|e| !e.is_zero()).count()
}

fn det_outcome(r: Result<DetReport, crate::expr::ExprError>) -> (bool, String) {
    match r {
        Ok(r) => (
            r.passed(),
            format!("{} points, {} failures, {} sign flips", r.points, r.failures, r.sign_flips),
        ),
        Err(e) => (false, e.to_string()),
    }
}

fn relative_jobs(suite: &'static str, cat: &Arc<Catalog>, tag: &str, jobs: &mut Vec<Job>) {
    for (i, e) in cat.relative.iter().enumerate() {
        let cat = cat.clone();
        jobs.push((
            suite,
            format!("{tag} {}", e.name),
            Box::new(move || match cat.check_entry(&cat.relative[i]) {
                Ok(ok) => (ok, "L(F) = mu F".into()),
                Err(err) => (false, err.to_string()),
            }),
        ));
    }
}

fn absolute_jobs(suite: &'static str, cat: &Arc<Catalog>, tag: &str, jobs: &mut Vec<Job>) {
    for (i, e) in cat.absolute.iter().enumerate() {
        let cat = cat.clone();
        jobs.push((
            suite,
            format!("{tag} {}", e.name),
            Box::new(move || {
                let entry = &cat.absolute[i];
                let balanced = cat.weight_balance(entry).is_some_and(|w| w.is_zero());
                match cat.check_entry(entry) {
                    Ok(ok) => (
                        ok && balanced,
                        format!("annihilated: {ok}, weights balance: {balanced}"),
                    ),
                    Err(err) => (false, err.to_string()),
                }
            }),
        ));
    }
}

fn generator_job(cat: &Arc<Catalog>, tag: &str, gens: &'static [&'static str]) -> Job {
    let cat = cat.clone();
    (
        "generators",
        format!("{tag} weights generated by {}", gens.join(", ")),
        Box::new(move || {
            let weight = |n: &str| cat.get(n).and_then(|e| e.weight()).cloned().unwrap();
            let g: Vec<Expression> = gens.iter().map(|n| weight(n)).collect();
            let all: Vec<Expression> = cat.relative.iter().map(|e| e.weight().cloned().unwrap()).collect();
            match weight_span(&g, &all) {
                Ok(span) => (
                    span.generates(),
                    format!("generator rank {}, total rank {}", span.generator_rank, span.total_rank),
                ),
                Err(err) => (false, err.to_string()),
            }
        }),
    )
}

fn jobs(suite: Suite) -> Vec<Job> {
    let pi = catalog_pi(Sign::Positive);
    let pt = catalog_pitilde(Chart::POSITIVE);
    let mut jobs: Vec<Job> = Vec::new();
    let want = |s: Suite| suite == Suite::All || suite == s;
    if want(Suite::Weights) {
        relative_jobs("weights", &pi, "pi", &mut jobs);
        relative_jobs("weights", &pt, "pitilde", &mut jobs);
    }
    if want(Suite::Absolutes) {
        absolute_jobs("absolutes", &pi, "pi", &mut jobs);
        absolute_jobs("absolutes", &pt, "pitilde", &mut jobs);
    }
    if want(Suite::Generators) {
        jobs.push(generator_job(&pi, "pi", &["I0", "I1", "L1", "L3"]));
        jobs.push(generator_job(&pt, "pitilde", &["I0", "I1"]));
    }
    if want(Suite::Derivations) {
        for (tag, cat) in [("pi", &pi), ("pitilde", &pt)] {
            for k in 0..3 {
                let cat = cat.clone();
                jobs.push((
                    "derivations",
                    format!("{tag} nabla{}", k + 1),
                    Box::new(move || match cat.check_derivation(k) {
                        Ok(ok) => (ok, "commutes with the lifted field".into()),
                        Err(err) => (false, err.to_string()),
                    }),
                ));
            }
        }
    }
    if want(Suite::Commutators) {
        for (tag, cat) in [("pi", &pi), ("pitilde", &pt)] {
            for (idx, c) in cat.commutators.iter().enumerate() {
                let cat = cat.clone();
                jobs.push((
                    "commutators",
                    format!("{tag} [nabla{}, nabla{}]", c.i + 1, c.j + 1),
                    Box::new(move || match cat.commutator_defects(&cat.commutators[idx]) {
                        Ok(d) => (d.iter().all(Expression::is_zero), format!("{} nonzero coefficients", nonzero_count(&d))),
                        Err(err) => (false, err.to_string()),
                    }),
                ));
            }
        }
    }
    if want(Suite::Syzygies) {
        for (idx, text) in inv_pitilde::SYZYGIES.iter().enumerate() {
            let pt = pt.clone();
            jobs.push((
                "syzygies",
                format!("syzygy {}: {text} = 0", idx + 1),
                Box::new(move || {
                    let e = crate::expr::parse(inv_pitilde::SYZYGIES[idx]).unwrap();
                    match inv_pitilde::realize(&pt, &e) {
                        Ok(r) => (r.is_zero(), if r.is_zero() { "vanishes".into() } else { "does not vanish".into() }),
                        Err(err) => (false, err.to_string()),
                    }
                }),
            ));
        }
        jobs.push((
            "syzygies",
            "Jacobi relations in the span of the listed syzygies".into(),
            Box::new(move || {
                let coords = inv_pitilde::jacobi_in_syzygy_span(&pt);
                let inside = coords.iter().filter(|c| c.is_some()).count();
                (inside == coords.len(), format!("{inside} of {} relations in the span", coords.len()))
            }),
        ));
    }
    if want(Suite::Determinants) {
        jobs.push((
            "determinants",
            "det U12 = 2 I0^23 I1^14 (L1 L3 + L2 L4) / L1^23".into(),
            Box::new(|| det_outcome(inv_pi::check_det_u12(DET_POINTS, 12))),
        ));
        jobs.push((
            "determinants",
            "det U10 = -3^20 I0^30 / I1^25".into(),
            Box::new(|| det_outcome(inv_pitilde::check_det_u10(DET_POINTS, 10))),
        ));
        jobs.push((
            "determinants",
            "det U = -(L1^2 / (I0^4 I1)) det W".into(),
            Box::new(|| det_outcome(inv_pi::check_det_u_w(DET_POINTS, 3))),
        ));
    }
    jobs
}

/// Runs a suite, independent identities in parallel.
pub fn run_suite(suite: Suite) -> Vec<Check> {
    jobs(suite)
        .into_par_iter()
        .map(|(suite, name, f)| {
            let t = Instant::now();
            let (passed, detail) = f();
            Check {
                suite,
                name,
                passed,
                detail,
                seconds: t.elapsed().as_secs_f64(),
            }
        })
        .collect()
}
