//! Acceptance criteria, one report line each.
//!
//! A criterion can fail on a misprinted identity. Those cases are listed in
//! `KNOWN` with the exact checks expected to fail; the target exits nonzero
//! only when the observed failures differ from that list.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jetinv::equiv::{compare, Certificate, EquivConfig, Verdict};
use jetinv::expr::{parse, Expression, Rational};
use jetinv::jets::Section;
use jetinv::numeric::{Evaluator, Grid, DEFAULT_TAU_SING};
use jetinv::reduction::{associated_equation, family_to_section, CurveFamily};
use jetinv::sl3::ProjectiveMap;
use jetinv::verify::{run_suite, Check, Suite};

const KNOWN: &[(usize, &[&str])] = &[
    (1, &["pi L9"]),
    (2, &["pi K5"]),
    (3, &["pi weights generated by I0, I1, L1, L3"]),
    (
        6,
        &[
            "syzygy 1: 6*M34 - 6*M25 - M4*M5 + 12*M4 + 6*M2*M3 + 12*M2 = 0",
            "syzygy 3: 3*M23 - 3*M14 + M5 = 0",
            "Jacobi relations in the span of the listed syzygies",
        ],
    ),
    (
        7,
        &[
            "det U12 = 2 I0^23 I1^14 (L1 L3 + L2 L4) / L1^23",
            "det U10 = -3^20 I0^30 / I1^25",
        ],
    ),
];

struct Outcome {
    title: &'static str,
    failing: Vec<String>,
    detail: String,
    elapsed: Duration,
    limit: Duration,
}

impl Outcome {
    fn passed(&self) -> bool {
        self.failing.is_empty() && self.elapsed <= self.limit
    }
}

fn minutes(m: u64) -> Duration {
    Duration::from_secs(60 * m)
}

fn suite(title: &'static str, s: Suite, limit: Duration) -> Outcome {
    let t = Instant::now();
    let checks: Vec<Check> = run_suite(s);
    let failing: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    let mut detail = format!("{}/{} checks pass", checks.len() - failing.len(), checks.len());
    for c in checks.iter().filter(|c| !c.passed) {
        detail.push_str(&format!("; {}: {}", c.name, c.detail));
    }
    Outcome {
        title,
        failing,
        detail,
        elapsed: t.elapsed(),
        limit,
    }
}

fn pitilde(f: &str) -> Evaluator {
    Evaluator::new(&Section::pitilde(parse(f).unwrap()), DEFAULT_TAU_SING).unwrap()
}

fn unit_box() -> Grid {
    Grid::new([[1.0, 2.0]; 3], [10, 10, 10])
}

fn equivalence_reproduction() -> Outcome {
    let t = Instant::now();
    let cfg = EquivConfig::default();
    let mut failing = Vec::new();
    let mut detail = Vec::new();

    let t1 = Instant::now();
    let v = compare(&pitilde("y*p"), &unit_box(), &pitilde("y*p/2"), &unit_box(), &cfg).unwrap();
    let d1 = t1.elapsed();
    detail.push(format!("y*p vs y*p/2: {:?}, max residual {:.2e}, {:.1}s", v.verdict, v.max_residual, d1.as_secs_f64()));
    if v.verdict != Verdict::Equivalent || v.max_residual > 1e-6 || d1 > minutes(1) {
        failing.push("y*p vs y*p/2".to_string());
    }

    let t2 = Instant::now();
    let v = compare(&pitilde("y"), &unit_box(), &pitilde("y*p"), &unit_box(), &cfg).unwrap();
    let d2 = t2.elapsed();
    let m1_certificate = matches!(&v.certificate, Some(Certificate::DisjointRange { coordinate, .. }) if coordinate == "m1");
    detail.push(format!("y vs y*p: {:?}, m1 disjoint range {m1_certificate}, {:.1}s", v.verdict, d2.as_secs_f64()));
    if v.verdict != Verdict::NotEquivalent || !m1_certificate || d2 > minutes(1) {
        failing.push("y vs y*p".to_string());
    }
    Outcome {
        title: "equivalence reproduction",
        failing,
        detail: detail.join("; "),
        elapsed: t.elapsed(),
        limit: minutes(2),
    }
}

fn random_transforms() -> Outcome {
    let t = Instant::now();
    let grid = unit_box();
    let f = parse("y*p").unwrap();
    let a = pitilde("y*p");
    let eps = Rational::new(1.into(), 4.into());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failing = Vec::new();
    let mut worst = 0.0f64;
    for k in 0..20 {
        let m = ProjectiveMap::random_near_identity(&mut rng, &eps, &grid.bounds, 0.25);
        let fb = m.pushforward_ode(&f).unwrap();
        let b = Evaluator::new(&Section::pitilde(fb), DEFAULT_TAU_SING).unwrap();
        let image = m.image_bounds(&grid.points()).unwrap();
        let v = compare(&a, &grid, &b, &Grid::new(image, grid.counts), &EquivConfig::default()).unwrap();
        if v.verdict == Verdict::Equivalent {
            worst = worst.max(v.max_residual);
        } else {
            failing.push(format!("transform {k}: {:?}", v.verdict));
        }
    }
    Outcome {
        title: "random-transform robustness",
        detail: format!("{}/20 equivalent, worst residual {worst:.2e}", 20 - failing.len()),
        failing,
        elapsed: t.elapsed(),
        limit: minutes(10),
    }
}

fn random_poly(rng: &mut ChaCha8Rng, lead: &str) -> Expression {
    let monomials = ["a", "b", "a^2", "a*b", "b^2"];
    let mut text = lead.to_string();
    for m in monomials {
        let c: i64 = rng.gen_range(-3..=3);
        if c != 0 {
            text.push_str(&format!(" + ({c})*{m}"));
        }
    }
    parse(&text).unwrap()
}

fn reduction_consistency() -> Outcome {
    let t = Instant::now();
    let mut failing = Vec::new();
    let e = |s: &str| parse(s).unwrap();

    let lines = family_to_section(&CurveFamily::new(e("y - p*x"), e("p"))).unwrap();
    if lines.component("f") != Some(&e("0")) || lines.component("g") != Some(&e("p")) {
        failing.push("lines".to_string());
    }
    let assoc = associated_equation(&e("a1*b1")).unwrap();
    if assoc.g2 != e("2*b/a^2") {
        failing.push("h = a1*b1".to_string());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let families = [
        CurveFamily::new(e("y - p*x"), e("p + x*y")),
        CurveFamily::new(e("y*p - x"), e("p^2 + y")),
    ];
    let mut tried = 0;
    while tried < 10 {
        let phi = random_poly(&mut rng, "a");
        let psi = random_poly(&mut rng, "b");
        let (a, b) = (jetinv::expr::Var::named("a"), jetinv::expr::Var::named("b"));
        let jac = &phi.differentiate(a) * &psi.differentiate(b) - &phi.differentiate(b) * &psi.differentiate(a);
        if jac.is_zero() {
            continue;
        }
        let fam = &families[tried % 2];
        let base = family_to_section(fam).unwrap();
        let moved = family_to_section(&fam.reparametrize(&phi, &psi).unwrap()).unwrap();
        if base.component("f") != moved.component("f") || base.component("g") != moved.component("g") {
            failing.push(format!("reparametrization ({phi}, {psi})"));
        }
        tried += 1;
    }
    Outcome {
        title: "reduction consistency",
        detail: format!("lines, associated equation, {tried} reparametrizations"),
        failing,
        elapsed: t.elapsed(),
        limit: minutes(1),
    }
}

fn main() -> ExitCode {
    let runs: Vec<(usize, Box<dyn Fn() -> Outcome>)> = vec![
        (1, Box::new(|| suite("relative invariance", Suite::Weights, minutes(2)))),
        (2, Box::new(|| suite("absolute invariance", Suite::Absolutes, minutes(2)))),
        (3, Box::new(|| suite("weight generators", Suite::Generators, Duration::from_secs(1)))),
        (4, Box::new(|| suite("invariant derivations", Suite::Derivations, minutes(2)))),
        (5, Box::new(|| suite("commutation relations", Suite::Commutators, minutes(3)))),
        (6, Box::new(|| suite("syzygies", Suite::Syzygies, minutes(3)))),
        (7, Box::new(|| suite("determinant identities", Suite::Determinants, minutes(10)))),
        (8, Box::new(equivalence_reproduction)),
        (9, Box::new(random_transforms)),
        (10, Box::new(reduction_consistency)),
    ];
    let mut unexpected = 0;
    for (n, run) in runs {
        let o = run();
        let expected: Vec<&str> = KNOWN.iter().find(|(k, _)| *k == n).map(|(_, v)| v.to_vec()).unwrap_or_default();
        let mark = if o.passed() { "PASS" } else { "FAIL" };
        println!(
            "criterion {n:>2} {mark} {} [{:.1}s]: {}",
            o.title,
            o.elapsed.as_secs_f64(),
            o.detail
        );
        let mut failing = o.failing.clone();
        failing.sort();
        let mut want: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
        want.sort();
        if failing != want || o.elapsed > o.limit {
            println!("    unexpected outcome: failing {failing:?}, known {want:?}");
            unexpected += 1;
        } else if !failing.is_empty() {
            println!("    known deviation: {}", failing.join(" | "));
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
