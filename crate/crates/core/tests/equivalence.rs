use jetinv::equiv::{compare, Certificate, EquivConfig, EquivalenceVerdict, Verdict};
use jetinv::expr::parse;
use jetinv::jets::Section;
use jetinv::numeric::{Evaluator, Grid, DEFAULT_TAU_SING};

fn ode(f: &str) -> Evaluator {
    Evaluator::new(&Section::pitilde(parse(f).unwrap()), DEFAULT_TAU_SING).unwrap()
}

fn grid() -> Grid {
    Grid::new([[1.0, 2.0]; 3], [10, 10, 10])
}

fn run(a: &str, b: &str) -> EquivalenceVerdict {
    compare(&ode(a), &grid(), &ode(b), &grid(), &EquivConfig::default()).unwrap()
}

fn certified(v: &EquivalenceVerdict) -> bool {
    match v.verdict {
        Verdict::NotEquivalent => v.certificate.is_some(),
        _ => true,
    }
}

const FIXTURES: [&str; 4] = ["y*p", "y*p/2", "y", "y*p + x"];

#[test]
fn reflexive() {
    for f in FIXTURES {
        let v = run(f, f);
        assert_eq!(v.verdict, Verdict::Equivalent, "{f}: {:?}", v.diagnostics);
        assert!(v.max_residual <= 1e-12, "{f}: {}", v.max_residual);
    }
}

#[test]
fn symmetric_and_certified() {
    for (i, a) in FIXTURES.iter().enumerate() {
        for b in &FIXTURES[i + 1..] {
            let ab = run(a, b);
            let ba = run(b, a);
            assert_eq!(ab.verdict, ba.verdict, "{a} vs {b}");
            assert!(certified(&ab) && certified(&ba), "{a} vs {b}");
        }
    }
}

#[test]
fn scaling_is_equivalent() {
    let v = run("y*p", "y*p/2");
    assert_eq!(v.verdict, Verdict::Equivalent);
    assert!(v.max_residual <= 1e-6);
    assert_eq!(v.chart, Some([1, -1]));
}

#[test]
fn vanishing_m1_is_certified() {
    let v = run("y", "y*p");
    assert_eq!(v.verdict, Verdict::NotEquivalent);
    match v.certificate {
        Some(Certificate::DisjointRange { coordinate, a, .. }) => {
            assert_eq!(coordinate, "m1");
            assert_eq!(a, [0.0, 0.0]);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn tighter_tolerance_never_flips_to_not_equivalent_without_certificate() {
    let cfg = EquivConfig {
        tau_match: 1e-14,
        ..EquivConfig::default()
    };
    let v = compare(&ode("y*p"), &grid(), &ode("y*p/2"), &grid(), &cfg).unwrap();
    assert!(certified(&v));
}
