//! Compares y'' = y y' with a rescaled copy and with y'' = y.

use jetinv::equiv::{compare, EquivConfig};
use jetinv::expr::parse;
use jetinv::jets::Section;
use jetinv::numeric::{Evaluator, Grid, DEFAULT_TAU_SING};

fn ode(f: &str) -> Evaluator {
    Evaluator::new(&Section::pitilde(parse(f).unwrap()), DEFAULT_TAU_SING).unwrap()
}

fn main() {
    let grid = Grid::new([[1.0, 2.0]; 3], [10, 10, 10]);
    for (a, b) in [("y*p", "y*p/2"), ("y", "y*p")] {
        let v = compare(&ode(a), &grid, &ode(b), &grid, &EquivConfig::default()).unwrap();
        println!("{a} vs {b}: {}", serde_json::to_string_pretty(&v).unwrap());
    }
}
