//! Samples the signature of y'' = y y' on a small grid.

use jetinv::expr::parse;
use jetinv::jets::Section;
use jetinv::numeric::{sample_signature, Evaluator, Grid, DEFAULT_TAU_SING};

fn main() {
    let ev = Evaluator::new(&Section::pitilde(parse("y*p").unwrap()), DEFAULT_TAU_SING).unwrap();
    let set = sample_signature(&ev, &Grid::new([[1.0, 2.0]; 3], [4, 4, 4]));
    println!("coordinates: {}", set.names.join(", "));
    println!("regular fraction: {:.3}", set.regular_fraction());
    for s in set.samples.iter().take(3) {
        let coords: Vec<String> = s.coords.iter().map(|c| format!("{c:.4}")).collect();
        println!("{:?} -> [{}]", s.base, coords.join(", "));
    }
}
