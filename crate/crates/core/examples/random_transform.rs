//! Pushes y'' = y y' through a random projective map near the identity and
//! checks that the two equations are recognized as equivalent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use jetinv::equiv::{compare, EquivConfig};
use jetinv::expr::{parse, Rational};
use jetinv::jets::Section;
use jetinv::numeric::{Evaluator, Grid, DEFAULT_TAU_SING};
use jetinv::sl3::ProjectiveMap;

fn main() {
    let grid = Grid::new([[1.0, 2.0]; 3], [10, 10, 10]);
    let f = parse("y*p").unwrap();
    let eps = Rational::new(1.into(), 4.into());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let m = ProjectiveMap::random_near_identity(&mut rng, &eps, &grid.bounds, 0.25);
    let g = m.pushforward_ode(&f).unwrap();
    println!("transformed equation: y'' = {g}");
    let a = Evaluator::new(&Section::pitilde(f), DEFAULT_TAU_SING).unwrap();
    let b = Evaluator::new(&Section::pitilde(g), DEFAULT_TAU_SING).unwrap();
    let image = Grid::new(m.image_bounds(&grid.points()).unwrap(), grid.counts);
    let v = compare(&a, &grid, &b, &image, &EquivConfig::default()).unwrap();
    println!("{:?}, max residual {:.2e}", v.verdict, v.max_residual);
}
