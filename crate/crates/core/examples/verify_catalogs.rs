//! Runs the symbolic commutator and derivation checks and prints each result.

use jetinv::verify::{run_suite, Suite};

fn main() {
    for suite in [Suite::Commutators, Suite::Derivations] {
        for c in run_suite(suite) {
            let mark = if c.passed { "pass" } else { "FAIL" };
            println!("{mark} [{}] {} ({:.2}s)", c.suite, c.name, c.seconds);
        }
    }
}
