//! Reduces a cubic equation with two known root integrals to its third root.

use jetinv::cli::{cmd_reduce, ReduceInput};

fn main() {
    let input: ReduceInput = serde_json::from_str(
        r#"{
            "lambda": ["0", "1/2", "y*p"],
            "a": ["p", "p - x/2"],
            "b": ["p*x - y - p^2", "y - p*x + x^2/4"],
            "h": "a2^2 - 2*a1*a2 - b1"
        }"#,
    )
    .unwrap();
    let report = cmd_reduce(&input).unwrap();
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
}
