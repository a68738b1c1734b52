use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn jetinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetinv"))
        .args(args)
        .env("JETINV_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("jetinv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, text: &str) -> PathBuf {
    let path = scratch(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn ode_job(name: &str, f: &str) -> PathBuf {
    write(
        name,
        &format!(r#"{{"bundle": "pitilde", "f": "{f}", "box": [[1,2],[1,2],[1,2]], "grid": [10,10,10]}}"#),
    )
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn signature_writes_json_lines() {
    let job = ode_job("sig.json", "y*p");
    let out = scratch("sig.jsonl");
    let o = jetinv(&["signature", arg(&job), "-o", arg(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1000);
    let line: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(line["signs"], serde_json::json!([1, -1]));
    assert_eq!(line["coords"].as_array().unwrap().len(), 10);
    assert!(String::from_utf8_lossy(&o.stderr).contains("1000 of 1000"));
}

#[test]
fn signature_without_regular_points_is_an_input_error() {
    let job = ode_job("const.json", "1");
    let o = jetinv(&["signature", arg(&job), "-o", arg(&scratch("const.jsonl"))]);
    assert_eq!(o.status.code(), Some(3));
    let job = write(
        "flat.json",
        r#"{"bundle": "pi", "f": "1", "g": "p + x", "box": [[1,2],[1,2],[1,2]], "grid": [4,4,4]}"#,
    );
    let o = jetinv(&["signature", arg(&job), "-o", arg(&scratch("flat.jsonl"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no regular points"));
}

#[test]
fn equiv_exit_codes() {
    let a = ode_job("a.json", "y*p");
    let b = ode_job("b.json", "y*p/2");
    let c = ode_job("c.json", "y");
    let o = jetinv(&["equiv", arg(&a), arg(&b)]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "equivalent");
    let o = jetinv(&["equiv", arg(&c), arg(&a)]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["certificate"]["kind"], "disjoint-range");
    assert_eq!(v["certificate"]["coordinate"], "m1");
}

#[test]
fn equiv_inconclusive_on_small_grids() {
    let a = write(
        "small.json",
        r#"{"bundle": "pitilde", "f": "y*p", "box": [[1,2],[1,2],[1,2]], "grid": [3,3,3]}"#,
    );
    let o = jetinv(&["equiv", arg(&a), arg(&a)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_input_is_exit_three() {
    let bad = write("bad.json", r#"{"bundle": "pitilde", "f": "y*p"}"#);
    assert_eq!(jetinv(&["equiv", arg(&bad), arg(&bad)]).status.code(), Some(3));
    let syntax = ode_job("syntax.json", "y*(p");
    assert_eq!(jetinv(&["equiv", arg(&syntax), arg(&syntax)]).status.code(), Some(3));
    assert_eq!(jetinv(&["equiv", "/nonexistent.json", "/nonexistent.json"]).status.code(), Some(3));
}

#[test]
fn verify_suite_reports() {
    let o = jetinv(&["verify", "--suite", "commutators"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("6/6 passed"), "{text}");
    let o = jetinv(&["verify", "--suite", "syzygies", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let checks: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(checks.as_array().unwrap().len(), 6);
}

const REDUCE: &str = r#"{
    "lambda": ["0", "1/2", "y*p"],
    "a": ["p", "p - x/2"],
    "b": ["p*x - y - p^2", "y - p*x + x^2/4"],
    "h": "H"
}"#;

#[test]
fn reduce_emits_third_root_job() {
    let input = write("reduce.json", &REDUCE.replace('H', "a2^2 - 2*a1*a2 - b1"));
    let o = jetinv(&["reduce", arg(&input)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["normalized"], true);
    assert_eq!(r["job"]["bundle"], "pitilde");
}

#[test]
fn reduce_stops_when_not_normalized() {
    let input = write(
        "parabolas.json",
        r#"{
            "lambda": ["0", "1", "y"],
            "a": ["y - p*x", "p - x"],
            "b": ["p", "y - p*x + x^2/2"],
            "h": "a1 + (b1 - a2)^2/2"
        }"#,
    );
    let o = jetinv(&["reduce", arg(&input)]);
    assert_eq!(o.status.code(), Some(3));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["associated"]["g"], "c^3");
    assert!(String::from_utf8_lossy(&o.stderr).contains("normaliz"));
}

#[test]
fn reduce_rejects_equal_roots() {
    let input = write("equal.json", &REDUCE.replace('H', "a2^2 - 2*a1*a2 - b1").replace("y*p", "0"));
    let o = jetinv(&["reduce", arg(&input)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("coincide"));
}
