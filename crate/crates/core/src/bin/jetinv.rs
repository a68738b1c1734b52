use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use jetinv::cli::{cmd_equiv, cmd_reduce, cmd_signature, cmd_verify, CliError, Job, ReduceInput, EXIT_INPUT};
use jetinv::numeric::with_pool;
use jetinv::verify::Suite;

#[derive(Parser)]
#[command(name = "jetinv", version, about = "Projective differential invariants of curve families and second-order ODEs")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run symbolic identity suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        /// Print the checks as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Sample the signature of a job into a JSON-lines file.
    Signature {
        job: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide whether two jobs have the same signature.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Reduce a cubic equation to the π̃ job of its third root.
    Reduce { input: PathBuf },
}

fn run(args: Args) -> Result<i32, CliError> {
    match args.command {
        Command::Verify { suite, json } => {
            let checks = cmd_verify(suite);
            if json {
                println!("{}", serde_json::to_string_pretty(&checks).expect("checks serialize"));
            } else {
                for c in &checks {
                    let mark = if c.passed { "pass" } else { "FAIL" };
                    println!("{mark} [{}] {} ({}; {:.2}s)", c.suite, c.name, c.detail, c.seconds);
                }
                let passed = checks.iter().filter(|c| c.passed).count();
                println!("{passed}/{} passed", checks.len());
            }
            Ok(if checks.iter().all(|c| c.passed) { 0 } else { 1 })
        }
        Command::Signature { job, output } => {
            let job = Job::load(&job)?;
            let path = output
                .or_else(|| job.output.as_ref().map(PathBuf::from))
                .ok_or_else(|| CliError::Invalid("no output path".into()))?;
            let io = |source| CliError::Io {
                path: path.display().to_string(),
                source,
            };
            let mut out = BufWriter::new(File::create(&path).map_err(io)?);
            let summary = cmd_signature(&job, &mut out)?;
            out.flush().map_err(io)?;
            eprintln!(
                "{} of {} points regular ({:.1}%); coordinates {}",
                summary.samples,
                summary.attempted,
                100.0 * summary.regular_fraction,
                summary.names.join(", ")
            );
            for (factor, n) in &summary.rejected {
                eprintln!("  rejected {n}: {factor}");
            }
            Ok(0)
        }
        Command::Equiv { a, b, tol } => {
            let v = cmd_equiv(&Job::load(&a)?, &Job::load(&b)?, tol)?;
            println!("{}", serde_json::to_string_pretty(&v).expect("verdict serializes"));
            Ok(v.verdict.exit_code())
        }
        Command::Reduce { input } => {
            let report = cmd_reduce(&ReduceInput::load(&input)?)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            if !report.normalized {
                return Err(CliError::NotNormalized(report.associated.g));
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match with_pool(move || run(args)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    };
    ExitCode::from(code as u8)
}
