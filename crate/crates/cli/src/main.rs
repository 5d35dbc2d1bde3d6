use std::process::ExitCode;

use articugeo_cli::args::{Args, UsageError};
use articugeo_cli::commands::{calibrate, losses, metrics, render};
use articugeo_cli::{exit_code_for, verify};

const USAGE: &str = "\
articugeo - geometric-consistency engine for articulated two-segment camera rigs

Usage:
  articugeo render    --scene F --rig F --traj F --out DIR [--seed N]
                      [--prior-scale S] [--prior-noise-deg D]
                      [--lidar none|first|all] [--lidar-noise SIGMA]
  articugeo losses    --manifest F [--weights F] [--cv-types 0,1,2]
                      [--skip TERM,..] [--depth-scale S] [--depth-kind K]
                      [--normal-route direct|via-depth]
                      [--ground-mask prior|estimate] [--cross F]
                      [--motions F] [--out F]
  articugeo calibrate --source F.ply --target F.ply [--out F] [--init F]
                      [--max-iter N] [--eps E] [--max-dist D]
  articugeo metrics   --pred MANIFEST --gt MANIFEST [--pred-kind K] [--gt-kind K]
                      [--max-depth M] [--median-scale] [--out F]
  articugeo verify    SUITE [--seed N] [--tol NAME=VALUE]... [--list-tols]

Verify suites: geometry context warp normals ground pose icp metrics
               gradcheck closure all

Environment: ARTICUGEO_THREADS caps render parallelism.
Exit codes: 0 success, 1 usage, 2 I/O or parse error, 3 numerical failure.
";

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = raw.first().cloned() else {
        eprint!("{USAGE}");
        return ExitCode::from(1);
    };
    match dispatch(&command, &raw[1..]) {
        Ok(code) => code,
        Err(DispatchError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            eprint!("{USAGE}");
            ExitCode::from(1)
        }
        Err(DispatchError::Run(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err) as u8)
        }
    }
}

enum DispatchError {
    Usage(String),
    Run(articugeo_core::Error),
}

impl From<UsageError> for DispatchError {
    fn from(e: UsageError) -> Self {
        DispatchError::Usage(e.0)
    }
}

impl From<articugeo_core::Error> for DispatchError {
    fn from(e: articugeo_core::Error) -> Self {
        DispatchError::Run(e)
    }
}

fn dispatch(command: &str, rest: &[String]) -> Result<ExitCode, DispatchError> {
    match command {
        "render" => {
            let args = Args::parse(rest, &[])?;
            let params = render::RenderParams::from_args(&args)?;
            let manifest = render::run(&params)?;
            println!("wrote {}", manifest.display());
            Ok(ExitCode::SUCCESS)
        }
        "losses" => {
            let args = Args::parse(rest, &[])?;
            let params = losses::LossParams::from_args(&args)?;
            let report = losses::run(&params)?;
            for term in &report.terms {
                println!("{} {:.17e} {}", term.key, term.value, term.count);
            }
            println!("total {:.17e}", report.total);
            if let Some(out) = &params.out {
                eprintln!("wrote {}", out.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        "calibrate" => {
            let args = Args::parse(rest, &[])?;
            let params = calibrate::CalibrateParams::from_args(&args)?;
            let result = calibrate::run(&params)?;
            let m = result.transform.to_matrix4();
            println!(
                "transform {}",
                m.iter()
                    .map(|v| format!("{v:.9}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            println!("rms_residual {:.6e}", result.rms_residual);
            println!("iterations {}", result.iterations);
            println!("correspondences {}", result.correspondences);
            Ok(ExitCode::SUCCESS)
        }
        "metrics" => {
            let args = Args::parse(rest, &["median-scale"])?;
            let params = metrics::MetricsParams::from_args(&args)?;
            let report = metrics::run(&params)?;
            for (k, v) in report.entries() {
                println!("{k} {v:.6}");
            }
            Ok(ExitCode::SUCCESS)
        }
        "verify" => {
            let args = Args::parse(rest, &["list-tols"])?;
            let mut tols = verify::Tolerances::default();
            if args.has("list-tols") {
                for (name, value) in tols.names() {
                    println!("{name} {value:e}");
                }
                return Ok(ExitCode::SUCCESS);
            }
            for spec in args.get_all("tol") {
                let (name, value) = spec.split_once('=').ok_or_else(|| {
                    DispatchError::Usage(format!("--tol expects NAME=VALUE, got `{spec}`"))
                })?;
                let value: f64 = value.parse().map_err(|_| {
                    DispatchError::Usage(format!("--tol {name}: bad number `{value}`"))
                })?;
                tols.set(name, value)?;
            }
            let suite = args
                .positionals
                .first()
                .ok_or_else(|| DispatchError::Usage("verify needs a suite name".into()))?;
            if !verify::SUITES.contains(&suite.as_str()) {
                return Err(DispatchError::Usage(format!(
                    "unknown suite `{suite}`; known: {}",
                    verify::SUITES.join(" ")
                )));
            }
            let seed = args.parse_u64("seed", 1)?;
            let results = verify::run_suite(suite, &tols, seed)?;
            let mut all_passed = true;
            for r in &results {
                all_passed &= r.passed;
                println!(
                    "[{}] {:48} worst={:<12.4e} tol={:<10.1e} {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.worst,
                    r.tolerance,
                    r.detail
                );
            }
            println!(
                "{}: {} checks, {} failed",
                suite,
                results.len(),
                results.iter().filter(|r| !r.passed).count()
            );
            if all_passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }
        other => Err(DispatchError::Usage(format!("unknown command `{other}`"))),
    }
}
