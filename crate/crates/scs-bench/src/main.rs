use clap::Parser;

use scs_bench::compare::execute_compare;
use scs_bench::config::{resolve, Cli, Command};
use scs_bench::runner::{execute_run, RunError};
use scs_bench::suites::run_suites;

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run(args) => run(&args),
        Command::Compare(args) => {
            match execute_compare(&args.files, &args.out, args.threshold) {
                Ok(report) => {
                    println!(
                        "compared {} runs over {} steps -> {}{}",
                        args.files.len(),
                        report.rows,
                        args.out.display(),
                        if report.truncated { " (truncated to shortest)" } else { "" }
                    );
                    0
                }
                Err(e) => fail(e),
            }
        }
        Command::Verify(args) => match run_suites(&args.suite) {
            Ok(outcomes) => {
                let mut failed = 0;
                for o in &outcomes {
                    println!("{}", o.line);
                }
                for o in &outcomes {
                    println!("{} {}", if o.pass { "PASS" } else { "FAIL" }, o.name);
                    if !o.pass {
                        failed += 1;
                    }
                }
                if failed > 0 {
                    eprintln!("{failed} suite(s) failed");
                    1
                } else {
                    0
                }
            }
            Err(e) => fail(e),
        },
    };
    std::process::exit(code);
}

fn run(args: &scs_bench::config::RunArgs) -> i32 {
    let cfg = match resolve(args) {
        Ok(cfg) => cfg,
        Err(e) => return fail(RunError::Config(e.0)),
    };
    match execute_run(&cfg) {
        Ok(report) => {
            println!(
                "{} on {}: {} steps, final loss {} ({}) -> {}",
                cfg.optimizer.name(),
                cfg.problem,
                report.outcome.steps,
                report.outcome.final_loss,
                report.outcome.stop.name(),
                cfg.out.display()
            );
            0
        }
        Err(e) => fail(e),
    }
}

fn fail(e: RunError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}
