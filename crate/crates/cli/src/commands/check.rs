use crate::error::{CliError, CliResult};
use crate::output::{num, OutputDir};
use crate::suites::{run_suite, Suite, SuiteOptions};
use crate::{Format, Shared};
use clap::Args;
use fermicorr::report::format_sig;
use serde::Serialize;
use serde_json::json;

#[derive(Debug, Clone, Args, Serialize)]
pub struct CheckArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Generated cases (default depends on the suite).
    #[arg(long)]
    pub samples: Option<usize>,
}

pub fn run(shared: &Shared, args: &CheckArgs) -> CliResult<()> {
    let opts = SuiteOptions {
        seed: shared.seed,
        samples: args.samples,
    };
    let report = run_suite(args.suite, opts)?;
    let mut out = OutputDir::create(&shared.out)?;
    let properties: Vec<_> = report
        .properties
        .iter()
        .map(|p| {
            json!({
                "name": p.name,
                "quantity": p.quantity,
                "tolerance": num(p.tolerance),
                "worst": num(p.worst),
                "cases": p.cases,
                "passed": p.passed,
            })
        })
        .collect();
    match shared.format.unwrap_or(Format::Json) {
        Format::Json => out.write_json(
            "check.json",
            &json!({
                "suite": report.suite,
                "seed": report.seed,
                "passed": report.passed(),
                "properties": properties,
            }),
        )?,
        Format::Csv => {
            let mut csv = String::from("property,quantity,tolerance,worst,cases,passed\n");
            for p in &report.properties {
                csv.push_str(&format!(
                    "\"{}\",\"{}\",{},{},{},{}\n",
                    p.name,
                    p.quantity,
                    format_sig(p.tolerance),
                    format_sig(p.worst),
                    p.cases,
                    p.passed
                ));
            }
            out.write("check.csv", &csv)?
        }
    };
    for p in &report.properties {
        println!(
            "{} {}: worst {} = {} (tolerance {}, {} cases)",
            if p.passed { "PASS" } else { "FAIL" },
            p.name,
            p.quantity,
            format_sig(p.worst),
            format_sig(p.tolerance),
            p.cases
        );
    }
    let config = json!({ "shared": shared, "args": args, "suite_options": opts });
    out.finish("check", config, shared.seed)?;
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .properties
            .iter()
            .filter(|p| !p.passed)
            .map(|p| p.name.as_str())
            .collect();
        Err(CliError::SuiteFailed(format!("failed properties: {}", failed.join("; "))))
    }
}
