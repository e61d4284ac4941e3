use std::process::exit;

use clap::Parser;

use ioshock_cli::config::{
    load_file_config, ReportConfig, SimulateConfig, StatsConfig,
};
use ioshock_cli::{
    cmd_report, cmd_simulate, cmd_stats, cmd_validate, Cli, CliError, Command, EXIT_DATA,
};

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    exit(code);
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let file = load_file_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Validate(args) => {
            let inputs = if args.inputs.is_empty() {
                file.inputs.clone().unwrap_or_default()
            } else {
                args.inputs.clone()
            };
            if inputs.is_empty() {
                return Err(CliError::Config("no input tables given".to_string()));
            }
            let results = cmd_validate(&inputs);
            let mut all_ok = true;
            for v in &results {
                match &v.result {
                    Ok(ok) => println!(
                        "{}: ok (country={}, sectors={}, max residual={:e})",
                        v.path.display(),
                        ok.country,
                        ok.sectors,
                        ok.max_residual
                    ),
                    Err(e) => {
                        all_ok = false;
                        println!("{}: FAIL {e}", v.path.display());
                    }
                }
            }
            Ok(if all_ok { 0 } else { EXIT_DATA })
        }
        Command::Stats(args) => {
            let config = StatsConfig::resolve(args, &file)?;
            let outcome = cmd_stats(&config)?;
            println!(
                "wrote statistics for {} countries under {}",
                outcome.countries.len(),
                config.out.display()
            );
            Ok(0)
        }
        Command::Simulate(args) => {
            let config = SimulateConfig::resolve(args, &file)?;
            let outcome = cmd_simulate(&config)?;
            for (who, error) in &outcome.failures {
                eprintln!("{who}: {error}");
            }
            println!(
                "simulated {} countries x {} parameter points under {} ({} cross-country exports)",
                outcome.succeeded.len(),
                config.specs.len(),
                config.out.display(),
                outcome.cross_country_written
            );
            Ok(outcome
                .failures
                .first()
                .map(|(_, e)| e.exit_code())
                .unwrap_or(0))
        }
        Command::Report(args) => {
            let config = ReportConfig::resolve(args, &file)?;
            let outcome = cmd_report(&config)?;
            println!(
                "aggregated {} report files into {} parameter groups under {}",
                outcome.report_files,
                outcome.groups,
                config.out.display()
            );
            Ok(0)
        }
    }
}
