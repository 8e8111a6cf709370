mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mcf_solitons::report::{to_json_pretty, SCHEMA_VERSION};
use serde_json::json;

use commands::Output;
use error::{CliError, CliResult, EXIT_CONFIG, EXIT_OK, EXIT_VERIFICATION};

/// Mean curvature flow solitons in warped products.
#[derive(Parser, Debug)]
#[command(name = "mcf-solitons", version)]
struct Cli {
    /// TOML file with one table per command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for `report.json` and CSV tables.
    #[arg(long, global = true, env = "MCF_SOLITONS_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Slice solitons: roots of the soliton function in a bracket.
    Leaves(commands::LeavesArgs),
    /// Mean curvature flow of a slice.
    Flow(commands::FlowArgs),
    /// Shoot a rotational soliton profile in Euclidean space.
    Shoot(commands::ShootArgs),
    /// Solve the translator graph equation by Newton's method.
    Translate(commands::TranslateArgs),
    /// Run an identity suite.
    Verify(commands::VerifyArgs),
    /// Lowest eigenpairs of the stability operator.
    Spectrum(commands::SpectrumArgs),
}

fn dispatch(cli: &Cli) -> CliResult<(&'static str, Output)> {
    let file = cli.config.as_deref().map(config::load).transpose()?;
    let file = file.as_ref();
    Ok(match &cli.command {
        Command::Leaves(a) => ("leaves", commands::leaves(&config::merge(file, "leaves", a)?)?),
        Command::Flow(a) => ("flow", commands::flow(&config::merge(file, "flow", a)?)?),
        Command::Shoot(a) => ("shoot", commands::shoot_profile(&config::merge(file, "shoot", a)?)?),
        Command::Translate(a) => ("translate", commands::translate(&config::merge(file, "translate", a)?)?),
        Command::Verify(a) => ("verify", commands::verify(&config::merge(file, "verify", a)?)?),
        Command::Spectrum(a) => ("spectrum", commands::spectrum(&config::merge(file, "spectrum", a)?)?),
    })
}

fn run(cli: &Cli) -> CliResult<u8> {
    let (name, out) = dispatch(cli)?;
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": name,
        "config": out.config,
        "result": out.result,
    });
    let text = to_json_pretty(&report);
    println!("{text}");
    if let Some(dir) = &cli.out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), format!("{text}\n"))?;
        for (file, csv) in &out.tables {
            std::fs::write(dir.join(file), csv)?;
        }
    }
    match out.failure {
        Some(msg) => {
            eprintln!("{}", CliError::Verification(msg).record());
            Ok(EXIT_VERIFICATION)
        }
        None => Ok(EXIT_OK),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", CliError::config(e.to_string().trim_end()).record());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code())
        }
    }
}
