use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mkent_cli::{CliError, Output, EXIT_INPUT};

#[derive(Debug, Parser)]
#[command(name = "mkent", version, about = "Entanglement detection for pure multiqubit states")]
struct Cli {
    /// Pretty-print JSON with this many spaces of indentation.
    #[arg(long, global = true)]
    json_indent: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide a state file; exit 0 if entangled, 1 if product.
    Decide(mkent_cli::DecideArgs),
    /// Sweep cos φ|0…0⟩ + sin φ|1…1⟩ over a φ grid.
    GhzScan(mkent_cli::GhzScanArgs),
    /// Spectrum and optional matrix of an MK operator.
    MkOp(mkent_cli::MkOpArgs),
    /// Run the built-in regression suites.
    Selftest(mkent_cli::SelftestArgs),
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    let output = match &cli.command {
        Command::Decide(args) => mkent_cli::decide(args)?,
        Command::GhzScan(args) => mkent_cli::ghz_scan(args)?,
        Command::MkOp(args) => mkent_cli::mk_op(args)?,
        Command::Selftest(args) => mkent_cli::selftest(args)?,
    };
    mkent_cli::print(&output.document, cli.json_indent)?;
    Ok(output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => ExitCode::from(output.code),
        Err(e) => {
            eprintln!("mkent: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
