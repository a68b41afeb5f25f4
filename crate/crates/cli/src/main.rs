use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use polargate_cli::commands::output_dir;
use polargate_cli::{run, CliError, Command, Format, ScenarioConfig};

#[derive(Parser)]
#[command(name = "polargate", version, about = "Dipolar phase-gate simulations for pairs of polar molecules")]
struct Cli {
    /// Scenario file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for the CSV and JSON outputs; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// What goes to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Interaction rate, π-phase time and operations budget.
    Estimate,
    /// Simulate the scheme and report phases, leakage and Bell fidelity.
    Gate,
    /// Blockade infidelity against V/Ω.
    BlockadeScan,
    /// Monte Carlo spread of the entangling phase over separations.
    Thermal,
    /// List the bundled molecules.
    Presets,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let command = match cli.command {
        Cmd::Estimate => Command::Estimate,
        Cmd::Gate => Command::Gate,
        Cmd::BlockadeScan => Command::BlockadeScan,
        Cmd::Thermal => Command::Thermal,
        Cmd::Presets => Command::Presets,
    };
    let scenario = match (&cli.config, command) {
        (_, Command::Presets) => None,
        (Some(path), _) => Some(ScenarioConfig::load(path)?.validate()?),
        (None, _) => return Err(CliError::Config(format!("`{}` needs --config", command.file_stem()))),
    };
    let report = run(command, scenario.as_ref(), cli.seed)?;
    if let Some(dir) = output_dir(cli.out, scenario.as_ref()) {
        report.write(&dir)?;
    }
    print!("{}", report.render(cli.format));
    for line in &report.summary {
        eprintln!("{line}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
