use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use optomech_cli::{parse_config, run_command, CliError, Command, Overrides};
use optomech_core::Port;

#[derive(Parser)]
#[command(name = "optomech", version, about = "Optomechanical cavity noise modelling")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Run configuration file.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Directory for output files.
    #[arg(long, short, global = true, default_value = "out")]
    out: PathBuf,

    /// Override `[mc] seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override `[readout] port`.
    #[arg(long, global = true, value_enum)]
    port: Option<PortArg>,

    /// Override `[readout] angle_deg`.
    #[arg(long, global = true, allow_negative_numbers = true)]
    angle_deg: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Finesse, linewidth, circulating power and optical spring.
    Statics,
    /// Displacement-referred noise budget at the configured readout.
    Budget,
    /// Quantum and thermal noise versus readout quadrature angle.
    SweepAngle,
    /// Infer circulating power and loss from a measured spring frequency.
    Calibrate,
    /// Monte Carlo cross-spectrum of a split detection with feedback.
    McCsd,
    /// Transmission versus reflection readout noise totals.
    Compare,
    /// Print the parsed configuration in canonical form.
    ShowConfig,
}

#[derive(ValueEnum, Clone, Copy)]
enum PortArg {
    Reflection,
    Transmission,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Statics => Command::Statics,
            Cmd::Budget => Command::Budget,
            Cmd::SweepAngle => Command::SweepAngle,
            Cmd::Calibrate => Command::Calibrate,
            Cmd::McCsd => Command::McCsd,
            Cmd::Compare => Command::Compare,
            Cmd::ShowConfig => Command::ShowConfig,
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Validation("--config <FILE> is required".into()))?;
    let cfg = parse_config(path)?;
    let overrides = Overrides {
        port: cli.port.map(|p| match p {
            PortArg::Reflection => Port::ReflectedB,
            PortArg::Transmission => Port::TransmittedD,
        }),
        angle_deg: cli.angle_deg,
        seed: cli.seed,
    };
    let report = run_command(cli.command.into(), &cfg, &cli.out, &overrides)?;
    print!("{}", report.text);
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(e.exit_code())
        }
    }
}
