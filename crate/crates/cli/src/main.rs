use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phasequant_cli::{commands, figures, CliError, Format, RunConfig, Sink};

#[derive(Parser, Debug)]
#[command(name = "phasequant", version, about = "Emit figure data for truncated-observable quantization")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Reserved; every command is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Portrait of the indicator per sigma_p.
    Chi,
    /// Truncated potential per q0 and inverse mass per sigma_p.
    Mass,
    /// Semi-classical effective potential.
    Veff,
    /// Level sets, vector field and closed-contour table.
    Phase,
    /// Integrated trajectories.
    Traj,
    /// Level sets in the (q, qdot) plane.
    Qqdot,
    /// Grid Hamiltonian spectra under refinement.
    Spectrum,
    /// Window operator in the number basis.
    Fock,
    /// Every figure family with shape checks.
    ReproduceAll,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let written = match cli.command {
        Command::ReproduceAll => {
            let m = figures::reproduce_all(&cfg, &cli.out, cli.format)?;
            for c in &m.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("{} figures in {:.1} s", m.figures.len(), m.seconds);
            if !m.all_pass() {
                let names: Vec<&str> = m.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
                return Err(CliError::Checks(names.join(", ")));
            }
            return Ok(());
        }
        cmd => {
            let sink = Sink::new(&cli.out, cli.format)?;
            let (f, stem): (fn(&RunConfig, &Sink, &str) -> phasequant_cli::Result<Vec<PathBuf>>, &str) = match cmd {
                Command::Chi => (commands::cmd_chi, "chi"),
                Command::Mass => (commands::cmd_mass, "mass"),
                Command::Veff => (commands::cmd_veff, "veff"),
                Command::Phase => (commands::cmd_phase, "phase"),
                Command::Traj => (commands::cmd_traj, "traj"),
                Command::Qqdot => (commands::cmd_qqdot, "qqdot"),
                Command::Spectrum => (commands::cmd_spectrum, "spectrum"),
                Command::Fock => (commands::cmd_fock, "fock"),
                Command::ReproduceAll => unreachable!(),
            };
            f(&cfg, &sink, stem)?
        }
    };
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
