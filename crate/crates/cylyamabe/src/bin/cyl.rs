use clap::{Parser, Subcommand};
use cylyamabe::reports::{self, persist, Report, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Exit code for configuration, I/O and numerical errors.
const ERROR_EXIT: u8 = 100;

#[derive(Parser)]
#[command(name = "cyl", version, about = "Yamabe quotients, Green's functions and competitor paths on Z2-conical four-manifolds")]
struct Cli {
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (falls back to CYL_OUT_DIR, then ./cyl-out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Multiplies every quadrature tolerance
    #[arg(long = "tol-scale", global = true)]
    tol_scale: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Closed-form constants and their quadrature reproduction
    Constants,
    /// Double-bubble energy curves, derivatives and asymptotic slopes
    InteractionSweep,
    /// Green's function masses as the pole approaches the tip
    GreenSweep,
    /// Curvature left after the conformal normal coordinate change
    CncVerify,
    /// First-order identity of the link flow and the orbifold gauge
    GaugeVerify,
    /// Yamabe quotient along the five-leg path and the expansion fits
    PathProfile,
    /// All twelve acceptance criteria
    Accept,
}

fn run(cli: &Cli) -> cylyamabe::Result<(Report, RunConfig)> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(k) = cli.tol_scale {
        config.tol_scale = k;
        config.validate()?;
    }
    let report = match cli.command {
        Command::Constants => reports::cmd_constants(&config)?,
        Command::InteractionSweep => reports::cmd_interaction_sweep(&config)?,
        Command::GreenSweep => reports::cmd_green_sweep(&config)?,
        Command::CncVerify => reports::cmd_cnc_verify(&config)?,
        Command::GaugeVerify => reports::cmd_gauge_verify(&config)?,
        Command::PathProfile => reports::cmd_path_profile(&config)?,
        Command::Accept => reports::cmd_accept(&config)?,
    };
    Ok((report, config))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(ERROR_EXIT);
        }
    }
    let (report, config) = match run(&cli) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(ERROR_EXIT);
        }
    };
    print!("{}", report.summary());
    let dir = config.resolve_out_dir(cli.out.as_deref());
    match persist(&report, &config, &dir) {
        Ok(files) => println!("wrote {} files to {}", files.len(), dir.display()),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(ERROR_EXIT);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}
