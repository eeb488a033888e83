//! `gwp`: render Gaussian Wave Packets, compute their localization metrics,
//! run directional wavelet transforms and the verification suite.
//!
//! Exit status: 0 success, 1 failed verification or I/O error, 2 invalid
//! configuration, 3 numerical non-convergence.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Failure;
use crate::config::{merge, read_config_file, Entries};

#[derive(Parser, Debug)]
#[command(name = "gwp", version, about = "Gaussian Wave Packet wavelets")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command. Each maps onto a config key and overrides it.
#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// key=value config file (e.g. packet.p=0.5, grid.nx=256).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory [io.out].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<String>,
    /// Packet parameter p [packet.p].
    #[arg(long = "p", global = true, allow_hyphen_values = true)]
    p: Option<String>,
    /// Order ν [packet.nu].
    #[arg(long, global = true, allow_hyphen_values = true)]
    nu: Option<String>,
    /// Longitudinal length γ [packet.gamma].
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// Transverse lengths ε, comma list for n > 2 [packet.eps].
    #[arg(long, global = true, allow_hyphen_values = true)]
    eps: Option<String>,
    /// Wave speed [packet.c].
    #[arg(long = "c", global = true, allow_hyphen_values = true)]
    c: Option<String>,
    /// Time [packet.t].
    #[arg(long = "t", global = true, allow_hyphen_values = true)]
    t: Option<String>,
    /// Spatial dimension [packet.dim].
    #[arg(long, global = true)]
    dim: Option<String>,
    /// Grid points along x [grid.nx].
    #[arg(long, global = true)]
    nx: Option<String>,
    /// Grid points along y [grid.ny].
    #[arg(long, global = true)]
    ny: Option<String>,
    /// Half-width of the window, one value or "x,y" [grid.extent]; default ±6σ.
    #[arg(long, global = true)]
    extent: Option<String>,
    /// Also write 8-bit PGM images of |field| [io.pgm].
    #[arg(long, global = true)]
    pgm: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the packet and its spectrum on grids (position.csv, spectrum.csv).
    Render,
    /// Centers, widths, uncertainty products and resolving powers (metrics.csv).
    Metrics,
    /// Metrics along a curve family for a list of √p (sweep.csv).
    Sweep(SweepArgs),
    /// Directional continuous wavelet transform.
    Cwt {
        #[command(subcommand)]
        action: CwtAction,
    },
    /// Run the acceptance criteria; exits 1 if any fails.
    Verify(VerifyArgs),
    /// Retarded/advanced point-source fields and the composite pulse.
    Sources(SourcesArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Curve family [sweep.mode].
    #[arg(long, value_parser = ["eps-over-gamma", "kappa-eps"])]
    mode: Option<String>,
    /// Family values, fractions allowed (e.g. 1/3,2/3,2) [sweep.values].
    #[arg(long)]
    values: Option<String>,
    /// √p samples [sweep.sqrt_p].
    #[arg(long = "sqrt-p")]
    sqrt_p: Option<String>,
}

#[derive(Subcommand, Debug)]
enum CwtAction {
    /// Transform an image and write the energy per scale and angle (cwt_energy.csv).
    Analyze(CwtArgs),
    /// Transform and reconstruct; exits 1 if the error exceeds tol.roundtrip.
    Roundtrip(CwtArgs),
}

#[derive(Args, Debug)]
struct CwtArgs {
    /// Number of log-spaced scales [cwt.scales].
    #[arg(long)]
    scales: Option<String>,
    /// Smallest scale [cwt.scale_min]; default keeps the wavelet below Nyquist.
    #[arg(long = "scale-min")]
    scale_min: Option<String>,
    /// Largest scale [cwt.scale_max]; default puts the peak at two grid fundamentals.
    #[arg(long = "scale-max")]
    scale_max: Option<String>,
    /// Number of uniformly spaced angles [cwt.angles].
    #[arg(long)]
    angles: Option<String>,
    /// Input CSV grid with columns x,y,re[,im[,abs]]; default is a synthetic test image [cwt.input].
    #[arg(long, value_name = "PATH")]
    input: Option<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Comma list of criterion numbers to run (default: all).
    #[arg(long)]
    only: Option<String>,
}

#[derive(Args, Debug)]
struct SourcesArgs {
    /// Source frequency q [sources.q].
    #[arg(long)]
    q: Option<String>,
}

fn push(entries: &mut Entries, key: &str, value: &Option<String>) {
    if let Some(v) = value {
        entries.push((key.to_string(), v.clone()));
    }
}

fn flag_entries(cli: &Cli) -> Entries {
    let c = &cli.common;
    let mut e = Entries::new();
    push(&mut e, "io.out", &c.out);
    push(&mut e, "packet.p", &c.p);
    push(&mut e, "packet.nu", &c.nu);
    push(&mut e, "packet.gamma", &c.gamma);
    push(&mut e, "packet.eps", &c.eps);
    push(&mut e, "packet.c", &c.c);
    push(&mut e, "packet.t", &c.t);
    push(&mut e, "packet.dim", &c.dim);
    push(&mut e, "grid.nx", &c.nx);
    push(&mut e, "grid.ny", &c.ny);
    push(&mut e, "grid.extent", &c.extent);
    if c.pgm {
        e.push(("io.pgm".into(), "true".into()));
    }
    match &cli.command {
        Command::Sweep(s) => {
            push(&mut e, "sweep.mode", &s.mode);
            push(&mut e, "sweep.values", &s.values);
            push(&mut e, "sweep.sqrt_p", &s.sqrt_p);
        }
        Command::Cwt { action } => {
            let (CwtAction::Analyze(a) | CwtAction::Roundtrip(a)) = action;
            push(&mut e, "cwt.scales", &a.scales);
            push(&mut e, "cwt.scale_min", &a.scale_min);
            push(&mut e, "cwt.scale_max", &a.scale_max);
            push(&mut e, "cwt.angles", &a.angles);
            push(&mut e, "cwt.input", &a.input);
        }
        Command::Sources(s) => push(&mut e, "sources.q", &s.q),
        Command::Render | Command::Metrics | Command::Verify(_) => {}
    }
    e
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let file = match &cli.common.config {
        Some(path) => read_config_file(path)?,
        None => Entries::new(),
    };
    let is_cwt = matches!(cli.command, Command::Cwt { .. });
    let map = merge(is_cwt, &file, &flag_entries(cli));
    let cfg = config::RunConfig::from_map(&map)?;
    match &cli.command {
        Command::Render => commands::render(&cfg),
        Command::Metrics => commands::metrics(&cfg),
        Command::Sweep(_) => commands::sweep(&cfg),
        Command::Cwt {
            action: CwtAction::Analyze(_),
        } => commands::cwt_analyze(&cfg),
        Command::Cwt {
            action: CwtAction::Roundtrip(_),
        } => commands::cwt_roundtrip(&cfg),
        Command::Verify(v) => commands::verify(v.only.as_deref()),
        Command::Sources(_) => commands::sources(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("gwp: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
