//! `losr`: monotones, membership verdicts and sweeps on bipartite
//! no-signaling resources.

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Decide and quantify LOSR nonclassicality of bipartite resources.
#[derive(Parser, Debug)]
#[command(name = "losr", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

/// Options shared by every solving subcommand.
#[derive(clap::Args, Debug, Clone, Copy)]
pub struct SolveOpts {
    /// Symmetric-extension level when no exact model applies.
    #[arg(long)]
    pub level: Option<usize>,
    /// Solver tolerance.
    #[arg(long, default_value_t = losr_core::solver::DEFAULT_TOL)]
    pub tol: f64,
    /// Add partial-transpose cuts to extension models.
    #[arg(long)]
    pub ppt_cuts: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// M_abs of the singlet, the distributed Bell measurement, the XZY and
    /// XZ assemblages and the Tsirelson box.
    Examples {
        #[command(flatten)]
        opts: SolveOpts,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Evaluates one monotone on a resource file and writes its certificate.
    Monotone {
        file: std::path::PathBuf,
        /// abs, variant, gen or weight.
        name: String,
        #[command(flatten)]
        opts: SolveOpts,
        /// Certificate output path; defaults to `<stem>.<name>.cert.json`.
        #[arg(long)]
        certificate: Option<std::path::PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Decides whether a resource is free.
    Membership {
        file: std::path::PathBuf,
        #[command(flatten)]
        opts: SolveOpts,
        /// Certificate output path; defaults to `<stem>.membership.json`.
        #[arg(long)]
        certificate: Option<std::path::PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Monotones along `cos α |01⟩ − sin α |10⟩` for α on a uniform grid of
    /// [0, π/4].
    Sweep {
        #[arg(long, default_value_t = 11)]
        grid: usize,
        #[arg(long, default_value_t = losr_core::solver::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Writes a built-in resource as JSON.
    Export {
        #[arg(value_enum)]
        resource: commands::Builtin,
        /// Output path; stdout when absent.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Examples { opts, format } => commands::examples(&opts, format),
        Command::Monotone { file, name, opts, certificate, format } => {
            commands::monotone(&file, &name, &opts, certificate.as_deref(), format)
        }
        Command::Membership { file, opts, certificate, format } => {
            commands::membership(&file, &opts, certificate.as_deref(), format)
        }
        Command::Sweep { grid, tol, format } => commands::sweep(grid, tol, format),
        Command::Export { resource, out } => commands::export(resource, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
